"""Singular value thresholding baseline (nuclear norm only, no graph/time priors)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lssp import SolverError
from .sampling import SampleSet, observed_matrix
from .signal import TimeVertexSignal


@dataclass
class SvtResult:
    signal: TimeVertexSignal
    iterations: int
    converged: bool
    tau: float
    step: float
    structural_missing: bool


def singular_value_shrink(y: np.ndarray, tau: float) -> np.ndarray:
    try:
        u, s, vt = np.linalg.svd(y, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails on finite input; the QR-based driver is slower but robust
        u, s, vt = scipy.linalg.svd(y, full_matrices=False, lapack_driver="gesvd")
    s = np.maximum(s - tau, 0.0)
    keep = s > 0
    return (u[:, keep] * s[keep]) @ vt[keep]


def default_svt_params(samples: SampleSet) -> tuple[float, float]:
    """tau = 5 sqrt(N T) * mean |observed|, step = 1.2 / alpha_total."""
    mean_mag = float(np.abs(samples.values).mean()) if samples.size else 0.0
    return 5.0 * math.sqrt(samples.n * samples.t) * mean_mag, 1.2 / max(samples.alpha_total, 1e-12)


def svt_baseline(samples: SampleSet, tau: float | None = None, step: float | None = None,
                 max_iters: int = 500, tol: float = 1e-4) -> SvtResult:
    """Iterate X = shrink(Y, tau); Y += step * P_S(M - X).

    Rows and columns without any observation receive no update in Y, so they
    stay at zero in every iterate.
    """
    default_tau, default_step = default_svt_params(samples)
    tau = default_tau if tau is None else tau
    step = default_step if step is None else step
    obs_signal, mask = observed_matrix(samples)
    m = obs_signal.data
    structural = bool(samples.unobserved_rows().size or samples.unobserved_cols().size)
    m_norm = np.linalg.norm(m)
    if m_norm == 0:
        return SvtResult(TimeVertexSignal(np.zeros_like(m)), 0, True, tau, step, structural)

    # warm start so the first shrinkage is not all zeros
    k0 = max(math.ceil(tau / (step * np.linalg.norm(m, 2))), 0)
    y = k0 * step * m
    x = np.zeros_like(m)
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        if not np.all(np.isfinite(y)):
            raise SolverError(f"SVT diverged at iteration {it}")
        try:
            x = singular_value_shrink(y, tau)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"SVT diverged at iteration {it}: {exc}") from exc
        resid = np.where(mask, m - x, 0.0)
        rel = np.linalg.norm(resid) / m_norm
        if not np.isfinite(rel) or rel > 1e10:
            raise SolverError(f"SVT diverged at iteration {it}")
        if rel < tol:
            converged = True
            break
        y += step * resid
    # zero rows/cols of Y shrink to exact zeros; drop the SVD round-off there
    x[~mask.any(axis=1)] = 0.0
    x[:, ~mask.any(axis=0)] = 0.0
    return SvtResult(TimeVertexSignal(x), it, converged, tau, step, structural)
