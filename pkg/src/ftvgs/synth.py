"""Synthetic band-limited time-vertex signals, NRMSE, and sampling-ratio sweeps."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .signal import GraphTopology, TimeVertexSignal, as_matrix, random_connected_graph
from .spectral import SpectralBases, make_bases

log = logging.getLogger(__name__)

LOWEST = "lowest"
RANDOM = "random"


class ZeroReferenceError(ValueError):
    """NRMSE against an all-zero reference is undefined."""


@dataclass(frozen=True)
class SynthSpec:
    n: int = 128
    t: int = 128
    num_nonzero_rows: int = 100
    bandwidth_min: int = 28
    bandwidth_max: int = 88
    seed: int = 0
    row_selection: str = LOWEST

    def __post_init__(self):
        if self.n < 1 or self.t < 1:
            raise ValueError(f"n and t must be >= 1, got {self.n}, {self.t}")
        if not 1 <= self.num_nonzero_rows <= self.n:
            raise ValueError(f"num_nonzero_rows must lie in [1, {self.n}]")
        if not 1 <= self.bandwidth_min <= self.bandwidth_max <= self.t:
            raise ValueError(
                f"need 1 <= bandwidth_min <= bandwidth_max <= t, got "
                f"{self.bandwidth_min}, {self.bandwidth_max}, t={self.t}"
            )
        if self.row_selection not in (LOWEST, RANDOM):
            raise ValueError(f"row_selection must be {LOWEST!r} or {RANDOM!r}")


@dataclass(frozen=True)
class SyntheticInstance:
    spec: SynthSpec
    topology: GraphTopology
    bases: SpectralBases
    signal: TimeVertexSignal
    f_j: np.ndarray


def generate_synthetic(spec: SynthSpec, bases: SpectralBases) -> tuple[TimeVertexSignal, np.ndarray]:
    """X = psi_g F_J psi_t^T with a row-sparse, low-pass joint spectrum F_J.

    ``num_nonzero_rows`` rows of F_J are active (the lowest graph
    frequencies, or uniformly random rows). Active row i carries i.i.d.
    standard normal values on its first b_i temporal frequencies, with
    b_i uniform on [bandwidth_min, bandwidth_max].
    """
    if bases.psi_g is None or bases.psi_t is None \
            or bases.psi_g.shape[0] != spec.n or bases.psi_t.shape[0] != spec.t:
        raise ValueError(f"bases do not match an {spec.n} x {spec.t} signal")
    rng = np.random.default_rng([spec.seed, 1])
    if spec.row_selection == LOWEST:
        active = np.arange(spec.num_nonzero_rows)
    else:
        active = np.sort(rng.choice(spec.n, spec.num_nonzero_rows, replace=False))
    widths = rng.integers(spec.bandwidth_min, spec.bandwidth_max + 1, size=active.size)
    f_j = np.zeros((spec.n, spec.t))
    for row, width in zip(active, widths):
        f_j[row, :width] = rng.standard_normal(width)
    x = bases.psi_g @ f_j @ bases.psi_t.T
    return TimeVertexSignal(x), f_j


def synthetic_instance(spec: SynthSpec | None = None) -> SyntheticInstance:
    """Random connected graph, its bases, and one synthetic signal, all from ``spec.seed``."""
    spec = spec or SynthSpec()
    topology = random_connected_graph(spec.n, np.random.default_rng([spec.seed, 0]))
    bases = make_bases(topology, spec.t)
    signal, f_j = generate_synthetic(spec, bases)
    return SyntheticInstance(spec, topology, bases, signal, f_j)


def nrmse(reference, estimate) -> float:
    """||X_ref - X_est||_F / ||X_ref||_F."""
    a = as_matrix(reference)
    b = as_matrix(estimate)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    denom = np.linalg.norm(a)
    if denom == 0:
        raise ZeroReferenceError("reference signal is identically zero")
    return float(np.linalg.norm(a - b) / denom)


@dataclass(frozen=True)
class SweepRow:
    method: str
    alpha_rc: float
    alpha_sub: float
    alpha_total: float
    seed_count: int
    mean_nrmse: float
    std_nrmse: float
    failures: int = 0

    CSV_COLUMNS = ("method", "alpha_rc", "alpha_sub", "alpha_total", "seed_count",
                   "mean_nrmse", "std_nrmse")


def _reconstruct(method: str, samples, bases, config):
    from .lssp import lssp_reconstruct
    from .svt import svt_baseline

    if method == "lssp":
        return lssp_reconstruct(samples, bases, config, record_history=False).signal
    if method == "svt":
        return svt_baseline(samples).signal
    raise ValueError(f"unknown method {method!r}")


def run_sweep(signal, ratios, bases: SpectralBases, seeds, methods=("lssp", "svt"),
              config=None, jobs: int = 1, mode: str = "without") -> list[SweepRow]:
    """Mean NRMSE per (method, ratio) over seeds.

    Each ratio ``a`` is used for both alpha_rc and alpha_sub; pass
    ``(alpha_rc, alpha_sub)`` tuples to set them separately. A failing
    cell is logged and counted, not raised.
    """
    from .sampling import subset_random_sample

    x = as_matrix(signal)
    seeds = list(seeds)
    if not seeds:
        raise ValueError("run_sweep needs at least one seed")
    pairs = [(float(r), float(r)) if np.isscalar(r) else (float(r[0]), float(r[1]))
             for r in ratios]
    for a_rc, a_sub in pairs:
        if not (0 < a_rc <= 1 and 0 < a_sub <= 1):
            raise ValueError(f"ratios must lie in (0, 1], got ({a_rc}, {a_sub})")

    cells = [(m, pair, s) for m in methods for pair in pairs for s in seeds]

    def run_cell(cell):
        method, (a_rc, a_sub), seed = cell
        samples = subset_random_sample(x, a_rc, a_sub, seed=seed, mode=mode)
        try:
            est = _reconstruct(method, samples, bases, config)
            return samples.alpha_total, nrmse(x, est)
        except Exception as exc:  # recorded per cell
            log.warning("sweep cell %s failed: %s", cell, exc)
            return samples.alpha_total, None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_cell, cells))
    else:
        outcomes = [run_cell(c) for c in cells]
    by_cell = dict(zip(cells, outcomes))

    rows = []
    for method in methods:
        for pair in pairs:
            results = [by_cell[(method, pair, s)] for s in seeds]
            errors = np.array([e for _, e in results if e is not None])
            rows.append(SweepRow(
                method=method, alpha_rc=pair[0], alpha_sub=pair[1],
                alpha_total=float(np.mean([a for a, _ in results])),
                seed_count=len(errors),
                mean_nrmse=float(errors.mean()) if errors.size else float("nan"),
                std_nrmse=float(errors.std()) if errors.size else float("nan"),
                failures=len(seeds) - len(errors),
            ))
    return rows
