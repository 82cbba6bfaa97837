"""Thin SVD, numerical rank, condition number and incoherence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import as_matrix

DEFAULT_RANK_TOL = 1e-9


@dataclass(frozen=True)
class SvdSummary:
    """Rank-r part of a thin SVD with its incoherence parameters.

    For the all-zero matrix ``rank`` is 0 and ``condition_number``,
    ``mu1`` and ``mu2`` are ``None``.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    rank: int
    condition_number: float | None
    mu1: float | None
    mu2: float | None

    @property
    def shape(self) -> tuple[int, int]:
        return self.u.shape[0], self.v.shape[0]


def row_2inf_norm(matrix) -> float:
    """Largest row-wise l2 norm."""
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    if m.size == 0:
        return 0.0
    return float(np.sqrt((m * m).sum(axis=1)).max())


def _rank_from_sigma(sigma: np.ndarray, rank_tol: float) -> int:
    if sigma.size == 0 or sigma[0] <= 0.0:
        return 0
    return int(np.count_nonzero(sigma > rank_tol * sigma[0]))


def numerical_rank(matrix, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    if m.size == 0:
        return 0
    return _rank_from_sigma(np.linalg.svd(m, compute_uv=False), rank_tol)


def thin_svd_summary(signal, rank_tol: float = DEFAULT_RANK_TOL) -> SvdSummary:
    x = as_matrix(signal)
    n, t = x.shape
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    r = _rank_from_sigma(s, rank_tol)
    if r == 0:
        return SvdSummary(np.zeros((n, 0)), np.zeros(0), np.zeros((t, 0)), 0, None, None, None)
    u, s, v = u[:, :r], s[:r], vt[:r].T
    return SvdSummary(
        u=u,
        sigma=s,
        v=v,
        rank=r,
        condition_number=float(s[0] / s[-1]),
        mu1=n / r * row_2inf_norm(u) ** 2,
        mu2=t / r * row_2inf_norm(v) ** 2,
    )
