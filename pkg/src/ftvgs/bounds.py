"""Sufficient-condition bounds for subset random sampling and Monte-Carlo checks.

All logarithms are natural logarithms.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .analysis import DEFAULT_RANK_TOL, SvdSummary, numerical_rank, row_2inf_norm, thin_svd_summary
from .sampling import fisher_yates_prefix
from .signal import as_matrix

CEIL_RTOL = 1e-9
CEIL_ATOL = 1e-6


class BoundParamError(ValueError):
    pass


def tolerant_ceil(value: float) -> int:
    """Ceiling that ignores floating-point noise just above an integer.

    Values within 1e-9 relative (and at most 1e-6 absolute) of an integer
    snap to it, so 3 * (1 + 1e-12) counts as 3 but 2.9e10 + 0.4 does not.
    """
    nearest = round(value)
    if abs(value - nearest) <= min(CEIL_RTOL * max(1.0, abs(value)), CEIL_ATOL):
        return int(nearest)
    return int(math.ceil(value))


@dataclass(frozen=True)
class BoundParams:
    delta: float = 0.1
    epsilon: float = 0.5
    eta: float = 0.5
    beta: float = 1.21

    def __post_init__(self):
        check_open_unit("delta", self.delta)
        check_open_unit("epsilon", self.epsilon)
        check_eta(self.eta)
        check_beta(self.beta)


def check_open_unit(name: str, value: float):
    if not 0.0 < value < 1.0:
        raise BoundParamError(f"{name} must lie in (0, 1), got {value}")


def check_eta(eta: float):
    if not 0.0 <= eta < 1.0:
        raise BoundParamError(f"eta must lie in [0, 1), got {eta}")


def check_beta(beta: float):
    if not beta > 1.0:
        raise BoundParamError(f"beta must be > 1, got {beta}")


def lemma1_min_selection(r: int, mu1: float, mu2: float, delta: float,
                         epsilon: float) -> tuple[int, int]:
    """Minimum |I| and |J| for the selected rows/columns to keep rank r.

    |I| >= 3 r mu1 ln(2r/delta) / epsilon^2, likewise |J| with mu2.
    """
    check_open_unit("delta", delta)
    check_open_unit("epsilon", epsilon)
    if r < 1:
        raise BoundParamError(f"rank must be >= 1, got {r}")
    if mu1 < 1.0 or mu2 < 1.0:
        raise BoundParamError(f"incoherence must be >= 1, got mu1={mu1}, mu2={mu2}")
    common = 3.0 * r * math.log(2.0 * r / delta) / epsilon**2
    return tolerant_ceil(common * mu1), tolerant_ceil(common * mu2)


def coherence_failure_prob(r: int, eta: float) -> float:
    """p = r * (e^-eta / (1 - eta)^(1 - eta)) ** ln r."""
    check_eta(eta)
    base = math.exp(-eta) / (1.0 - eta) ** (1.0 - eta)
    return r * base ** math.log(r)


@dataclass(frozen=True)
class CoherenceBounds:
    u_bound: float
    v_bound: float
    failure_prob: float
    success_prob: float
    informative: bool


def lemma2_coherence_bounds(svd: SvdSummary, size_i: int, size_j: int, n_rows_total: int,
                            eta: float) -> CoherenceBounds:
    """Row-norm bounds for the singular vectors of X(I, J).

    ``success_prob`` is (1 - p)^2 when p < 1. For p >= 1 the bound says
    nothing; the probability is reported as 0 and ``informative`` is False.
    """
    check_eta(eta)
    r = svd.rank
    if r < 1:
        raise BoundParamError("coherence bounds need a matrix of rank >= 1")
    if size_i < r or size_j < r:
        raise BoundParamError(f"|I|={size_i} and |J|={size_j} must both be >= rank {r}")
    kappa = svd.condition_number
    u_bound = kappa * math.sqrt(svd.mu1 * r / ((1.0 - eta) * size_i))
    v_bound = kappa / (1.0 - eta) * math.sqrt(svd.mu2 * n_rows_total * r / (size_i * size_j))
    p = coherence_failure_prob(r, eta)
    informative = p < 1.0
    success = (1.0 - p) ** 2 if informative else 0.0
    return CoherenceBounds(u_bound, v_bound, p, success, informative)


@dataclass(frozen=True)
class BoundsReport:
    rank: int
    condition_number: float
    mu1: float
    mu2: float
    n_rows_total: int
    n_cols_total: int | None
    size_i: int
    size_j: int
    delta: float
    epsilon: float
    eta: float
    beta: float
    min_rows: int
    min_cols: int
    min_samples: int
    lemma2_u_bound: float
    lemma2_v_bound: float
    lemma2_failure_prob: float
    lemma2_success_prob: float
    lemma2_informative: bool
    theorem_success_prob: float
    theorem_informative: bool
    feasible: bool

    def to_dict(self) -> dict:
        return asdict(self)


def theorem_sample_bound(kappa: float, r: int, n_rows_total: int, mu1: float, mu2: float,
                         size_i: int, size_j: int, beta: float, eta: float) -> float:
    """Right-hand side of the |S| lower bound, before rounding up."""
    n = max(size_i, size_j)
    return (32.0 * beta * kappa**4 * r**2 * n_rows_total / (1.0 - eta) ** 3
            * mu1 * mu2 * (size_i + size_j) / size_i * math.log(2.0 * n) ** 2)


def theorem_success_prob(delta: float, p: float, size_i: int, size_j: int, beta: float) -> float:
    """(1-delta)^2 (1-p)^2 - 6 ln n / (|I|+|J|)^(2 beta - 2) - n^(2 - 2 sqrt(beta))."""
    n = max(size_i, size_j)
    return ((1.0 - delta) ** 2 * (1.0 - p) ** 2
            - 6.0 * math.log(n) / (size_i + size_j) ** (2.0 * beta - 2.0)
            - n ** (2.0 - 2.0 * math.sqrt(beta)))


def theorem_min_samples(svd: SvdSummary, n_rows_total: int, size_i: int, size_j: int,
                        beta: float, eta: float, delta: float = 0.1, epsilon: float = 0.5,
                        n_cols_total: int | None = None) -> BoundsReport:
    """Evaluate all three bounds for one (X, |I|, |J|) configuration.

    The composite probability is reported as computed, including negative
    values; ``theorem_informative`` flags whether it lies in (0, 1].
    """
    check_beta(beta)
    check_eta(eta)
    check_open_unit("delta", delta)
    check_open_unit("epsilon", epsilon)
    if size_i < 1 or size_j < 1:
        raise BoundParamError(f"|I| and |J| must be >= 1, got {size_i}, {size_j}")
    r = svd.rank
    min_rows, min_cols = lemma1_min_selection(r, svd.mu1, svd.mu2, delta, epsilon)
    lemma2 = lemma2_coherence_bounds(svd, max(size_i, r), max(size_j, r), n_rows_total, eta)
    kappa = svd.condition_number
    min_samples = tolerant_ceil(theorem_sample_bound(
        kappa, r, n_rows_total, svd.mu1, svd.mu2, size_i, size_j, beta, eta))
    prob = theorem_success_prob(delta, lemma2.failure_prob, size_i, size_j, beta)
    feasible = (min_samples <= size_i * size_j and min_rows <= n_rows_total
                and (n_cols_total is None or min_cols <= n_cols_total))
    return BoundsReport(
        rank=r, condition_number=kappa, mu1=svd.mu1, mu2=svd.mu2,
        n_rows_total=n_rows_total, n_cols_total=n_cols_total,
        size_i=size_i, size_j=size_j,
        delta=delta, epsilon=epsilon, eta=eta, beta=beta,
        min_rows=min_rows, min_cols=min_cols, min_samples=min_samples,
        lemma2_u_bound=lemma2.u_bound, lemma2_v_bound=lemma2.v_bound,
        lemma2_failure_prob=lemma2.failure_prob, lemma2_success_prob=lemma2.success_prob,
        lemma2_informative=lemma2.informative,
        theorem_success_prob=prob,
        theorem_informative=bool(lemma2.informative and 0.0 < prob <= 1.0),
        feasible=bool(feasible),
    )


def summary_from_params(rank: int, kappa: float, mu1: float, mu2: float) -> SvdSummary:
    """Stand-in SvdSummary carrying only the scalars the evaluators read."""
    return SvdSummary(np.zeros((0, rank)), np.zeros(rank), np.zeros((0, rank)),
                      int(rank), float(kappa), float(mu1), float(mu2))


def _trial_rng(seed: int | None, trial: int) -> np.random.Generator:
    return np.random.default_rng([0 if seed is None else seed, trial])


def mc_rank_preservation(signal, size_i: int, trials: int, seed: int | None = 0,
                         rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """Fraction of uniform row selections of size ``size_i`` that keep rank r."""
    x = as_matrix(signal)
    n = x.shape[0]
    if not 1 <= size_i <= n:
        raise BoundParamError(f"size_i must lie in [1, {n}], got {size_i}")
    if trials < 1:
        raise BoundParamError(f"trials must be >= 1, got {trials}")
    r = numerical_rank(x, rank_tol)
    if size_i == n:
        return 1.0
    # relative tolerance is taken against the full matrix's top singular value
    cutoff = rank_tol * np.linalg.norm(x, 2)
    kept = 0
    for trial in range(trials):
        rows = fisher_yates_prefix(n, size_i, _trial_rng(seed, trial))
        sub_sigma = np.linalg.svd(x[rows], compute_uv=False)
        if np.count_nonzero(sub_sigma > cutoff) == r:
            kept += 1
    return kept / trials


@dataclass(frozen=True)
class CoherenceTransferResult:
    max_u_norm: float
    max_v_norm: float
    fraction_within: float
    trials_used: int
    excluded: int
    u_bound: float
    v_bound: float


def submatrix_singular_vectors(svd: SvdSummary, rows, cols,
                               rank_tol: float = DEFAULT_RANK_TOL):
    """Left/right singular vectors of X(I, J) built through X(I, :).

    First U(I, :) Sigma = U_R Sigma_R Vt_R gives X_R = U_R Sigma_R (V Vt_R^T)^T,
    then Sigma_R V_R(J, :)^T = Ut_RC Sigma_RC V_RC^T gives U_RC = U_R Ut_RC.
    Returns ``None`` when either factor loses rank.
    """
    r = svd.rank
    a = svd.u[rows] * svd.sigma
    u_r, s_r, vt_tilde = np.linalg.svd(a, full_matrices=False)
    if s_r.size < r or s_r[r - 1] <= rank_tol * svd.sigma[0]:
        return None
    v_r = svd.v @ vt_tilde.T
    b = s_r[:, None] * v_r[cols].T
    ut_rc, s_rc, vt_rc = np.linalg.svd(b, full_matrices=False)
    if s_rc.size < r or s_rc[r - 1] <= rank_tol * svd.sigma[0]:
        return None
    return u_r @ ut_rc, vt_rc.T


def mc_coherence_transfer(signal, size_i: int, size_j: int, trials: int, seed: int | None = 0,
                          eta: float = 0.5, rank_tol: float = DEFAULT_RANK_TOL
                          ) -> CoherenceTransferResult:
    """Empirical row norms of the submatrix singular vectors versus their bounds."""
    x = as_matrix(signal)
    n, t = x.shape
    if not (1 <= size_i <= n and 1 <= size_j <= t):
        raise BoundParamError(f"sizes ({size_i}, {size_j}) out of range for shape {x.shape}")
    svd = thin_svd_summary(x, rank_tol)
    bounds = lemma2_coherence_bounds(svd, size_i, size_j, n, eta)
    max_u = max_v = 0.0
    within = used = 0
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        rows = np.sort(fisher_yates_prefix(n, size_i, rng))
        cols = np.sort(fisher_yates_prefix(t, size_j, rng))
        vectors = submatrix_singular_vectors(svd, rows, cols, rank_tol)
        if vectors is None:
            continue
        used += 1
        u_norm, v_norm = row_2inf_norm(vectors[0]), row_2inf_norm(vectors[1])
        max_u, max_v = max(max_u, u_norm), max(max_v, v_norm)
        if u_norm <= bounds.u_bound * (1 + 1e-12) and v_norm <= bounds.v_bound * (1 + 1e-12):
            within += 1
    return CoherenceTransferResult(
        max_u_norm=max_u, max_v_norm=max_v,
        fraction_within=within / used if used else 0.0,
        trials_used=used, excluded=trials - used,
        u_bound=bounds.u_bound, v_bound=bounds.v_bound,
    )
