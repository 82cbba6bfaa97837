"""LSSP reconstruction: reweighted l1 spectra + temporal smoothing + rank surrogate.

Three nested loops: the outer loop re-weights the l1 penalties on the graph
and time spectra, the middle loop runs ADMM over (F_G, F_T, X_hat, E) with
multiplier ascent, and the inner loops solve the F_G / F_T subproblems by
accelerated proximal gradient steps.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np
import scipy.linalg

from .sampling import SampleSet, observed_matrix
from .signal import TimeVertexSignal, second_difference_matrix
from .spectral import SpectralBases

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Non-finite iterate; carries the loop coordinates where it appeared."""

    def __init__(self, message: str, outer: int | None = None, middle: int | None = None,
                 inner: int | None = None):
        super().__init__(f"{message} (outer={outer}, middle={middle}, inner={inner})")
        self.outer, self.middle, self.inner = outer, middle, inner


PENALTY_RESTARTS = ("none", "mu", "all")


@dataclass(frozen=True)
class LsspConfig:
    gamma_g: float = 1.0
    gamma_t: float = 1.0
    gamma_d: float = 0.1
    zeta: float = 1e-3
    mu_init: float | None = None  # None: 1 / (2 max singular value of X_S)
    rho: float = 1.05
    mu_max_factor: float = 1e8
    outer_iters: int = 5
    middle_iters: int = 50
    inner_iters: int = 10
    tol: float = 1e-4
    rank_surrogate_floor: float = 1e-12
    penalty_restart: str = "none"  # "none" | "mu" | "all": what each outer round resets

    def __post_init__(self):
        for name in ("gamma_g", "gamma_t", "gamma_d"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.zeta <= 0:
            raise ValueError(f"zeta must be > 0, got {self.zeta}")
        if self.mu_init is not None and self.mu_init <= 0:
            raise ValueError(f"mu_init must be > 0, got {self.mu_init}")
        if self.rho <= 1:
            raise ValueError(f"rho must be > 1, got {self.rho}")
        if self.mu_max_factor < 1:
            raise ValueError(f"mu_max_factor must be >= 1, got {self.mu_max_factor}")
        for name in ("outer_iters", "middle_iters", "inner_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.tol < 0:
            raise ValueError(f"tol must be >= 0, got {self.tol}")
        if self.rank_surrogate_floor <= 0:
            raise ValueError("rank_surrogate_floor must be > 0")
        if self.penalty_restart not in PENALTY_RESTARTS:
            raise ValueError(f"penalty_restart must be one of {PENALTY_RESTARTS}")

    @classmethod
    def from_dict(cls, data: dict) -> "LsspConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown LSSP config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class LsspState:
    x_hat: np.ndarray
    f_g: np.ndarray
    f_t: np.ndarray
    e: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    y3: np.ndarray
    w_g: np.ndarray
    w_t: np.ndarray
    r_weight: np.ndarray
    mu1: float
    mu2: float
    mu3: float

    @classmethod
    def initial(cls, n: int, t: int, mu: float) -> "LsspState":
        ones = np.ones
        return cls(
            x_hat=ones((n, t)), f_g=ones((n, t)), f_t=ones((t, n)), e=ones((n, t)),
            y1=ones((n, t)), y2=ones((t, n)), y3=ones((n, t)),
            w_g=ones((n, t)), w_t=ones((t, n)), r_weight=np.zeros((t, t)),
            mu1=mu, mu2=mu, mu3=mu,
        )


def soft_threshold(a, w) -> np.ndarray:
    """Elementwise shrinkage sign(a) * max(|a| - w, 0)."""
    a = np.asarray(a, dtype=float)
    w = np.asarray(w, dtype=float)
    if w.shape != a.shape and w.ndim != 0:
        raise ValueError(f"threshold shape {w.shape} does not match {a.shape}")
    return np.sign(a) * np.maximum(np.abs(a) - w, 0.0)


def momentum_sequence(q: int) -> list[float]:
    """b^1 = 1, b^{q+1} = (1 + sqrt(4 (b^q)^2 + 1)) / 2."""
    b = [1.0]
    for _ in range(q - 1):
        b.append((1.0 + math.sqrt(4.0 * b[-1] ** 2 + 1.0)) / 2.0)
    return b


def _prox_spectrum(start, psi, target, y, mu, threshold, inner_iters, step=None,
                   where=(None, None)):
    """Accelerated proximal steps for min ||W o F||_1 + <Y, Z - psi F> + mu/2 ||Z - psi F||^2.

    ``target`` is Z and ``threshold`` is gamma * W / mu. The default step
    is 1 / mu, the inverse Lipschitz constant of the smooth part.
    """
    tau = 1.0 / mu if step is None else step
    drift = psi.T @ y + mu * (psi.T @ target)
    f_prev = start
    a = start
    b = 1.0
    for q in range(inner_iters):
        grad = mu * a - drift
        f_next = soft_threshold(a - tau * grad, threshold)
        if not np.all(np.isfinite(f_next)):
            raise SolverError("non-finite spectrum iterate", where[0], where[1], q)
        b_next = (1.0 + math.sqrt(4.0 * b * b + 1.0)) / 2.0
        a = f_next + (b - 1.0) / b_next * (f_next - f_prev)
        f_prev, b = f_next, b_next
    return f_prev


def update_fg(state: LsspState, bases: SpectralBases, config: LsspConfig, step=None,
              where=(None, None)) -> np.ndarray:
    """Graph-spectrum update: Q proximal steps from the current F_G."""
    return _prox_spectrum(state.f_g, bases.psi_g, state.x_hat, state.y1, state.mu1,
                          config.gamma_g * state.w_g / state.mu1, config.inner_iters,
                          step, where)


def update_ft(state: LsspState, bases: SpectralBases, config: LsspConfig, step=None,
              where=(None, None)) -> np.ndarray:
    """Time-spectrum update, the transpose-domain mirror of :func:`update_fg`."""
    return _prox_spectrum(state.f_t, bases.psi_t, state.x_hat.T, state.y2, state.mu2,
                          config.gamma_t * state.w_t / state.mu2, config.inner_iters,
                          step, where)


def rank_surrogate_derivative(x):
    """g'(x) = 1 / (2 sqrt(x) (sqrt(x) + 1)) for g(x) = log(sqrt(x) + 1)."""
    root = np.sqrt(x)
    return 1.0 / (2.0 * root * (root + 1.0))


def rank_surrogate(x):
    return np.log(np.sqrt(np.maximum(x, 0.0)) + 1.0)


def update_rank_weight(x_hat, floor: float = 1e-12) -> np.ndarray:
    """R = U g'(Lambda) U^T from the eigendecomposition of X_hat^T X_hat."""
    x_hat = np.asarray(x_hat, dtype=float)
    if not np.all(np.isfinite(x_hat)):
        raise SolverError("non-finite X_hat in rank weight update")
    gram = x_hat.T @ x_hat
    evals, evecs = np.linalg.eigh(gram)
    weights = rank_surrogate_derivative(np.maximum(evals, floor))
    r = (evecs * weights) @ evecs.T
    return 0.5 * (r + r.T)


def xhat_system(state: LsspState, bases: SpectralBases, d2: np.ndarray, observed: np.ndarray,
                config: LsspConfig) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side B and T x T matrix M of the stationarity equation X M = B."""
    rhs = (state.y3 - state.y1 - state.y2.T
           + state.mu1 * (bases.psi_g @ state.f_g)
           + state.mu2 * (state.f_t.T @ bases.psi_t.T)
           + state.mu3 * (observed - state.e))
    t = rhs.shape[1]
    system = (2.0 * state.r_weight + 2.0 * config.gamma_d * (d2 @ d2.T)
              + (state.mu1 + state.mu2 + state.mu3) * np.eye(t))
    return rhs, 0.5 * (system + system.T)


def update_xhat(state: LsspState, bases: SpectralBases, d2: np.ndarray, observed: np.ndarray,
                config: LsspConfig) -> np.ndarray:
    """Closed-form X_hat: solve X M = B with M symmetric positive definite."""
    rhs, system = xhat_system(state, bases, d2, observed, config)
    try:
        factor = scipy.linalg.cho_factor(system)
        # X M = B  <=>  M X^T = B^T
        return scipy.linalg.cho_solve(factor, rhs.T).T
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"X_hat system solve failed: {exc}") from exc


def update_error(state: LsspState, observed: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """E = 0 on S, Y3 / mu3 + X_S - X_hat on the complement."""
    e = state.y3 / state.mu3 + observed - state.x_hat
    e[mask] = 0.0
    return e


@dataclass(frozen=True)
class Residuals:
    graph: np.ndarray  # X_hat - psi_g F_G
    time: np.ndarray  # X_hat^T - psi_t F_T
    data: np.ndarray  # X_S - X_hat - E


def residuals(state: LsspState, bases: SpectralBases, observed: np.ndarray) -> Residuals:
    return Residuals(
        graph=state.x_hat - bases.psi_g @ state.f_g,
        time=state.x_hat.T - bases.psi_t @ state.f_t,
        data=observed - state.x_hat - state.e,
    )


def update_multipliers(state: LsspState, bases: SpectralBases, observed: np.ndarray,
                       config: LsspConfig, mu_max: float = math.inf) -> LsspState:
    """Dual ascent on Y1..Y3 with the current penalties, then mu <- min(rho mu, mu_max)."""
    res = residuals(state, bases, observed)
    return replace(
        state,
        y1=state.y1 + state.mu1 * res.graph,
        y2=state.y2 + state.mu2 * res.time,
        y3=state.y3 + state.mu3 * res.data,
        mu1=min(config.rho * state.mu1, mu_max),
        mu2=min(config.rho * state.mu2, mu_max),
        mu3=min(config.rho * state.mu3, mu_max),
    )


def update_weights(f_g, f_t, zeta: float) -> tuple[np.ndarray, np.ndarray]:
    if zeta <= 0:
        raise ValueError(f"zeta must be > 0, got {zeta}")
    return 1.0 / (np.abs(f_g) + zeta), 1.0 / (np.abs(f_t) + zeta)


def objective_value(state: LsspState, d2: np.ndarray, config: LsspConfig) -> float:
    """Value of the regularized objective at the current iterate."""
    gram_evals = np.linalg.eigvalsh(state.x_hat.T @ state.x_hat)
    smooth = state.x_hat @ d2
    return float(
        rank_surrogate(gram_evals).sum()
        + config.gamma_g * np.abs(state.w_g * state.f_g).sum()
        + config.gamma_t * np.abs(state.w_t * state.f_t).sum()
        + config.gamma_d * (smooth * smooth).sum()
    )


@dataclass
class IterationRecord:
    outer: int
    middle: int
    objective: float
    residual_graph: float
    residual_time: float
    residual_data: float
    observed_rmse: float
    mu: float


@dataclass
class LsspResult:
    signal: TimeVertexSignal
    state: LsspState
    history: list[IterationRecord] = field(default_factory=list)
    outer_iterations: int = 0
    converged: bool = False


def default_mu(observed: np.ndarray) -> float:
    top = np.linalg.norm(observed, 2)
    return 1.0 / (2.0 * top) if top > 0 else 1.0


def lssp_reconstruct(samples: SampleSet, bases: SpectralBases, config: LsspConfig | None = None,
                     record_history: bool = True) -> LsspResult:
    """Reconstruct the full signal from a subset-random SampleSet.

    Parameters
    ----------
    samples : SampleSet
        Observed entries; everything outside ``samples.mask`` is unknown.
    bases : SpectralBases
        Graph (N x N) and time (T x T) orthonormal bases.
    config : LsspConfig, optional
        Solver parameters; defaults are used when omitted.
    record_history : bool
        Keep one :class:`IterationRecord` per middle iteration.

    Returns
    -------
    LsspResult
        Reconstructed signal, final iterate and per-iteration diagnostics.
    """
    config = config or LsspConfig()
    n, t = samples.n, samples.t
    if bases.psi_g is None or bases.psi_t is None or bases.psi_g.shape != (n, n) \
            or bases.psi_t.shape != (t, t):
        raise ValueError(f"bases do not match a {n} x {t} signal")
    if t < 3:
        raise ValueError(f"LSSP needs T >= 3 for the second difference, got T = {t}")
    obs_signal, mask = observed_matrix(samples)
    observed = obs_signal.data
    d2 = second_difference_matrix(t)
    mu0 = config.mu_init if config.mu_init is not None else default_mu(observed)
    mu_max = mu0 * config.mu_max_factor
    state = LsspState.initial(n, t, mu0)
    result = LsspResult(signal=None, state=state)
    n_obs = max(int(mask.sum()), 1)

    for p in range(config.outer_iters):
        x_prev = state.x_hat
        if p > 0 and config.penalty_restart != "none":
            state.mu1 = state.mu2 = state.mu3 = mu0
            if config.penalty_restart == "all":
                fresh = LsspState.initial(n, t, mu0)
                state.y1, state.y2, state.y3 = fresh.y1, fresh.y2, fresh.y3
        for k in range(config.middle_iters):
            where = (p, k)
            state.f_g = update_fg(state, bases, config, where=where)
            state.f_t = update_ft(state, bases, config, where=where)
            state.r_weight = update_rank_weight(state.x_hat, config.rank_surrogate_floor)
            state.x_hat = update_xhat(state, bases, d2, observed, config)
            if not np.all(np.isfinite(state.x_hat)):
                raise SolverError("non-finite X_hat", p, k)
            state.e = update_error(state, observed, mask)
            if record_history:
                res = residuals(state, bases, observed)
                err = (state.x_hat - observed)[mask]
                result.history.append(IterationRecord(
                    outer=p, middle=k,
                    objective=objective_value(state, d2, config),
                    residual_graph=float(np.linalg.norm(res.graph)),
                    residual_time=float(np.linalg.norm(res.time)),
                    residual_data=float(np.linalg.norm(res.data)),
                    observed_rmse=float(np.sqrt((err * err).sum() / n_obs)),
                    mu=state.mu3,
                ))
            state = update_multipliers(state, bases, observed, config, mu_max)
        state.w_g, state.w_t = update_weights(state.f_g, state.f_t, config.zeta)
        result.outer_iterations = p + 1
        ref = np.linalg.norm(x_prev)
        change = np.linalg.norm(state.x_hat - x_prev) / ref if ref > 0 else np.inf
        log.debug("outer %d: relative change %.3e", p, change)
        if change < config.tol:
            result.converged = True
            break

    result.state = state
    result.signal = TimeVertexSignal(state.x_hat)
    return result
