"""Subset random sampling: rows, then columns, then entries of the submatrix."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .signal import TimeVertexSignal, as_matrix

WITHOUT = "without"
WITH = "with"
MODES = (WITHOUT, WITH)


class SamplingError(ValueError):
    pass


def round_half_away(ratio: float, count: int) -> int:
    """Round(ratio * count) to the nearest integer, halves away from zero.

    The product is formed in decimal arithmetic from the ratio's shortest
    repr, so ``0.9 * 13225`` rounds to 11903 rather than depending on the
    binary representation of 0.9.
    """
    exact = Decimal(repr(float(ratio))) * Decimal(int(count))
    return int(exact.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def fisher_yates_prefix(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """First ``k`` positions of a Fisher-Yates shuffle of ``range(n)``."""
    if not 0 <= k <= n:
        raise SamplingError(f"cannot draw {k} distinct items from {n}")
    pool = list(range(n))
    draws = rng.random(k)
    for i in range(k):
        j = i + int(draws[i] * (n - i))
        pool[i], pool[j] = pool[j], pool[i]
    return np.array(pool[:k], dtype=np.int64)


@dataclass(frozen=True)
class SampleSet:
    """Result of one subset random sampling run.

    ``entries`` is a (|S|, 2) integer array of (row, col) positions sorted
    row-major and ``values`` the observed values at those positions.
    """

    n: int
    t: int
    rows: np.ndarray
    cols: np.ndarray
    entries: np.ndarray
    values: np.ndarray
    alpha_rc: float
    alpha_sub: float
    seed: int | None = None
    mode: str = WITHOUT

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def alpha_total(self) -> float:
        return self.size / (self.n * self.t)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros((self.n, self.t), dtype=bool)
        if self.size:
            m[self.entries[:, 0], self.entries[:, 1]] = True
        return m

    def unobserved_rows(self) -> np.ndarray:
        return np.flatnonzero(~self.mask.any(axis=1))

    def unobserved_cols(self) -> np.ndarray:
        return np.flatnonzero(~self.mask.any(axis=0))


def subset_random_sample(signal, alpha_rc: float, alpha_sub: float, seed: int | None = None,
                         mode: str = WITHOUT) -> SampleSet:
    """Draw rows I, columns J, then entries of X(I, J).

    Rows and columns are always drawn without replacement. ``mode`` controls
    the entry draw: ``"without"`` takes exactly Round(alpha_sub |I| |J|)
    distinct entries; ``"with"`` takes that many draws with replacement and
    keeps the distinct positions.
    """
    x = as_matrix(signal)
    n, t = x.shape
    if mode not in MODES:
        raise SamplingError(f"mode must be one of {MODES}, got {mode!r}")
    for name, a in (("alpha_rc", alpha_rc), ("alpha_sub", alpha_sub)):
        if not 0.0 < a <= 1.0:
            raise SamplingError(f"{name} must lie in (0, 1], got {a}")
    n_rows = round_half_away(alpha_rc, n)
    n_cols = round_half_away(alpha_rc, t)
    if n_rows < 1 or n_cols < 1:
        raise SamplingError(
            f"alpha_rc={alpha_rc} selects {n_rows} rows and {n_cols} columns; both must be >= 1"
        )
    rng = np.random.default_rng(seed)
    rows = np.sort(fisher_yates_prefix(n, n_rows, rng))
    cols = np.sort(fisher_yates_prefix(t, n_cols, rng))
    sub_size = n_rows * n_cols
    n_draws = round_half_away(alpha_sub, sub_size)
    if mode == WITHOUT:
        flat = fisher_yates_prefix(sub_size, n_draws, rng)
    else:
        flat = np.unique(rng.integers(0, sub_size, size=n_draws))
    flat = np.sort(flat)
    entries = np.column_stack([rows[flat // n_cols], cols[flat % n_cols]]).astype(np.int64)
    entries = entries.reshape(-1, 2)
    values = x[entries[:, 0], entries[:, 1]].copy()
    return SampleSet(n, t, rows, cols, entries, values, float(alpha_rc), float(alpha_sub),
                     seed, mode)


def _check_shape(matrix: np.ndarray, samples: SampleSet):
    if matrix.shape != (samples.n, samples.t):
        raise ValueError(f"matrix shape {matrix.shape} != ({samples.n}, {samples.t})")


def project_onto_samples(matrix, samples: SampleSet) -> np.ndarray:
    m = as_matrix(matrix)
    _check_shape(m, samples)
    return np.where(samples.mask, m, 0.0)


def project_onto_complement(matrix, samples: SampleSet) -> np.ndarray:
    m = as_matrix(matrix)
    _check_shape(m, samples)
    return np.where(samples.mask, 0.0, m)


def observed_matrix(samples: SampleSet) -> tuple[TimeVertexSignal, np.ndarray]:
    """Zero-filled N x T observation matrix and its boolean mask."""
    x = np.zeros((samples.n, samples.t))
    if samples.size:
        x[samples.entries[:, 0], samples.entries[:, 1]] = samples.values
    return TimeVertexSignal(x), samples.mask


def sample_set_from_mask(signal, mask, alpha_rc: float = 1.0, alpha_sub: float = 1.0,
                         seed: int | None = None) -> SampleSet:
    """Wrap an explicit observation mask as a SampleSet."""
    x = as_matrix(signal)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.shape:
        raise ValueError(f"mask shape {mask.shape} != signal shape {x.shape}")
    entries = np.argwhere(mask).astype(np.int64).reshape(-1, 2)
    rows = np.unique(entries[:, 0])
    cols = np.unique(entries[:, 1])
    return SampleSet(x.shape[0], x.shape[1], rows, cols, entries,
                     x[entries[:, 0], entries[:, 1]].copy(), alpha_rc, alpha_sub, seed, WITHOUT)
