"""Graph Fourier and real temporal harmonic bases, joint spectra."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .signal import GraphTopology, TimeVertexSignal, as_matrix

SIGN_TOL = 1e-12


@dataclass(frozen=True)
class SpectralBases:
    """Orthonormal graph basis ``psi_g`` (N x N) and time basis ``psi_t`` (T x T).

    Either part may be ``None`` when only one domain is needed.
    """

    psi_g: np.ndarray | None = None
    psi_t: np.ndarray | None = None
    eigenvalues_g: np.ndarray | None = None

    @property
    def N(self) -> int:
        return self.psi_g.shape[0]

    @property
    def T(self) -> int:
        return self.psi_t.shape[0]

    def with_time(self, psi_t: np.ndarray) -> "SpectralBases":
        return SpectralBases(self.psi_g, psi_t, self.eigenvalues_g)


@dataclass(frozen=True)
class SpectralCoefficients:
    f_g: np.ndarray  # N x T, X = psi_g f_g
    f_t: np.ndarray  # T x N, X^T = psi_t f_t
    f_j: np.ndarray  # N x T, psi_g^T X psi_t


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        nz = np.flatnonzero(np.abs(col) > SIGN_TOL)
        if nz.size and col[nz[0]] < 0:
            out[:, k] = -col
    return out


def gft_basis(topology: GraphTopology) -> SpectralBases:
    """Eigendecomposition of the Laplacian, eigenvalues ascending."""
    lap = topology.laplacian
    if not np.all(np.isfinite(lap)):
        raise np.linalg.LinAlgError("Laplacian has non-finite entries")
    evals, evecs = np.linalg.eigh(lap)
    order = np.argsort(evals, kind="stable")
    evals = evals[order]
    evecs = _fix_signs(evecs[:, order])
    return SpectralBases(psi_g=evecs, eigenvalues_g=evals)


def harmonic_basis(t: int) -> np.ndarray:
    """Real orthonormal Fourier basis of length ``t``.

    Columns are ordered by frequency: the constant column, then a cosine
    and sine pair for each frequency 1, 2, ..., and for even ``t`` a final
    alternating (Nyquist) column.
    """
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    n = np.arange(t)
    cols = [np.full(t, 1.0 / np.sqrt(t))]
    for k in range(1, (t - 1) // 2 + 1):
        angle = 2.0 * np.pi * k * n / t
        cols.append(np.sqrt(2.0 / t) * np.cos(angle))
        cols.append(np.sqrt(2.0 / t) * np.sin(angle))
    if t % 2 == 0 and t > 1:
        cols.append(np.cos(np.pi * n) / np.sqrt(t))
    return np.column_stack(cols)


def harmonic_frequencies(t: int) -> np.ndarray:
    """Integer frequency index of each column of :func:`harmonic_basis`."""
    freqs = [0]
    for k in range(1, (t - 1) // 2 + 1):
        freqs += [k, k]
    if t % 2 == 0 and t > 1:
        freqs.append(t // 2)
    return np.array(freqs)


def make_bases(topology: GraphTopology | None, t: int) -> SpectralBases:
    psi_t = harmonic_basis(t)
    if topology is None:
        return SpectralBases(psi_t=psi_t)
    return gft_basis(topology).with_time(psi_t)


def _check_dims(x: np.ndarray, bases: SpectralBases):
    if bases.psi_g is None or bases.psi_t is None:
        raise ValueError("both graph and time bases are required")
    if x.shape != (bases.N, bases.T):
        raise ValueError(f"shape {x.shape} does not match bases ({bases.N}, {bases.T})")


def analyze(signal, bases: SpectralBases) -> SpectralCoefficients:
    x = as_matrix(signal)
    _check_dims(x, bases)
    f_g = bases.psi_g.T @ x
    f_t = bases.psi_t.T @ x.T
    f_j = f_g @ bases.psi_t
    return SpectralCoefficients(f_g=f_g, f_t=f_t, f_j=f_j)


def synthesize(coefficients: SpectralCoefficients | np.ndarray,
               bases: SpectralBases) -> TimeVertexSignal:
    """Rebuild X from its joint spectrum (or from a bare F_J matrix)."""
    f_j = coefficients.f_j if isinstance(coefficients, SpectralCoefficients) else coefficients
    f_j = np.asarray(f_j, dtype=float)
    _check_dims(f_j, bases)
    return TimeVertexSignal(bases.psi_g @ f_j @ bases.psi_t.T)


def save_bases(bases: SpectralBases, prefix: str | Path) -> list[Path]:
    """Cache bases as plain CSV files ``<prefix>.psi_g.csv`` etc."""
    from .io import write_matrix_csv

    prefix = Path(prefix)
    written = []
    for name in ("psi_g", "psi_t", "eigenvalues_g"):
        value = getattr(bases, name)
        if value is None:
            continue
        path = prefix.with_name(f"{prefix.name}.{name}.csv")
        write_matrix_csv(path, np.atleast_2d(value))
        written.append(path)
    return written


def load_bases(prefix: str | Path) -> SpectralBases:
    from .io import read_matrix_csv

    prefix = Path(prefix)
    parts = {}
    for name in ("psi_g", "psi_t", "eigenvalues_g"):
        path = prefix.with_name(f"{prefix.name}.{name}.csv")
        if path.exists():
            parts[name] = read_matrix_csv(path)
    if "eigenvalues_g" in parts:
        parts["eigenvalues_g"] = parts["eigenvalues_g"].ravel()
    return SpectralBases(**parts)
