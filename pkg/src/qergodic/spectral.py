"""Dense Hermitian operators and their spectral data.

The eigendecomposition groups numerically coincident eigenvalues into levels.
Every downstream quantity (projectors, Bohr frequencies, populations) is
indexed by level, so a degenerate Hamiltonian with ``m + 1`` distinct
eigenvalues behaves as an ``m + 1`` level system whose projectors have rank
larger than one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ConvergenceFailure, DimensionMismatch, NonHermitian

RELATIVE_DEGENERACY = 1e-9


def _frozen(a: ArrayLike, dtype=complex) -> NDArray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HermitianOperator:
    """Square complex matrix representing an observable."""

    entries: NDArray[np.complex128]

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"operator must be square, got shape {m.shape}")
        if m.shape[0] < 2:
            raise DimensionMismatch("operator dimension must be at least 2")
        if not np.all(np.isfinite(m)):
            raise NonHermitian("operator has non-finite entries")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def asymmetry(self) -> float:
        """Largest entrywise deviation from self-adjointness."""
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def check_hermitian(self, tol: float) -> None:
        err = self.asymmetry()
        if err > tol:
            raise NonHermitian(f"max |A - A^H| = {err:.3e} exceeds tolerance {tol:.3e}")

    @classmethod
    def from_matrix(cls, matrix: ArrayLike, hermiticity_tol: float = 1e-10) -> "HermitianOperator":
        """Validate ``matrix`` and return its exactly Hermitian part."""
        op = cls(np.asarray(matrix, dtype=complex))
        op.check_hermitian(hermiticity_tol)
        return cls(0.5 * (op.entries + op.entries.conj().T))

    def __matmul__(self, other):
        other = other.entries if isinstance(other, HermitianOperator) else other
        return self.entries @ other


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigen-data of a Hamiltonian with eigenvalues grouped into levels.

    ``eigenvalues`` and the columns of ``eigenvectors`` are per basis index;
    ``levels``, ``projectors`` and ``bohr_frequencies`` are per level.
    """

    hamiltonian: HermitianOperator
    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.complex128]
    clusters: Tuple[Tuple[int, ...], ...]
    levels: NDArray[np.float64]
    projectors: Tuple[NDArray[np.complex128], ...]
    bohr_frequencies: NDArray[np.float64]

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def n(self) -> int:
        return self.dim - 1

    @property
    def m(self) -> int:
        """Number of distinct levels minus one."""
        return len(self.clusters) - 1

    @property
    def ranks(self) -> NDArray[np.int64]:
        return np.array([len(c) for c in self.clusters])

    @property
    def level_of_index(self) -> NDArray[np.int64]:
        out = np.empty(self.dim, dtype=int)
        for k, members in enumerate(self.clusters):
            out[list(members)] = k
        return out

    @property
    def index_energies(self) -> NDArray[np.float64]:
        """Level energy repeated for every member index."""
        return self.levels[self.level_of_index]

    @property
    def is_degenerate(self) -> bool:
        return self.m < self.n

    def to_energy_basis(self, vector: ArrayLike) -> NDArray[np.complex128]:
        v = np.asarray(vector, dtype=complex)
        if v.shape[-1] != self.dim:
            raise DimensionMismatch(f"vector length {v.shape[-1]} != dimension {self.dim}")
        return v @ self.eigenvectors.conj()

    def from_energy_basis(self, coefficients: ArrayLike) -> NDArray[np.complex128]:
        return np.asarray(coefficients, dtype=complex) @ self.eigenvectors.T

    def matrix_in_energy_basis(self, matrix: ArrayLike) -> NDArray[np.complex128]:
        a = np.asarray(matrix.entries if isinstance(matrix, HermitianOperator) else matrix, dtype=complex)
        if a.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"matrix shape {a.shape} != ({self.dim}, {self.dim})")
        v = self.eigenvectors
        return v.conj().T @ a @ v

    def reconstruct(self) -> NDArray[np.complex128]:
        return sum(e * p for e, p in zip(self.levels, self.projectors))


def _fix_phases(vectors: NDArray) -> NDArray:
    # largest-magnitude component of each column made real positive
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivots) / pivots)


def cluster_eigenvalues(eigenvalues: ArrayLike, degeneracy_tol: Optional[float] = None) -> List[Tuple[int, ...]]:
    """Partition ascending eigenvalues into runs separated by gaps above the tolerance."""
    e = np.asarray(eigenvalues, dtype=float)
    if degeneracy_tol is None:
        scale = max(e[-1] - e[0], np.max(np.abs(e)))
        degeneracy_tol = RELATIVE_DEGENERACY * scale
    clusters = [[0]]
    for i in range(1, len(e)):
        if e[i] - e[i - 1] <= degeneracy_tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return [tuple(c) for c in clusters]


def eigendecompose(
    H: HermitianOperator,
    hermiticity_tol: float = 1e-10,
    degeneracy_tol: Optional[float] = None,
) -> SpectralDecomposition:
    """Diagonalise ``H`` and merge near-coincident eigenvalues into levels.

    Raises ``NonHermitian`` when ``H`` is not self-adjoint at ``hermiticity_tol``
    and ``ConvergenceFailure`` when LAPACK does not converge.
    """
    if not isinstance(H, HermitianOperator):
        H = HermitianOperator(np.asarray(H, dtype=complex))
    H.check_hermitian(hermiticity_tol)
    sym = 0.5 * (H.entries + H.entries.conj().T)
    try:
        evals, evecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    evecs = _fix_phases(evecs)

    clusters = cluster_eigenvalues(evals, degeneracy_tol)
    levels = np.array([evals[list(c)].mean() for c in clusters])
    projectors = []
    for c in clusters:
        v = evecs[:, list(c)]
        projectors.append(_frozen(v @ v.conj().T))
    # a - b == -(b - a) holds exactly in IEEE arithmetic
    omega = levels[:, None] - levels[None, :]

    return SpectralDecomposition(
        hamiltonian=H,
        eigenvalues=_frozen(evals, float),
        eigenvectors=_frozen(evecs),
        clusters=tuple(clusters),
        levels=_frozen(levels, float),
        projectors=tuple(projectors),
        bohr_frequencies=_frozen(omega, float),
    )


def bohr_spectrum(spec: SpectralDecomposition) -> List[Tuple[int, int, float]]:
    """All positive level differences ``(i, j, E_i - E_j)`` with ``i > j``."""
    w = spec.bohr_frequencies
    return [(i, j, float(w[i, j])) for i in range(spec.m + 1) for j in range(i)]


def detect_resonances(
    spec: SpectralDecomposition, resonance_tol: float = 1e-9
) -> List[Tuple[Tuple[int, int], Tuple[int, int]]]:
    """Pairs of distinct Bohr frequencies closer than ``resonance_tol``.

    An empty result means no pairwise commensurability at this tolerance.
    Higher-order integer relations are not searched for.
    """
    freqs = bohr_spectrum(spec)
    hits = []
    for (i, j, a), (k, l, b) in itertools.combinations(freqs, 2):
        if abs(a - b) < resonance_tol:
            hits.append(((i, j), (k, l)))
    return hits
