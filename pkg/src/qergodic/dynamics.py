"""Unitary evolution, finite-time averages and the dephasing map.

Long-time averaging of ``<psi_t|O|psi_t>`` kills every matrix element of the
state between different energy levels. What survives is the block-diagonal
part of ``|psi_0><psi_0|``, so the infinite-time average of any observable is
``tr(rho O)`` with ``rho = sum_k P_k rho_0 P_k``. Before the limit the
cross terms are damped like ``1 / (omega T)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import simpson

from .errors import DimensionMismatch, NonPositiveHorizon
from .spectral import HermitianOperator, SpectralDecomposition

NORM_TOL = 1e-12


@dataclass(frozen=True)
class PureState:
    amplitudes: NDArray[np.complex128]
    basis: Literal["input", "energy"] = "input"

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.ndim != 1:
            raise DimensionMismatch("state must be a vector")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalised: |psi| = {norm!r}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def from_vector(cls, vector: ArrayLike, basis: str = "input") -> "PureState":
        v = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(v)
        if not np.isfinite(norm) or norm == 0:
            raise ValueError("cannot normalise a zero or non-finite vector")
        return cls(v / norm, basis)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def same_ray(self, other: "PureState", tol: float = 1e-10) -> bool:
        """Equality up to a global phase."""
        return abs(self.overlap(other)) >= 1.0 - tol

    def projector(self) -> NDArray[np.complex128]:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class DensityMatrix:
    entries: NDArray[np.complex128]

    def __post_init__(self):
        rho = np.array(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got {rho.shape}")
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise ValueError(f"trace {np.trace(rho)!r} is not 1")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -1e-12:
            raise ValueError("density matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityMatrix":
        return cls(psi.projector())

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def expectation(self, O) -> float:
        O = O.entries if isinstance(O, HermitianOperator) else np.asarray(O)
        return float(np.real(np.trace(self.entries @ O)))


def _check_dim(spec: SpectralDecomposition, d: int, what: str) -> None:
    if d != spec.dim:
        raise DimensionMismatch(f"{what} has dimension {d}, Hamiltonian has {spec.dim}")


def _energy_coefficients(spec: SpectralDecomposition, psi: PureState) -> NDArray:
    _check_dim(spec, psi.dim, "state")
    if psi.basis == "energy":
        return psi.amplitudes
    return spec.to_energy_basis(psi.amplitudes)


def _operator_matrix(O) -> NDArray:
    return O.entries if isinstance(O, HermitianOperator) else np.asarray(O, dtype=complex)


def evolve(spec: SpectralDecomposition, psi0: PureState, t: float) -> PureState:
    """``exp(-iHt) |psi0>``, returned in the basis ``psi0`` was given in."""
    c = _energy_coefficients(spec, psi0)
    ct = np.exp(-1j * spec.index_energies * t) * c
    ct /= np.linalg.norm(ct)
    if psi0.basis == "energy":
        return PureState(ct, "energy")
    return PureState(spec.from_energy_basis(ct))


def populations(spec: SpectralDecomposition, psi0: PureState) -> NDArray[np.float64]:
    """Level occupations ``<psi0|P_k|psi0>``, one entry per level."""
    c = _energy_coefficients(spec, psi0)
    weights = np.abs(c) ** 2
    p = np.array([weights[list(members)].sum() for members in spec.clusters])
    return p / p.sum()


def _trajectory_expectations(spec, c, O_energy, times) -> NDArray:
    phases = np.exp(-1j * np.outer(times, spec.index_energies))
    ct = phases * c
    return np.real(np.einsum("ti,ij,tj->t", ct.conj(), O_energy, ct))


def finite_time_average(
    spec: SpectralDecomposition,
    psi0: PureState,
    O,
    T: float,
    mode: Literal["analytic", "quadrature"] = "analytic",
    steps: int = 10_000,
) -> float:
    """Time average of ``<psi_s|O|psi_s>`` over ``0 <= s <= T``.

    The analytic mode integrates each oscillating term exactly; ``quadrature``
    applies composite Simpson with ``steps`` (rounded up to even) intervals.
    """
    if not T > 0:
        raise NonPositiveHorizon(f"averaging horizon must be positive, got {T!r}")
    c = _energy_coefficients(spec, psi0)
    O_energy = spec.matrix_in_energy_basis(_operator_matrix(O))

    if mode == "quadrature":
        if steps < 2:
            raise ValueError("quadrature needs at least 2 steps")
        steps += steps % 2
        times = np.linspace(0.0, T, steps + 1)
        values = _trajectory_expectations(spec, c, O_energy, times)
        return float(simpson(values, x=times) / T)
    if mode != "analytic":
        raise ValueError(f"unknown mode {mode!r}")

    E = spec.index_energies
    omega = E[:, None] - E[None, :]
    x = omega * T
    with np.errstate(invalid="ignore", divide="ignore"):
        weights = np.where(x == 0, 1.0 + 0j, np.expm1(1j * x) / (1j * x))
    terms = np.outer(c.conj(), c) * O_energy * weights
    return float(np.real(terms.sum()))


def dephase(spec: SpectralDecomposition, rho0) -> DensityMatrix:
    """``sum_k P_k rho0 P_k``: the long-time average of the evolved density matrix."""
    rho = rho0.entries if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    _check_dim(spec, rho.shape[0], "density matrix")
    out = sum(P @ rho @ P for P in spec.projectors)
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out)


def dynamic_average(spec: SpectralDecomposition, psi0: PureState, O) -> float:
    """Infinite-time average of ``<psi_t|O|psi_t>``."""
    if psi0.basis == "energy":
        psi0 = PureState(spec.from_energy_basis(psi0.amplitudes))
    _check_dim(spec, psi0.dim, "state")
    rho = dephase(spec, DensityMatrix.from_pure(psi0))
    return rho.expectation(_operator_matrix(O))


def convergence_constant(spec: SpectralDecomposition, psi0: PureState, O) -> float:
    """``C`` such that the finite-time gap is at most ``C / T`` for every ``T``.

    Each inter-level term contributes ``|conj(c_i) c_j O_ij| * 2 / |omega_ij|``.
    """
    c = _energy_coefficients(spec, psi0)
    O_energy = spec.matrix_in_energy_basis(_operator_matrix(O))
    E = spec.index_energies
    omega = np.abs(E[:, None] - E[None, :])
    amp = np.abs(np.outer(c.conj(), c) * O_energy)
    mask = omega > 0
    return float(np.sum(2.0 * amp[mask] / omega[mask]))


def average_trace(spec: SpectralDecomposition, psi0: PureState, O, horizons: ArrayLike):
    """Rows ``(T, finite-time average, dynamic average, |gap|)`` for each horizon."""
    limit = dynamic_average(spec, psi0, O)
    rows = []
    for T in np.asarray(horizons, dtype=float):
        avg = finite_time_average(spec, psi0, O, float(T))
        rows.append((float(T), avg, limit, abs(avg - limit)))
    return rows

