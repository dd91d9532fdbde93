"""Conserved quantities, entropy and conjugate variables of the dephased state.

A conserved set is an ordered family ``G_0 = 1, G_1 = H, G_2 .. G_m`` of
observables, each constant on every energy level. With ``q_k`` the weight of
level ``k`` per basis vector (so the level population is ``r_k q_k`` for a
level of rank ``r_k``) the expectation values obey ``G_j = sum_k q_k g_kj``
where ``g_kj = tr(P_k G_j)``. Inverting the Gram matrix ``g`` expresses the
state, and hence the entropy, as a function of the conserved values. The
gradient of that entropy gives ``gamma``; ``gamma_1`` is the inverse
temperature, ``gamma_j`` (``j >= 2``) the chemical potentials and
``gamma_0 + 1`` is ``ln Z``.

For a nondegenerate spectrum every ``r_k = 1`` and ``q`` are just the
populations ``|<E_k|psi_0>|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import entr, expit, logsumexp

from .dynamics import DensityMatrix, PureState, populations
from .errors import (
    BoundaryState,
    DegenerateTrivial,
    DimensionMismatch,
    InfeasibleValues,
    NonCommuting,
    NotAProbabilityVector,
    OutOfRange,
    SingularGram,
)
from .spectral import HermitianOperator, SpectralDecomposition

COMMUTATION_TOL = 1e-10
MAX_GRAM_CONDITION = 1e12
FEASIBILITY_TOL = 1e-12


def _matrix(op) -> NDArray[np.complex128]:
    return op.entries if isinstance(op, HermitianOperator) else np.asarray(op, dtype=complex)


@dataclass(frozen=True)
class ConservedSet:
    spec: SpectralDecomposition
    operators: tuple
    gram: NDArray[np.float64]
    gram_inverse: NDArray[np.float64]

    @property
    def size(self) -> int:
        return len(self.operators)

    @property
    def level_values(self) -> NDArray[np.float64]:
        """Eigenvalue of each ``G_j`` on each level, ``g_kj / r_k``."""
        return self.gram / self.spec.ranks[:, None]

    @classmethod
    def build(
        cls,
        spec: SpectralDecomposition,
        extra: Sequence = (),
        commutation_tol: float = COMMUTATION_TOL,
    ) -> "ConservedSet":
        """Prepend ``1`` and ``H`` to ``extra`` and validate the family.

        Each observable must commute with ``H`` and act as a multiple of the
        identity on every level; the family must have one member per level and
        be linearly independent.
        """
        H = spec.hamiltonian.entries
        ops = [np.eye(spec.dim, dtype=complex), H] + [_matrix(f) for f in extra]
        if len(ops) != spec.m + 1:
            raise DimensionMismatch(
                f"{spec.m + 1} distinct levels need {spec.m + 1} conserved observables, got {len(ops)}"
            )
        h_scale = max(1.0, float(np.max(np.abs(H))))
        for j, G in enumerate(ops):
            if G.shape != (spec.dim, spec.dim):
                raise DimensionMismatch(f"observable {j} has shape {G.shape}")
            tol = commutation_tol * h_scale * max(1.0, float(np.max(np.abs(G))))
            comm = float(np.max(np.abs(G @ H - H @ G)))
            if comm > tol:
                raise NonCommuting(f"observable {j}: max |[G, H]| = {comm:.3e}")
            diag = sum(np.real(np.trace(P @ G)) / len(c) * P for P, c in zip(spec.projectors, spec.clusters))
            split = float(np.max(np.abs(G - diag)))
            if split > tol:
                raise NonCommuting(f"observable {j} is not constant on a degenerate level (residual {split:.3e})")

        gram = np.array([[np.real(np.trace(P @ G)) for G in ops] for P in spec.projectors])
        cond = np.linalg.cond(gram)
        if not np.isfinite(cond) or cond > MAX_GRAM_CONDITION:
            raise SingularGram(f"conserved observables are linearly dependent (cond(g) = {cond:.3e})")
        h = np.linalg.inv(gram)
        gram.setflags(write=False)
        h.setflags(write=False)
        frozen = []
        for G in ops:
            G = np.array(G)
            G.setflags(write=False)
            frozen.append(G)
        return cls(spec=spec, operators=tuple(frozen), gram=gram, gram_inverse=h)


@dataclass(frozen=True)
class ThermoSolution:
    probabilities: NDArray[np.float64]
    entropy: float
    gamma: NDArray[np.float64]
    equilibrium: DensityMatrix
    grand_canonical: DensityMatrix

    @property
    def beta(self) -> float:
        return float(self.gamma[1])

    @property
    def chemical_potentials(self) -> NDArray[np.float64]:
        return self.gamma[2:]

    @property
    def log_partition(self) -> float:
        return float(self.gamma[0] + 1.0)

    @property
    def partition_function(self) -> float:
        return float(np.exp(self.log_partition))

    @property
    def residual(self) -> float:
        """Largest entrywise difference between the two density-matrix forms."""
        return float(np.max(np.abs(self.equilibrium.entries - self.grand_canonical.entries)))


def default_commuting_set(spec: SpectralDecomposition) -> ConservedSet:
    """``1``, ``H`` and the level projectors ``P_2 .. P_m``."""
    if spec.m < 1:
        raise DegenerateTrivial("Hamiltonian is proportional to the identity; only G_0 = 1 survives")
    return ConservedSet.build(spec, spec.projectors[2:])


def _level_populations(cset: ConservedSet, p: ArrayLike) -> NDArray[np.float64]:
    p = np.asarray(p, dtype=float)
    if p.shape != (cset.spec.dim,):
        raise DimensionMismatch(f"expected {cset.spec.dim} probabilities, got shape {p.shape}")
    return np.array([p[list(c)].sum() for c in cset.spec.clusters])


def _expand(cset: ConservedSet, q: NDArray) -> NDArray[np.float64]:
    return q[cset.spec.level_of_index]


def conserved_values(cset: ConservedSet, p: ArrayLike) -> NDArray[np.float64]:
    """Expectation values ``G_j`` of the state ``sum_i p_i |E_i><E_i|``."""
    return _level_populations(cset, p) @ cset.level_values


def probabilities_from_values(cset: ConservedSet, G: ArrayLike) -> NDArray[np.float64]:
    """Per-eigenvector probabilities of the dephased state with values ``G``.

    Raises ``InfeasibleValues`` when ``G_0 != 1`` or when some weight lands
    outside ``[0, 1]``; weights are never clamped.
    """
    G = np.asarray(G, dtype=float)
    if G.shape != (cset.size,):
        raise DimensionMismatch(f"expected {cset.size} conserved values, got shape {G.shape}")
    if abs(G[0] - 1.0) > FEASIBILITY_TOL:
        raise InfeasibleValues(f"G_0 = tr(rho) must be 1, got {G[0]!r}")
    q = G @ cset.gram_inverse
    bad = np.flatnonzero((q < -FEASIBILITY_TOL) | (q > 1.0 + FEASIBILITY_TOL))
    if bad.size:
        raise InfeasibleValues(f"values not attainable by any state: level weights {q[bad]} at levels {bad}")
    return _expand(cset, q)


def entropy(p: ArrayLike) -> float:
    """Shannon entropy in nats, with ``0 ln 0 = 0``."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0 or not np.all(np.isfinite(p)):
        raise NotAProbabilityVector("expected a finite 1-D vector")
    if np.any(p < -FEASIBILITY_TOL) or abs(p.sum() - 1.0) > 1e-10:
        raise NotAProbabilityVector(f"entries must be non-negative and sum to 1 (sum = {p.sum()!r})")
    return float(np.sum(entr(np.clip(p, 0.0, None))))


def log_partition_function(cset: ConservedSet, beta: float, mu: ArrayLike = ()) -> float:
    x = _exponents(cset, beta, mu)
    return float(logsumexp(x, b=cset.spec.ranks))


def _exponents(cset: ConservedSet, beta: float, mu: ArrayLike) -> NDArray[np.float64]:
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if mu.shape != (cset.size - 2,):
        raise DimensionMismatch(f"expected {cset.size - 2} chemical potentials, got {mu.shape[0]}")
    e = cset.level_values
    return -beta * e[:, 1] - e[:, 2:] @ mu


def grand_canonical(
    spec: SpectralDecomposition, cset: ConservedSet, beta: float, mu: ArrayLike = ()
) -> DensityMatrix:
    """``exp(-beta H - sum_j mu_j G_j) / Z`` assembled level by level."""
    if spec.dim != cset.spec.dim:
        raise DimensionMismatch("conserved set belongs to a different Hamiltonian")
    x = _exponents(cset, beta, mu)
    w = np.exp(x - logsumexp(x, b=cset.spec.ranks))
    rho = sum(wk * P for wk, P in zip(w, cset.spec.projectors))
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def conjugate_variables(cset: ConservedSet, p: ArrayLike) -> ThermoSolution:
    """Entropy gradient ``gamma`` of the dephased state with probabilities ``p``.

    ``p`` lists per-eigenvector probabilities; within a degenerate level only
    their sum matters. Raises ``BoundaryState`` if some level is empty, where
    the conjugate variables diverge.
    """
    P = _level_populations(cset, p)
    if np.any(P <= 0.0):
        raise BoundaryState(f"level populations {P} touch the simplex boundary; conjugate variables diverge")
    r = cset.spec.ranks
    q = P / r
    gamma = -cset.gram_inverse @ (r * (np.log(q) + 1.0))

    probs = _expand(cset, q)
    rho = sum(qk * Pk for qk, Pk in zip(q, cset.spec.projectors))
    rho = DensityMatrix(0.5 * (rho + rho.conj().T))
    gc = grand_canonical(cset.spec, cset, gamma[1], gamma[2:])
    return ThermoSolution(
        probabilities=probs,
        entropy=entropy(probs),
        gamma=gamma,
        equilibrium=rho,
        grand_canonical=gc,
    )


def equilibrium_probabilities(spec: SpectralDecomposition, psi0: PureState) -> NDArray[np.float64]:
    """Level populations of ``psi0`` spread evenly over each level's eigenvectors."""
    P = populations(spec, psi0)
    return (P / spec.ranks)[spec.level_of_index]


def solve(spec: SpectralDecomposition, psi0: PureState, cset: Optional[ConservedSet] = None) -> ThermoSolution:
    cset = default_commuting_set(spec) if cset is None else cset
    return conjugate_variables(cset, equilibrium_probabilities(spec, psi0))


@dataclass(frozen=True)
class DifferentialReport:
    derivatives: NDArray[np.float64]
    gamma: NDArray[np.float64]

    @property
    def residuals(self) -> NDArray[np.float64]:
        return self.derivatives - self.gamma

    @property
    def beta_residual(self) -> float:
        return float(self.residuals[0])

    @property
    def mu_residuals(self) -> NDArray[np.float64]:
        return self.residuals[1:]

    @property
    def relative_errors(self) -> NDArray[np.float64]:
        return np.abs(self.residuals) / np.maximum(np.abs(self.gamma), np.finfo(float).tiny)


def thermo_differential_check(cset: ConservedSet, p: ArrayLike, step: float = 1e-5) -> DifferentialReport:
    """Central differences of ``S`` along ``E`` and each ``F_j`` versus ``gamma``.

    Only ``G_j`` moves in each probe; ``G_0 = 1`` and the other values stay
    fixed. The report holds entries for ``j = 1 .. m``.
    """
    sol = conjugate_variables(cset, p)
    G = conserved_values(cset, p)

    def S_at(values):
        try:
            probs = probabilities_from_values(cset, values)
        except InfeasibleValues as exc:
            raise BoundaryState(f"finite-difference probe left the simplex: {exc}") from exc
        if np.any(probs <= 0.0):
            raise BoundaryState("finite-difference probe reached the simplex boundary")
        return entropy(probs)

    derivs = []
    for j in range(1, cset.size):
        dG = np.zeros_like(G)
        dG[j] = step
        derivs.append((S_at(G + dG) - S_at(G - dG)) / (2.0 * step))
    return DifferentialReport(derivatives=np.array(derivs), gamma=sol.gamma[1:].copy())


# closed forms for small spectra


def two_level_probabilities(E: float, E0: float, E1: float) -> NDArray[np.float64]:
    """Diagonal of the two-level equilibrium state with mean energy ``E``."""
    if not E0 <= E <= E1:
        raise OutOfRange(f"E = {E} outside [{E0}, {E1}]")
    d = E1 - E0
    return np.array([(E1 - E) / d, (E - E0) / d])


def two_level_beta(E: float, E0: float, E1: float) -> float:
    """Inverse temperature of a two-level system with mean energy ``E``."""
    if not E0 < E < E1:
        raise OutOfRange(f"E = {E} must lie strictly between {E0} and {E1}")
    return float(np.log((E1 - E) / (E - E0)) / (E1 - E0))


def two_level_energy(beta: float, E0: float, E1: float) -> float:
    """Canonical mean energy; the logistic form cannot overflow."""
    return float(E0 + (E1 - E0) * expit(-beta * (E1 - E0)))


def two_level_canonical_state(beta: float, E0: float, E1: float) -> NDArray[np.float64]:
    """``diag(exp(-beta E0), exp(-beta E1)) / Z``."""
    x = np.array([-beta * E0, -beta * E1])
    return np.diag(np.exp(x - logsumexp(x)))


def degenerate_three_level_energy(beta: float, E0: float, E1: float) -> float:
    """Canonical mean energy for the spectrum ``(E0, E1, E1)``."""
    return float(E0 + (E1 - E0) * expit(np.log(2.0) - beta * (E1 - E0)))


def degenerate_three_level_probabilities(E: float, E0: float, E1: float) -> NDArray[np.float64]:
    d = E1 - E0
    p1 = (E - E0) / (2.0 * d)
    return np.array([(E1 - E) / d, p1, p1])
