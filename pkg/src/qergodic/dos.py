"""Monte Carlo density of states on the manifold of pure states.

Normalising a vector of ``n + 1`` independent standard complex Gaussians gives
the unitarily invariant (Fubini-Study) distribution on pure states. Under it
the populations ``p_i = |z_i|^2`` are uniform on the probability simplex and
the phases are uniform and independent. With the volume normalised to
``pi**n / n!`` the density of states over ``(p_0, .., p_{n-1})`` is the
constant ``pi**n`` inside the simplex and zero outside.

Samples are drawn in fixed-size chunks, each from its own Philox stream keyed
by ``(seed, chunk index)``. Counts are merged by integer addition, so the
histogram depends only on the seed and the sample count, not on how many
workers run the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .dynamics import PureState
from .errors import DimensionMismatch
from .spectral import SpectralDecomposition

CHUNK_SIZE = 1 << 16


def manifold_volume(n: int) -> float:
    """Volume of the space of pure states of an ``n + 1`` level system."""
    return math.pi**n / math.factorial(n)


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def sample_amplitudes(n: int, size: int, rng: np.random.Generator) -> NDArray[np.complex128]:
    """``size`` Haar-random unit vectors in ``C^(n+1)``, one per row."""
    if n < 1:
        raise ValueError("n must be at least 1")
    z = rng.standard_normal((size, n + 1)) + 1j * rng.standard_normal((size, n + 1))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_pure_state(n: int, rng: np.random.Generator) -> PureState:
    return PureState(sample_amplitudes(n, 1, rng)[0])


def relative_phases(amplitudes: NDArray[np.complex128]) -> NDArray[np.float64]:
    """Phases of components ``1 .. n`` relative to component 0, in ``[0, 2 pi)``."""
    a = np.atleast_2d(amplitudes)
    return np.mod(np.angle(a[:, 1:]) - np.angle(a[:, :1]), 2 * np.pi)


def analytic_dos(n: int, p: ArrayLike) -> float:
    """``pi**n`` strictly inside the simplex ``{p_i > 0, sum p_i < 1}``, else 0."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.shape != (n,):
        raise DimensionMismatch(f"expected {n} coordinates, got {p.shape}")
    s = p.sum()
    inside = bool(np.all((p > 0) & (p < 1)) and 0 < s < 1)
    return math.pi**n if inside else 0.0


def analytic_energy_dos(E: float, E0: float, E1: float) -> float:
    """Two-level density of states in energy: ``pi / (E1 - E0)`` on ``(E0, E1)``."""
    return math.pi / (E1 - E0) if E0 < E < E1 else 0.0


def _chunks(N: int):
    return [(c, min(CHUNK_SIZE, N - c * CHUNK_SIZE)) for c in range(-(-N // CHUNK_SIZE))]


def _run_chunks(fn, N: int, workers: int):
    jobs = _chunks(N)
    if workers <= 1:
        parts = [fn(c, size) for c, size in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    return sum(parts[1:], parts[0])


@dataclass(frozen=True)
class DoSHistogram:
    n: int
    bins_per_axis: int
    counts: NDArray[np.int64]
    samples: int
    seed: int

    @property
    def bin_width(self) -> float:
        return 1.0 / self.bins_per_axis

    @property
    def bin_volume(self) -> float:
        return self.bin_width**self.n

    @property
    def normalization(self) -> float:
        """Factor turning a raw count into a density-of-states estimate."""
        return manifold_volume(self.n) / (self.samples * self.bin_volume)

    @property
    def estimates(self) -> NDArray[np.float64]:
        return self.counts * self.normalization

    @property
    def standard_errors(self) -> NDArray[np.float64]:
        frac = self.counts / self.samples
        return np.sqrt(self.counts * (1.0 - frac)) * self.normalization

    def _corner_sums(self):
        idx = np.indices(self.counts.shape).sum(axis=0)
        return idx * self.bin_width, (idx + self.n) * self.bin_width

    @property
    def interior(self) -> NDArray[np.bool_]:
        """Bins lying entirely inside the simplex."""
        return self._corner_sums()[1] <= 1.0 + 1e-12

    @property
    def exterior(self) -> NDArray[np.bool_]:
        """Bins lying entirely outside the open simplex."""
        return self._corner_sums()[0] >= 1.0 - 1e-12

    def centers(self) -> NDArray[np.float64]:
        """Bin-centre coordinates, shape ``counts.shape + (n,)``."""
        idx = np.indices(self.counts.shape)
        return np.moveaxis((idx + 0.5) * self.bin_width, 0, -1)

    def total_mass(self) -> float:
        return float(np.sum(self.estimates) * self.bin_volume)

    def total_mass_error(self) -> float:
        return float(np.sqrt(np.sum(self.standard_errors**2)) * self.bin_volume)

    def interior_mean(self) -> tuple[float, float]:
        """Mean interior estimate of the constant level and its standard error."""
        inner = self.interior
        counts = self.counts[inner]
        level = counts.mean() * self.normalization
        return float(level), float(np.sqrt(counts.sum()) / counts.size * self.normalization)

    def flatness_chi2(self) -> tuple[float, int]:
        """Pearson statistic of interior counts against a constant, with its dof."""
        counts = self.counts[self.interior].astype(float)
        expected = counts.mean()
        return float(np.sum((counts - expected) ** 2 / expected)), counts.size - 1


def _population_counts(n: int, bins: int, seed: int):
    def count(chunk: int, size: int) -> NDArray[np.int64]:
        z = sample_amplitudes(n, size, chunk_rng(seed, chunk))
        p = np.abs(z[:, :n]) ** 2
        idx = np.minimum((p * bins).astype(np.int64), bins - 1)
        flat = np.ravel_multi_index(idx.T, (bins,) * n)
        return np.bincount(flat, minlength=bins**n).astype(np.int64)

    return count


def estimate_dos(n: int, bins_per_axis: int, N: int, seed: int, workers: int = 1) -> DoSHistogram:
    """Histogram estimate of the density of states over ``(p_0, .., p_{n-1})``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if bins_per_axis < 2:
        raise ValueError("need at least 2 bins per axis")
    if N < 1:
        raise ValueError("need at least one sample")
    flat = _run_chunks(_population_counts(n, bins_per_axis, seed), N, workers)
    counts = flat.reshape((bins_per_axis,) * n)
    counts.setflags(write=False)
    return DoSHistogram(n=n, bins_per_axis=bins_per_axis, counts=counts, samples=N, seed=seed)


@dataclass(frozen=True)
class EnergyHistogram:
    edges: NDArray[np.float64]
    counts: NDArray[np.int64]
    samples: int
    n: int
    seed: int

    @property
    def widths(self) -> NDArray[np.float64]:
        return np.diff(self.edges)

    @property
    def centers(self) -> NDArray[np.float64]:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def estimates(self) -> NDArray[np.float64]:
        return self.counts / self.samples * manifold_volume(self.n) / self.widths

    @property
    def standard_errors(self) -> NDArray[np.float64]:
        frac = self.counts / self.samples
        return np.sqrt(self.counts * (1.0 - frac)) / self.samples * manifold_volume(self.n) / self.widths


def energy_dos(
    spec: SpectralDecomposition,
    E_bins: Union[int, Sequence[float]],
    N: int,
    seed: int,
    workers: int = 1,
) -> EnergyHistogram:
    """Density of states as a function of mean energy ``sum_i p_i E_i``.

    An integer ``E_bins`` spans ``[E_0, E_n]`` evenly; otherwise it is the
    sequence of bin edges.
    """
    if spec.is_degenerate:
        raise ValueError("energy density of states needs a nondegenerate spectrum")
    E = np.asarray(spec.levels, dtype=float)
    if np.isscalar(E_bins):
        edges = np.linspace(E[0], E[-1], int(E_bins) + 1)
    else:
        edges = np.asarray(E_bins, dtype=float)
    n = spec.n

    def count(chunk: int, size: int) -> NDArray[np.int64]:
        z = sample_amplitudes(n, size, chunk_rng(seed, chunk))
        energies = (np.abs(z) ** 2) @ E
        return np.histogram(energies, bins=edges)[0].astype(np.int64)

    counts = _run_chunks(count, N, workers)
    return EnergyHistogram(edges=edges, counts=counts, samples=N, n=n, seed=seed)
