import math

import numpy as np
import pytest
from scipy import integrate, stats

from qergodic import analytic_dos, eigendecompose, energy_dos, estimate_dos, manifold_volume, sample_pure_state
from qergodic.dos import analytic_energy_dos, chunk_rng, relative_phases, sample_amplitudes


def test_manifold_volume_matches_volume_element():
    # integrate the product-form volume element factor by factor:
    # 2^-1 cos(t/2) sin^(2i-1)(t/2) dt dphi over [0, pi] x [0, 2 pi)
    for n in range(1, 6):
        vol = 1.0
        for i in range(1, n + 1):
            theta, _ = integrate.quad(lambda t: 0.5 * math.cos(t / 2) * math.sin(t / 2) ** (2 * i - 1), 0, math.pi)
            vol *= theta * 2 * math.pi
        assert vol == pytest.approx(manifold_volume(n), rel=1e-12)


def test_sample_pure_state_is_normalised():
    rng = chunk_rng(0, 0)
    for n in (1, 3, 6):
        psi = sample_pure_state(n, rng)
        assert psi.dim == n + 1
        assert abs(np.linalg.norm(psi.amplitudes) - 1) < 1e-12


def test_two_level_population_uniform():
    z = sample_amplitudes(1, 100_000, chunk_rng(7, 0))
    ks = stats.kstest(np.abs(z[:, 0]) ** 2, "uniform")
    assert ks.statistic < 0.01


def test_three_level_populations_uniform_on_triangle():
    N, B = 100_000, 10
    z = sample_amplitudes(2, N, chunk_rng(11, 0))
    p = np.abs(z[:, :2]) ** 2
    counts, _, _ = np.histogram2d(p[:, 0], p[:, 1], bins=B, range=[[0, 1], [0, 1]])
    i, j = np.indices((B, B))
    inner = (i + j + 2) <= B
    expected = N * (1 / B**2) / 0.5
    z_scores = (counts[inner] - expected) / np.sqrt(expected)
    chi2 = np.sum(z_scores**2)
    dof = inner.sum()
    assert abs(chi2 - dof) < 3 * math.sqrt(2 * dof)
    assert counts[(i + j) >= B].sum() == 0


@pytest.mark.parametrize("n", [1, 2, 4])
def test_phases_uniform(n):
    z = sample_amplitudes(n, 100_000, chunk_rng(3, n))
    phases = relative_phases(z)
    for k in range(n):
        assert stats.kstest(phases[:, k] / (2 * np.pi), "uniform").statistic < 0.01


def test_analytic_dos():
    assert analytic_dos(2, [0.2, 0.3]) == math.pi**2
    assert analytic_dos(2, [0.6, 0.6]) == 0.0
    assert analytic_dos(1, [0.5]) == math.pi
    assert analytic_dos(3, [0.0, 0.2, 0.2]) == 0.0
    assert analytic_energy_dos(0.5, 0.0, 1.0) == math.pi
    assert analytic_energy_dos(1.5, 0.0, 1.0) == 0.0


def test_histogram_small_run_properties():
    h = estimate_dos(2, 8, 50_000, seed=1)
    assert h.counts.sum() == 50_000
    assert np.all(h.estimates >= 0)
    assert h.counts[h.exterior].sum() == 0
    assert h.total_mass() == pytest.approx(manifold_volume(2), rel=1e-12)
    assert h.interior.sum() == 28


def test_determinism_and_chunk_independence():
    a = estimate_dos(2, 8, 200_000, seed=5)
    b = estimate_dos(2, 8, 200_000, seed=5, workers=4)
    c = estimate_dos(2, 8, 200_000, seed=6)
    assert np.array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, c.counts)


@pytest.mark.slow
def test_energy_dos_two_level():
    spec = eigendecompose(np.diag([0.0, 1.0]))
    edges = np.linspace(-0.5, 1.5, 41)
    h = energy_dos(spec, edges, 1_000_000, seed=9)
    inside = (edges[:-1] >= 0) & (edges[1:] <= 1)
    outside = (edges[1:] <= 0) | (edges[:-1] >= 1)
    assert np.all(np.abs(h.estimates[inside] / math.pi - 1) < 0.03)
    assert np.all(h.counts[outside] == 0)


def _simplex_energy_oracle(E, edges, M=3000):
    """Midpoint quadrature of the uniform density pi^n on the 2-simplex."""
    u = (np.arange(M) + 0.5) / M
    out = np.zeros(len(edges) - 1)
    for p1 in u:
        p2 = u[u < 1 - p1]
        energies = E[0] * (1 - p1 - p2) + E[1] * p1 + E[2] * p2
        out += np.histogram(energies, bins=edges)[0]
    return out * math.pi**2 / M**2 / np.diff(edges)


@pytest.mark.slow
def test_energy_dos_three_level_against_quadrature():
    E = np.array([0.0, 1.0, 2.0])
    spec = eigendecompose(np.diag(E))
    h = energy_dos(spec, 20, 1_000_000, seed=13)
    oracle = _simplex_energy_oracle(E, h.edges)
    assert np.all(np.abs(h.estimates - oracle) < 4 * h.standard_errors + 2e-3 * oracle.max())
    assert h.estimates.sum() * h.widths[0] == pytest.approx(manifold_volume(2), rel=1e-12)


@pytest.mark.parametrize("n, bins", [(1, 32), (2, 12), (3, 6)])
def test_interior_flatness_is_pure_counting_noise(n, bins):
    h = estimate_dos(n, bins, 400_000, seed=100 + n)
    stat, dof = h.flatness_chi2()
    assert stats.chi2.sf(stat, dof) > 1e-3
    level, err = h.interior_mean()
    assert abs(level - math.pi**n) < 4 * err
