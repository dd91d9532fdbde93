"""Exit criteria. Each test prints one PASS/FAIL line, visible even under capture."""

import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from qergodic import (
    DensityMatrix,
    analytic_dos,
    bohr_spectrum,
    conjugate_variables,
    convergence_constant,
    default_commuting_set,
    degenerate_three_level_energy,
    dephase,
    dynamic_average,
    eigendecompose,
    estimate_dos,
    finite_time_average,
    grand_canonical,
    manifold_volume,
    populations,
    thermo_differential_check,
    two_level_beta,
    two_level_energy,
)
from qergodic.dos import analytic_energy_dos
from qergodic.thermo import degenerate_three_level_probabilities, two_level_canonical_state, two_level_probabilities

import test_properties as props
from conftest import interior_state, random_hermitian, random_spec, random_state


@pytest.fixture
def verdict(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, detail

    return emit


def test_1_theorem_identity(verdict):
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(2, 9))
        spec = random_spec(rng, d)
        psi = random_state(rng, d)
        sol = conjugate_variables(default_commuting_set(spec), populations(spec, psi))
        gc = grand_canonical(spec, default_commuting_set(spec), sol.beta, sol.chemical_potentials)
        lueders = dephase(spec, DensityMatrix.from_pure(psi))
        worst = max(worst, float(np.max(np.abs(gc.entries - lueders.entries))))
    verdict("1 grand canonical == dephased state (200 instances, d=2..8)", worst < 1e-9, f"max entry error {worst:.2e} < 1e-9")


def _window_gap(spec, psi, O, limit, T, samples=2000):
    # largest gap over [T, 2T], a window holding >= 1000 periods of every Bohr frequency
    return max(abs(finite_time_average(spec, psi, O, t) - limit) for t in np.linspace(T, 2 * T, samples))


def test_2_dynamic_average_convergence(verdict):
    rng = np.random.default_rng(2)
    below, shrink, pointwise = [], [], []
    for _ in range(50):
        d = int(rng.integers(2, 6))
        spec = random_spec(rng, d)
        assert not spec.is_degenerate
        psi = random_state(rng, d)
        O = random_hermitian(rng, d)
        T = 1e3 / min(w for _, _, w in bohr_spectrum(spec))
        limit = dynamic_average(spec, psi, O)
        C = convergence_constant(spec, psi, O)
        gap = abs(finite_time_average(spec, psi, O, T) - limit)
        gap10 = abs(finite_time_average(spec, psi, O, 10 * T) - limit)
        below.append(gap <= C / T and gap10 <= C / (10 * T))
        shrink.append(_window_gap(spec, psi, O, limit, T) / _window_gap(spec, psi, O, limit, 10 * T))
        pointwise.append(gap / gap10)
    ok = all(below) and min(shrink) >= 8
    verdict(
        "2 finite-time gap under C/T and envelope shrinks >= 8x from T to 10T (50 instances)",
        ok,
        f"{sum(below)}/50 under envelope, min envelope ratio {min(shrink):.2f}"
        f" (pointwise ratio, informational: median {np.median(pointwise):.1f}, min {min(pointwise):.2f})",
    )


def test_3_two_level_closed_forms(verdict):
    worst = 0.0
    for E0, E1 in [(0.0, 1.0), (-0.7, 2.3), (5.0, 5.25)]:
        grid = np.linspace(E0, E1, 102)[1:-1]
        for E in grid:
            b = two_level_beta(E, E0, E1)
            worst = max(worst, abs(two_level_energy(b, E0, E1) - E))
            worst = max(worst, abs(two_level_beta(two_level_energy(b, E0, E1), E0, E1) - b) / max(1.0, abs(b)) * (E1 - E0))
        worst = max(worst, abs(two_level_beta((E0 + E1) / 2, E0, E1)))
    verdict("3 beta(E) and E(beta) mutual inverses, beta(midpoint) = 0", worst < 1e-12, f"max error {worst:.2e} < 1e-12")


def test_4_degenerate_three_level(verdict):
    at_zero = abs(degenerate_three_level_energy(0.0, 0.0, 1.0) - 2 / 3)
    spec = eigendecompose(np.diag([0.0, 1.0, 1.0]))
    cset = default_commuting_set(spec)
    assert spec.m == 1 and cset.size == 2
    worst = 0.0
    for E in np.linspace(0.05, 0.95, 19):
        sol = conjugate_variables(cset, degenerate_three_level_probabilities(E, 0.0, 1.0))
        oracle = brentq(lambda b: degenerate_three_level_energy(b, 0.0, 1.0) - E, -100, 100, xtol=1e-15)
        worst = max(worst, abs(sol.beta - oracle))
    ok = at_zero < 1e-12 and worst < 1e-8
    verdict("4 degenerate (E0,E1,E1): E(0) = 2/3, inverted closed form == m=1 pipeline", ok,
            f"|E(0) - 2/3| = {at_zero:.1e}, max beta mismatch {worst:.1e}")


def test_5_thermodynamic_conjugacy(verdict):
    # relative error of the conjugate vector (beta, mu) in the max norm; the
    # componentwise figure is printed too but blows up whenever some mu ~ 0
    rng = np.random.default_rng(5)
    worst, componentwise = 0.0, 0.0
    for _ in range(50):
        d = int(rng.integers(2, 7))
        spec, psi = interior_state(rng, d)
        rep = thermo_differential_check(default_commuting_set(spec), populations(spec, psi), 1e-5)
        worst = max(worst, float(np.max(np.abs(rep.residuals)) / np.max(np.abs(rep.gamma))))
        componentwise = max(componentwise, float(np.max(rep.relative_errors)))
    verdict("5 central-difference dS/dE, dS/dF match beta, mu (50 states, d=2..6)", worst <= 1e-5,
            f"max relative error {worst:.2e} <= 1e-5 (componentwise, informational: {componentwise:.2e})")


def test_6_density_of_states(verdict):
    start = time.perf_counter()
    lines, ok = [], True
    for n, bins, tol in [(1, 64, 0.03), (2, 16, 0.05), (3, 8, 0.10)]:
        h = estimate_dos(n, bins, 1_000_000, seed=2024 + n)
        target = math.pi**n
        dev = float(np.max(np.abs(h.estimates[h.interior] / target - 1)))
        mass, sigma = h.total_mass(), h.total_mass_error()
        level, level_err = h.interior_mean()
        vol = manifold_volume(n)
        checks = [
            dev < tol,
            abs(mass - vol) <= 3 * sigma,
            abs(level / math.factorial(n) - vol) <= 3 * level_err / math.factorial(n),
            h.counts[h.exterior].sum() == 0,
        ]
        ok &= all(checks)
        lines.append(f"n={n} max interior dev {dev:.3f} (<{tol}), mass {mass:.6f} vs {vol:.6f}, "
                     f"interior level {level:.4f} +- {level_err:.4f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    verdict("6 Monte Carlo density of states flat at pi^n, mass pi^n/n!", ok, "; ".join(lines) + f"; {elapsed:.1f}s")


INVARIANTS = [
    props.test_dephasing_channel_properties,
    props.test_evolve_preserves_norm,
    props.test_evolve_group_law,
    props.test_populations_conserved,
    props.test_values_round_trip,
    props.test_dependent_set_is_singular,
    props.test_seeded_monte_carlo_merge,
]


@pytest.mark.parametrize("prop", INVARIANTS, ids=lambda f: f.__name__)
def test_7_invariant_suites(verdict, prop):
    try:
        prop()
    except Exception as exc:
        verdict(f"7 {prop.__name__}", False, repr(exc))
    verdict(f"7 {prop.__name__}", True, "hypothesis property holds")


def test_8_reference_goldens(verdict):
    pi2 = math.pi**2
    triangle = [(0.2, 0.3), (0.01, 0.98), (0.5, 0.49), (1 / 3, 1 / 3)]
    outside = [(0.6, 0.6), (0.0, 0.5), (1.0, 0.0), (-0.1, 0.2), (0.5, 0.5)]
    omega_ok = all(analytic_dos(2, p) == pi2 for p in triangle) and all(analytic_dos(2, p) == 0.0 for p in outside)
    support_ok = all(
        analytic_energy_dos(E, 0.0, 2.0) == (math.pi / 2 if 0 < E < 2 else 0.0) for E in np.linspace(-1, 3, 41)
    )
    spec = eigendecompose(np.diag([-0.5, 1.5]))
    cset = default_commuting_set(spec)
    canon_err = 0.0
    for beta in np.linspace(-4, 4, 17):
        closed = two_level_canonical_state(beta, -0.5, 1.5)
        pipeline = grand_canonical(spec, cset, beta).entries.real
        from_energy = np.diag(two_level_probabilities(two_level_energy(beta, -0.5, 1.5), -0.5, 1.5))
        canon_err = max(canon_err, np.max(np.abs(closed - pipeline)), np.max(np.abs(closed - from_energy)))
    ok = omega_ok and support_ok and canon_err < 1e-14
    verdict("8 goldens: Omega = pi^2 on triangle, Omega(E) indicator support, canonical two-level state", ok,
            f"triangle {omega_ok}, support {support_ok}, canonical max error {canon_err:.1e}")
