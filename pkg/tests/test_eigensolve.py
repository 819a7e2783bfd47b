import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slspectra.eigensolve import (
    CSV_HEADER,
    all_boundary_spectra,
    boundary_eigenvalues,
    check_table,
    discriminant_maxima,
    illinois,
    norming_constants,
    periodic_spectrum,
    spectrum_table,
    table_to_csv,
    unperturbed,
)
from slspectra.fundamental import discriminant, fundamental_at_one, transfer
from slspectra.potential import Potential, random_potential

TAGS = ("DD", "NN", "DN", "ND")


def test_unperturbed_values():
    assert unperturbed("DD", 2) == pytest.approx(4 * math.pi**2)
    assert unperturbed("NN", 0) == 0.0
    assert unperturbed("DN", 1) == pytest.approx(math.pi**2 / 4)


@pytest.mark.parametrize("tag", TAGS)
def test_against_frozen_oracle(oracle_values, tag):
    for name in ("cos2", "cos2_sin1"):
        case = oracle_values["cases"][name]
        q = Potential(case["cos"], case["sin"])
        ref = np.array(case[tag]["values"])
        err = np.array(case[tag]["error"])
        got = boundary_eigenvalues(q, tag, 6)
        assert got.size == ref.size
        np.testing.assert_array_less(np.abs(got - ref), np.maximum(3 * err, 1e-7 * np.abs(ref)))


def test_first_dirichlet_value(cos2, oracle_values):
    mu1 = boundary_eigenvalues(cos2, "DD", 1)[0]
    assert mu1 == pytest.approx(oracle_values["cases"]["cos2"]["DD"]["values"][0], abs=1e-7)
    assert mu1 == pytest.approx(8.85709895, abs=1e-7)


def test_periodic_edges_against_oracle(oracle_values):
    for name in ("cos2", "cos2_sin1"):
        case = oracle_values["cases"][name]
        q = Potential(case["cos"], case["sin"])
        per = periodic_spectrum(q, 3)
        # PER2 (period 2) holds both periodic and antiperiodic eigenvalues of the 1-periodic problem
        ref = np.sort(np.array(case["PER2"]["values"]))
        got = np.sort(np.concatenate([[per.lam0_plus], per.lam_minus, per.lam_plus]))
        np.testing.assert_allclose(got, ref[:7], atol=1e-6)


def test_first_gap_is_about_two(cos2):
    per = periodic_spectrum(cos2, 1)
    assert per.gaps[0] == pytest.approx(2.0, abs=0.01)


def test_zero_potential_spectra():
    spectra, _ = all_boundary_spectra(Potential(), 20)
    n = np.arange(1, 21)
    np.testing.assert_allclose(spectra["DD"], (math.pi * n) ** 2, atol=1e-7)
    np.testing.assert_allclose(spectra["NN"], (math.pi * np.arange(21)) ** 2, atol=1e-7)
    np.testing.assert_allclose(spectra["DN"][:20], (math.pi * (n - 0.5)) ** 2, atol=1e-7)
    np.testing.assert_allclose(spectra["ND"][:20], (math.pi * (n - 0.5)) ** 2, atol=1e-7)


def test_zero_potential_table():
    t = spectrum_table(Potential(), 6)
    assert np.all(t.closed)
    assert t.lam0_plus == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_allclose(t.hs, 0.0, atol=1e-9)


def test_eigenvalues_are_roots(cos2_sin1):
    for tag, idx in (("DD", "phi1"), ("DN", "dphi1"), ("ND", "theta1")):
        for lam in boundary_eigenvalues(cos2_sin1, tag, 5):
            assert abs(getattr(fundamental_at_one(cos2_sin1, lam), idx)) < 1e-9


@given(st.integers(0, 10_000), st.floats(0.1, 3.0))
@settings(max_examples=12, deadline=None)
def test_table_invariants_random(seed, norm):
    q = random_potential(np.random.default_rng(seed), 6, norm)
    t = spectrum_table(q, 10)
    assert check_table(t) == []


def test_discriminant_at_maximiser_exceeds_one(rng):
    q = random_potential(rng, 6, 1.0)
    t = spectrum_table(q, 10)
    d = np.array([discriminant(q, x) for x in t.lam_star])
    assert np.all(np.abs(d) >= 1 - 1e-12)
    # maximiser: a dense sample of the open gaps never beats it
    for n in np.flatnonzero(~t.closed)[:4]:
        xs = np.linspace(t.lam_minus[n], t.lam_plus[n], 401)
        g = transfer(q, xs).gap_function
        assert np.max(g) <= t.gap_star[n] * (1 + 1e-9) + 1e-14


def test_norming_constant_identity(cos2_sin1):
    t = spectrum_table(cos2_sin1, 6)
    for n in range(6):
        v = fundamental_at_one(cos2_sin1, t.mu[n])
        assert t.hs[n] == pytest.approx(math.log(abs(v.dphi1)), abs=1e-10)
        assert (-1) ** (n + 1) * v.discriminant == pytest.approx(math.cosh(t.hs[n]), rel=1e-9)
    np.testing.assert_allclose(norming_constants(cos2_sin1, 6), t.hs, atol=1e-12)


def test_interlacing_cos2(cos2):
    t = spectrum_table(cos2, 8)
    assert t.violated() == []
    assert np.all(t.tau == t.rho) or np.allclose(t.tau, t.rho, atol=1e-9)


def test_csv_layout(cos2):
    t = spectrum_table(cos2, 3)
    lines = table_to_csv(t).strip().split("\n")
    assert lines[0].split(",") == CSV_HEADER
    assert len(lines) == 5
    assert lines[1].split(",")[0] == "0"


def test_truncated_table(cos2):
    t = spectrum_table(cos2, 6)
    s = t.truncated(3)
    assert s.N == 3 and s.mu.tolist() == t.mu[:3].tolist()


def test_illinois_simple_roots():
    f = lambda x, idx: x**3 - np.array([2.0, 5.0])[idx]
    a = np.array([0.0, 0.0])
    b = np.array([3.0, 3.0])
    r, _ = illinois(f, a, b, f(a, np.arange(2)), f(b, np.arange(2)))
    np.testing.assert_allclose(r, np.cbrt([2.0, 5.0]), rtol=1e-14)


def test_maxima_inside_gaps(cos2_sin1):
    per = periodic_spectrum(cos2_sin1, 5)
    lam = discriminant_maxima(cos2_sin1, 5, per)
    assert np.all(lam >= per.lam_minus) and np.all(lam <= per.lam_plus)
