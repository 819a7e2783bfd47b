import json

import numpy as np
import pytest

from slspectra.eigensolve import spectrum_table
from slspectra.equivalence import (
    ALL_ONES,
    ODD_ONES,
    SignSequence,
    apply_sign_flip,
    assemble_mixed_map,
    decay_slope,
    involution,
    smoothness_diagnostic,
    verify_doubling,
    verify_theorem,
)
from slspectra.errors import ConvergenceError
from slspectra.inverse import SolverConfig
from slspectra.jsonio import dumps
from slspectra.potential import Potential, l2_norm, reflect
from slspectra.spectral_maps import SpectralVector, p_map


def test_sign_flip_examples():
    np.testing.assert_array_equal(apply_sign_flip(ALL_ONES, [1, -2, 3]), [-1, 2, -3])
    np.testing.assert_array_equal(apply_sign_flip(ODD_ONES, [1, -2, 3, 4]), [-1, -2, -3, 4])
    np.testing.assert_array_equal(apply_sign_flip(SignSequence.parse("0,1,1"), np.zeros(5)), np.zeros(5))


def test_sign_flip_is_an_involution():
    v = SpectralVector("gap_f", [0.3, -1.0, 2.0, 5.0], 2)
    sigma = SignSequence.parse("1,1,0")
    w = apply_sign_flip(sigma, apply_sign_flip(sigma, v))
    assert np.array_equal(w.entries, v.entries)


def test_sigma_grammar():
    assert SignSequence.parse("all-ones") is ALL_ONES
    assert SignSequence.parse("Odd-Ones") is ODD_ONES
    s = SignSequence.parse("1,0,1,1")
    assert s.bits(8).tolist() == [1, 0, 1, 1, 1, 1, 1, 1]
    s = SignSequence.parse("0,1,1,0")
    assert s.bits(8).tolist() == [0, 1, 1, 0, 1, 0, 1, 0]
    assert SignSequence.parse("1").bits(3).tolist() == [1, 1, 1]
    for bad in ("", "1,2", "a,b", "1,,0"):
        with pytest.raises(ValueError):
            SignSequence.parse(bad)


def test_zero_is_a_fixed_point():
    for sigma in (ALL_ONES, ODD_ONES):
        qs, _ = involution(sigma, Potential(), SolverConfig(8))
        assert l2_norm(qs) < 1e-9


def test_odd_ones_is_reflection():
    q = Potential([], [1.0])
    qs, _ = involution(ODD_ONES, q, SolverConfig(8))
    assert l2_norm(qs - reflect(q).padded(8)) < 1e-4
    assert qs.sin_coeffs[0] == pytest.approx(-1.0, abs=1e-6)


def test_symmetric_fixed_point():
    q = Potential([1.0, -0.4, 0.2])
    qs, _ = involution(ODD_ONES, q, SolverConfig(8))
    assert l2_norm(qs - q.padded(8)) < 1e-5


def test_all_ones_first_order_is_negation():
    q = Potential([1e-3], [5e-4])
    qs, _ = involution(ALL_ONES, q, SolverConfig(6))
    assert l2_norm(qs + q.padded(6)) < 1e-5


def test_t1_identities_cos2_sin1(cos2_sin1):
    r = verify_theorem(cos2_sin1, "T1", SolverConfig(12))
    assert r.passed, r.format_table()
    assert r.levels_checked == 9
    assert r.residual("swap (mu,nu,tau,rho)") < 1e-5
    assert r.residual("norm") < 1e-4


def test_t1_zero_potential():
    r = verify_theorem(Potential(), "T1", SolverConfig(8))
    assert r.passed
    assert max(c.residual for c in r.checks) < 1e-9


def test_t2_identities():
    r = verify_theorem(Potential([1.0], [1.0]), "T2", SolverConfig(12))
    assert r.passed, r.format_table()


def test_t3_mixed_pattern(cos2_sin1):
    r = verify_theorem(cos2_sin1, "T3", SolverConfig(12), SignSequence.parse("1,0,1,1"))
    assert r.passed, r.format_table()


def test_t3_requires_odd_ones_positions(cos2_sin1):
    with pytest.raises(ValueError):
        verify_theorem(cos2_sin1, "T3", SolverConfig(8), SignSequence.parse("0,1"))
    with pytest.raises(ValueError):
        verify_theorem(cos2_sin1, "T9", SolverConfig(8))


def test_report_reports_solver_failure(cos2_sin1):
    r = verify_theorem(cos2_sin1, "T1", SolverConfig(12, max_iter=1))
    assert not r.passed and r.failure and "involution failed" in r.failure
    assert r.checks == []
    d = json.loads(dumps(r.to_dict()))
    assert d["passed"] is False and "convention" in d


def test_mixed_map_collapses_for_all_ones(cos2_sin1):
    t = spectrum_table(cos2_sin1, 6)
    m = assemble_mixed_map(ALL_ONES, t)
    np.testing.assert_array_equal(m.zeta, np.column_stack([t.nu, t.rho]))
    np.testing.assert_array_equal(m.xi, np.column_stack([t.nu, t.ghs]))
    np.testing.assert_array_equal(m.frak_f, p_map(t, "neumann").entries)


def test_mixed_map_alternates_sources(cos2_sin1):
    t = spectrum_table(cos2_sin1, 6)
    m = assemble_mixed_map(ODD_ONES, t)
    np.testing.assert_array_equal(m.zeta[:, 0], t.mu)
    assert m.selector.tolist() == [0] * 6
    # prefix 1,1,1,0 then the tail 1,0 repeats: sigma_2 = 1 and every later even bit is 0
    m = assemble_mixed_map(SignSequence.parse("1,1,1,0"), t)
    assert m.selector.tolist() == [1, 0, 0, 0, 0, 0]
    m = assemble_mixed_map(SignSequence.parse("1,1,1,0,1,1"), t)
    assert m.selector.tolist() == [1, 0, 1, 1, 1, 1]
    np.testing.assert_array_equal(m.zeta[:, 0], np.where(m.selector == 1, t.nu, t.mu))
    with pytest.raises(ValueError):
        assemble_mixed_map(SignSequence.parse("0,0"), t)


@pytest.mark.parametrize("q", [Potential(), Potential([1.0]), Potential([], [1.0])])
def test_doubling(q):
    r = verify_doubling(q, 8)
    assert r.passed, r.format_table()


def test_doubling_free_closed_form():
    r = verify_doubling(Potential(), 4)
    assert all(c.residual < 1e-8 for c in r.checks)


def test_smoothness_cases():
    r = smoothness_diagnostic(Potential(), ALL_ONES, SolverConfig(8))
    assert r.slope_q is None and r.slope_u is None
    r = smoothness_diagnostic(Potential([1.0]), ALL_ONES, SolverConfig(8))
    assert r.slope_q is None and "finite-mode" in r.note
    k = np.arange(1, 13)
    r = smoothness_diagnostic(Potential(k**-3.0), ALL_ONES, SolverConfig(16))
    assert r.slope_q == pytest.approx(-3.0)
    assert abs(r.slope_q - r.slope_u) < 0.5
    with pytest.raises(ValueError):
        smoothness_diagnostic(Potential([1.0]), ODD_ONES, SolverConfig(8))


def test_decay_slope_power_law():
    k = np.arange(1, 9)
    slope, used = decay_slope(Potential(k**-2.0))
    assert slope == pytest.approx(-2.0) and used == 8


def test_involution_failure_propagates(cos2_sin1):
    with pytest.raises(ConvergenceError):
        involution(ALL_ONES, cos2_sin1, SolverConfig(12, max_iter=1))
