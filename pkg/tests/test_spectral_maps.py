import math

import numpy as np
import pytest

from slspectra.eigensolve import spectrum_table
from slspectra.errors import MapConsistencyError
from slspectra.fundamental import discriminant
from slspectra.potential import Potential, l2_norm, random_potential, symmetric_potential
from slspectra.spectral_maps import (
    SpectralVector,
    estimate_check,
    gap_map,
    h_magnitudes,
    h_map,
    map_norm,
    p_map,
    pair_map,
)


@pytest.fixture(scope="module")
def table_cs():
    q = Potential([2.0], [1.0])
    return q, spectrum_table(q, 16)


def test_vector_shape_validation():
    with pytest.raises(ValueError):
        SpectralVector("gap_f", np.zeros(3), 2)
    with pytest.raises(ValueError):
        SpectralVector("p", np.zeros(4), 2)
    with pytest.raises(ValueError):
        SpectralVector("nope", np.zeros(4), 2)


def test_vector_dict_round_trip():
    v = SpectralVector("gap_f", [1.0, -2.0, 0.5, 0.0], 2)
    w = SpectralVector.from_dict(v.to_dict())
    assert w.kind == "gap_f" and np.array_equal(w.entries, v.entries)


def test_map_norm_examples():
    assert map_norm(SpectralVector("gap_f", [3.0, 4.0], 1)) == 5.0
    assert map_norm(SpectralVector("gap_f", [0.0, 0.0, 0.0, 0.0], 2)) == 0.0
    h = SpectralVector("h", [[1.0, 0.0], [0.0, 1.0]], 2)
    assert map_norm(h) == pytest.approx(math.sqrt(5.0))
    with pytest.raises(ValueError):
        map_norm(SpectralVector("pair_mu_tau", [[1.0, 0.5]], 1))


def test_zero_potential_maps_vanish():
    t = spectrum_table(Potential(), 8)
    assert np.max(np.abs(p_map(t).entries)) < 1e-9
    assert np.max(np.abs(h_map(t).entries)) < 1e-9
    assert np.max(np.abs(gap_map(t).entries)) < 1e-9


def test_p_norm_is_quarter_gap_sum(table_cs):
    _, t = table_cs
    gaps = t.lam_plus - t.lam_minus
    for variant in ("dirichlet", "neumann"):
        p = p_map(t, variant)
        assert map_norm(p) ** 2 == pytest.approx(0.25 * np.sum(gaps**2), rel=1e-9)
        np.testing.assert_allclose(np.hypot(*p.entries.T), 0.5 * gaps, atol=1e-12)


def test_h_components(table_cs):
    _, t = table_cs
    mag = h_magnitudes(t)
    for variant in ("dirichlet", "neumann"):
        h = h_map(t, variant).entries
        np.testing.assert_allclose(h[:, 0] ** 2 + h[:, 1] ** 2, mag**2, atol=1e-7)
    np.testing.assert_allclose(h_map(t).entries[:, 1], t.hs)


def test_h_magnitude_against_discriminant():
    q = Potential([2.0])
    t = spectrum_table(q, 4)
    mag = h_magnitudes(t)
    assert math.cosh(mag[0]) == pytest.approx(abs(discriminant(q, t.lam_star[0])), abs=1e-7)


def test_gap_map_layout(table_cs):
    _, t = table_cs
    f = gap_map(t).entries
    np.testing.assert_array_equal(f[0::2], t.rho - t.tau)
    np.testing.assert_array_equal(f[1::2], t.nu - t.mu)
    assert map_norm(gap_map(t)) > 0


def test_symmetric_potential_has_zero_odd_gap_entries(rng):
    q = symmetric_potential(rng, 5, 1.5)
    f = gap_map(spectrum_table(q, 8)).entries
    assert np.max(np.abs(f[0::2])) < 1e-9
    assert np.max(np.abs(f[1::2])) > 1e-3


def test_pairings(table_cs):
    _, t = table_cs
    v = pair_map(t, "mu_tau")
    assert v.kind == "pair_mu_tau" and v.entries.shape == (16, 2)
    assert pair_map(t, "mu_hs").entries[:, 1].tolist() == t.hs.tolist()
    with pytest.raises(ValueError):
        pair_map(t, "tau_mu")


def test_pairing_rejects_broken_alternation(table_cs):
    _, t = table_cs
    from dataclasses import replace

    broken = replace(t, tau=t.tau + 100.0)
    with pytest.raises(MapConsistencyError):
        pair_map(broken, "mu_tau")


def test_zero_potential_estimates_hold():
    q = Potential()
    r = estimate_check(q, spectrum_table(q, 16))
    assert r.ok and all(line.holds for line in r.lines)


def test_estimates_cos2_margin():
    q = Potential([2.0])
    r = estimate_check(q, spectrum_table(q, 16))
    line = next(ln for ln in r.lines if ln.name.startswith("|p|"))
    assert line.holds and line.margin > 0
    assert r.ok


def test_estimates_need_enough_levels(table_cs):
    q, t = table_cs
    with pytest.raises(ValueError):
        estimate_check(q, t.truncated(8))


def test_estimate_report_dict(table_cs):
    q, t = table_cs
    d = estimate_check(q, t).to_dict()
    assert len(d["inequalities"]) == 6
    assert d["norms"]["q"] == pytest.approx(l2_norm(q))


def test_first_order_gap_map(rng):
    # small q: nu_n - mu_n is the n-th cosine coefficient to first order
    q = random_potential(rng, 4, 1e-3)
    f = gap_map(spectrum_table(q, 4)).entries
    np.testing.assert_allclose(f[1::2], q.cos_coeffs, atol=1e-6)
