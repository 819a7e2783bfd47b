import math

import numpy as np
import pytest

from slspectra.errors import SpectralRangeError
from slspectra.oracle import OracleConfig, fd_spectrum, fd_transfer_extrapolated
from slspectra.potential import Potential


@pytest.mark.parametrize("tag,expect", [
    ("DD", lambda n: (math.pi * n) ** 2),
    ("DN", lambda n: (math.pi * (n - 0.5)) ** 2),
    ("ND", lambda n: (math.pi * (n - 0.5)) ** 2),
])
def test_free_spectra_within_error(tag, expect):
    r = fd_spectrum(Potential(), tag, OracleConfig(levels=5))
    ref = np.array([expect(n) for n in range(1, 6)])
    assert np.all(np.abs(r.values - ref) <= np.maximum(3 * r.error, 1e-9 * ref))


def test_free_neumann_includes_zero():
    r = fd_spectrum(Potential(), "NN", OracleConfig(levels=4))
    assert r.values.size == 5
    # matrix entries ~ 1/h^2 put the round-off floor near 1e-8
    assert abs(r.values[0]) <= max(3 * r.error[0], 1e-8)


def test_periodic_free_levels_are_double():
    r = fd_spectrum(Potential(), "PER2", OracleConfig(levels=3))
    np.testing.assert_allclose(r.values[1:3], math.pi**2, rtol=1e-8)


def test_four_periodic_of_extension_contains_boundary_values():
    q = Potential([1.0])
    per4 = fd_spectrum(q, "PER4", OracleConfig(levels=4)).values
    dd = fd_spectrum(q, "DD", OracleConfig(levels=2)).values
    for v in dd:
        assert np.min(np.abs(per4 - v)) < 1e-6


def test_unresolvable_level_rejected():
    with pytest.raises(SpectralRangeError):
        fd_spectrum(Potential(), "DD", OracleConfig(meshes=(2**-6, 2**-7), levels=10))


def test_transfer_wronskian():
    v, err = fd_transfer_extrapolated(Potential([2.0]), 9.0)
    assert v[0] * v[3] - v[1] * v[2] == pytest.approx(1.0, abs=1e-6)
    assert np.all(err < 1e-6)


def test_unknown_tag():
    with pytest.raises(ValueError):
        fd_spectrum(Potential(), "XX")
