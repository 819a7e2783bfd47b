"""Compiled inner loops for the fourth-order Magnus integrator.

For y' = A(x) y with A = [[0, 1], [q - lam, 0]], one step of length h uses
the two Gauss nodes g1, g2 of the step:

    Omega = [[k, h], [h (qbar - lam), -k]],
    qbar = (q(g1) + q(g2)) / 2,   k = sqrt(3) h^2 / 12 * (q(g1) - q(g2)),

and exp(Omega) = C I + S Omega with s^2 = k^2 + h^2 (qbar - lam),
C = cosh s, S = sinh s / s (trigonometric forms when s^2 < 0).
"""
import math

import numpy as np
from numba import njit

_RESCALE = 1e150


@njit(cache=True, inline="always")
def _step_coeffs(s2):
    if s2 > 1e-12:
        s = math.sqrt(s2)
        return math.cosh(s), math.sinh(s) / s
    if s2 < -1e-12:
        w = math.sqrt(-s2)
        return math.cos(w), math.sin(w) / w
    # series for |s| tiny
    return 1.0 + 0.5 * s2, 1.0 + s2 / 6.0


@njit(cache=True)
def _wrap(d):
    while d > math.pi:
        d -= 2.0 * math.pi
    while d <= -math.pi:
        d += 2.0 * math.pi
    return d


@njit(cache=True, nogil=True)
def transfer(qbar, kcorr, h, lams):
    """Monodromy data at the right end for every lambda in ``lams``.

    Returns (out, logscale, angles): out[i] = (theta, theta', phi, phi') up to
    the common factor exp(logscale[i]); angles[i] = (Pruefer angle of theta,
    Pruefer angle of phi), with tan(angle) = f / f', accumulated continuously.
    """
    n_lam = lams.shape[0]
    n_steps = qbar.shape[0]
    out = np.empty((n_lam, 4))
    logscale = np.zeros(n_lam)
    angles = np.empty((n_lam, 2))
    for i in range(n_lam):
        lam = lams[i]
        u0 = 1.0
        u1 = 0.0
        v0 = 0.0
        v1 = 1.0
        au = 0.5 * math.pi
        av = 0.0
        pu = au
        pv = av
        ls = 0.0
        for j in range(n_steps):
            c = qbar[j] - lam
            k = kcorr[j]
            cc, ss = _step_coeffs(k * k + h * h * c)
            e00 = cc + ss * k
            e01 = ss * h
            e10 = ss * h * c
            e11 = cc - ss * k
            t0 = e00 * u0 + e01 * u1
            u1 = e10 * u0 + e11 * u1
            u0 = t0
            t0 = e00 * v0 + e01 * v1
            v1 = e10 * v0 + e11 * v1
            v0 = t0
            nu = math.atan2(u0, u1)
            nv = math.atan2(v0, v1)
            au += _wrap(nu - pu)
            av += _wrap(nv - pv)
            pu = nu
            pv = nv
            m = max(abs(u0), abs(u1), abs(v0), abs(v1))
            if m > _RESCALE:
                u0 /= m
                u1 /= m
                v0 /= m
                v1 /= m
                ls += math.log(m)
        out[i, 0] = u0
        out[i, 1] = u1
        out[i, 2] = v0
        out[i, 3] = v1
        logscale[i] = ls
        angles[i, 0] = au
        angles[i, 1] = av
    return out, logscale, angles


@njit(cache=True, nogil=True)
def trajectory(qbar, kcorr, h, lam, f0, df0):
    """Values (f, f') at every step node for one lambda and one initial vector."""
    n_steps = qbar.shape[0]
    f = np.empty(n_steps + 1)
    df = np.empty(n_steps + 1)
    f[0] = f0
    df[0] = df0
    u0 = f0
    u1 = df0
    for j in range(n_steps):
        c = qbar[j] - lam
        k = kcorr[j]
        cc, ss = _step_coeffs(k * k + h * h * c)
        t0 = (cc + ss * k) * u0 + ss * h * u1
        u1 = ss * h * c * u0 + (cc - ss * k) * u1
        u0 = t0
        f[j + 1] = u0
        df[j + 1] = u1
    return f, df
