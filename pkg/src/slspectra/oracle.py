"""Brute-force finite-difference spectra with Richardson extrapolation.

Second-order centred differences on uniform meshes; the eigenvalues of the
resulting symmetric matrices are combined pairwise across meshes to cancel
the h^2 term.  Slow on purpose: this module is only a reference for tests,
fixtures and ``oracle-compare``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import eigsh

from .errors import SpectralRangeError

ORACLE_TAGS = ("DD", "NN", "DN", "ND", "PER2", "PER4")


@dataclass(frozen=True)
class OracleConfig:
    meshes: tuple = (2.0**-10, 2.0**-11, 2.0**-12)
    levels: int = 10

    def __post_init__(self):
        if len(self.meshes) < 2:
            raise ValueError("Richardson extrapolation needs at least two meshes")


@dataclass(frozen=True)
class OracleResult:
    values: np.ndarray
    error: np.ndarray
    raw: tuple  # per-mesh eigenvalues


def _dirichlet_like(qv, h, left, right):
    """Diagonal/off-diagonal of the symmetrised matrix for separated conditions.

    ``qv`` holds q at nodes 0..n; a 'D' end drops its node, an 'N' end keeps it
    with a mirrored ghost point (symmetrised by the half-weight at the end).
    """
    n = qv.size - 1
    i0 = 1 if left == "D" else 0
    i1 = n - 1 if right == "D" else n
    d = 2.0 / h**2 + qv[i0 : i1 + 1]
    e = np.full(i1 - i0, -1.0 / h**2)
    if left == "N":
        e[0] = -math.sqrt(2.0) / h**2
    if right == "N":
        e[-1] = -math.sqrt(2.0) / h**2
    return d, e


def _mesh_eigs(q, bc: str, h: float, k: int) -> np.ndarray:
    if bc in ("PER2", "PER4"):
        period = 2.0 if bc == "PER2" else 4.0
        base = q if bc == "PER2" else q.even_extension()
        n = int(round(period / h))
        x = np.arange(n) * h
        # the base potential has period 1 (PER2) or 2 (PER4): fold x accordingly
        qv = base(np.mod(x, base.length))
        main = 2.0 / h**2 + qv
        off = np.full(n - 1, -1.0 / h**2)
        A = sp.diags([off, main, off], [-1, 0, 1], format="lil")
        A[0, n - 1] = -1.0 / h**2
        A[n - 1, 0] = -1.0 / h**2
        sigma = -base.sup_bound - 1.0
        vals = eigsh(A.tocsc(), k=k, sigma=sigma, which="LM", return_eigenvectors=False)
        return np.sort(vals)
    L = q.length
    n = int(round(L / h))
    qv = q(np.linspace(0.0, L, n + 1))
    d, e = _dirichlet_like(qv, h, bc[0], bc[1])
    return eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, k - 1))


def _count(bc: str, levels: int) -> int:
    if bc == "NN":
        return levels + 1
    if bc in ("PER2", "PER4"):
        return 2 * levels + 1
    return levels


def fd_spectrum(q, bc: str, cfg: OracleConfig = OracleConfig()) -> OracleResult:
    """Richardson-extrapolated finite-difference eigenvalues.

    DD/DN/ND return levels 1..levels, NN returns nu_0..nu_levels, PER2/PER4
    return the 2*levels + 1 lowest periodic eigenvalues in increasing order.
    """
    bc = bc.upper()
    if bc not in ORACLE_TAGS:
        raise ValueError(f"unknown oracle tag {bc!r}")
    k = _count(bc, cfg.levels)
    period = {"PER2": 2.0, "PER4": 4.0}.get(bc, q.length)
    coarse = max(cfg.meshes)
    half_waves = cfg.levels * (2 if bc in ("PER2", "PER4") else 1)
    if period / coarse < 32 * max(half_waves, 1):
        raise SpectralRangeError(f"level {cfg.levels} not resolvable on mesh {coarse}")
    hs = sorted(cfg.meshes, reverse=True)
    raw = [_mesh_eigs(q, bc, h, k) for h in hs]
    extrap = []
    for (h1, v1), (h2, v2) in zip(zip(hs, raw), zip(hs[1:], raw[1:])):
        r2 = (h1 / h2) ** 2
        extrap.append((r2 * v2 - v1) / (r2 - 1.0))
    best = extrap[-1]
    if len(extrap) > 1:
        err = np.abs(extrap[-1] - extrap[-2])
    else:
        err = np.abs(raw[-1] - raw[-2])
    return OracleResult(values=best, error=err, raw=tuple(raw))


def fd_transfer(q, lam: float, h: float) -> np.ndarray:
    """(theta, theta', phi, phi') at the right end from the three-term recurrence (O(h^2))."""
    L = q.length
    n = int(round(L / h))
    qv = q(np.arange(n + 2) * h)
    c = 2.0 + h * h * (qv - lam)
    out = []
    for f0, f1 in ((1.0, 0.5 * c[0]), (0.0, h * (1.0 - h * h * (lam - qv[0]) / 6.0))):
        prev, cur = f0, f1
        vals = [prev, cur]
        for i in range(1, n + 1):
            prev, cur = cur, c[i] * cur - prev
            vals.append(cur)
        f = np.array(vals)
        out += [f[n], (f[n + 1] - f[n - 1]) / (2 * h)]
    return np.array(out)


def fd_transfer_extrapolated(q, lam: float, h: float = 2.0**-14) -> tuple[np.ndarray, np.ndarray]:
    """Richardson combination of ``fd_transfer`` at h and h/2, with a spread-based error."""
    a = fd_transfer(q, lam, 2 * h)
    b = fd_transfer(q, lam, h)
    c = fd_transfer(q, lam, h / 2)
    r1 = (4 * b - a) / 3
    r2 = (4 * c - b) / 3
    return r2, np.abs(r2 - r1)
