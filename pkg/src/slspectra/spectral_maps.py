"""Coordinate maps assembled from a SpectrumTable, their norms and the two-sided estimates."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigensolve import CLOSED_GAP_RTOL, SpectrumTable
from .errors import MapConsistencyError
from .potential import l2_norm

VECTOR_KINDS = ("gap_f", "p", "frak_p", "h", "frak_h", "pair_mu_tau", "pair_nu_rho", "pair_nu_tau", "pair_mu_rho", "pair_mu_hs", "pair_nu_ghs")
ESTIMATE_SLACK = 1e-8
PAIRINGS = ("mu_tau", "nu_rho", "nu_tau", "mu_rho", "mu_hs", "nu_ghs")


@dataclass(frozen=True)
class SpectralVector:
    """Map coordinates at truncation N.

    ``entries`` is a flat array of length 2N for ``gap_f`` (slot 2n-2 holds
    rho_n - tau_n, slot 2n-1 holds nu_n - mu_n) and an (N, 2) array otherwise.
    """

    kind: str
    entries: np.ndarray
    N: int

    def __post_init__(self):
        if self.kind not in VECTOR_KINDS:
            raise ValueError(f"unknown spectral vector kind {self.kind!r}")
        e = np.array(self.entries, dtype=float)
        expect = (2 * self.N,) if self.kind == "gap_f" else (self.N, 2)
        if e.shape != expect:
            raise ValueError(f"{self.kind} entries must have shape {expect}, got {e.shape}")
        if not np.all(np.isfinite(e)):
            raise ValueError("spectral vector entries must be finite")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "N": self.N, "entries": self.entries.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> SpectralVector:
        return cls(kind=data["kind"], entries=np.asarray(data["entries"], dtype=float), N=int(data["N"]))


def gap_map(table: SpectrumTable) -> SpectralVector:
    f = np.empty(2 * table.N)
    f[0::2] = table.rho - table.tau
    f[1::2] = table.nu - table.mu
    return SpectralVector("gap_f", f, table.N)


def _sign(x):
    # sign(0) taken as +1: the magnitude is zero whenever this matters
    return np.where(x < 0, -1.0, 1.0)


def p_map(table: SpectrumTable, variant: str = "dirichlet") -> SpectralVector:
    if variant == "dirichlet":
        ref, hs, kind = table.mu, table.hs, "p"
    elif variant == "neumann":
        ref, hs, kind = table.nu, table.ghs, "frak_p"
    else:
        raise ValueError(f"unknown variant {variant!r}")
    mag = 0.5 * (table.lam_plus - table.lam_minus)
    p1 = 0.5 * (table.lam_plus + table.lam_minus) - ref
    tol = np.where(table.closed, CLOSED_GAP_RTOL * (1.0 + np.abs(ref)), 1e-9)
    bad = np.abs(p1) > mag + tol
    if np.any(bad):
        n = int(np.flatnonzero(bad)[0]) + 1
        raise MapConsistencyError(f"|p_{n},1| = {abs(p1[n - 1])!r} exceeds |p_{n}| = {mag[n - 1]!r}")
    p1 = np.clip(p1, -mag, mag)
    p2 = np.sqrt(np.maximum(mag**2 - p1**2, 0.0)) * _sign(hs)
    return SpectralVector(kind, np.column_stack([p1, p2]), table.N)


def h_magnitudes(table: SpectrumTable) -> np.ndarray:
    """|h_n| = arccosh|Delta(lam_n)|, computed as arcsinh sqrt(Delta^2 - 1)."""
    if np.any(np.abs(table.delta_star) < 1.0 - 1e-9):
        n = int(np.flatnonzero(np.abs(table.delta_star) < 1.0 - 1e-9)[0]) + 1
        raise MapConsistencyError(f"|Delta(lam_{n})| = {abs(table.delta_star[n - 1])!r} < 1")
    return np.arcsinh(np.sqrt(np.maximum(table.gap_star, 0.0)))


def h_map(table: SpectrumTable, variant: str = "dirichlet") -> SpectralVector:
    if variant == "dirichlet":
        ref, hs, kind = table.mu, table.hs, "h"
    elif variant == "neumann":
        ref, hs, kind = table.nu, table.ghs, "frak_h"
    else:
        raise ValueError(f"unknown variant {variant!r}")
    mag = h_magnitudes(table)
    bad = np.abs(hs) > mag + 1e-7
    if np.any(bad):
        n = int(np.flatnonzero(bad)[0]) + 1
        raise MapConsistencyError(f"|h_s,{n}| = {abs(hs[n - 1])!r} exceeds |h_{n}| = {mag[n - 1]!r}")
    hc = np.sqrt(np.maximum(mag**2 - hs**2, 0.0)) * _sign(table.lam_star - ref)
    return SpectralVector(kind, np.column_stack([hc, hs]), table.N)


def _check_alternation(first, second, name):
    if np.any(np.diff(first) <= 0):
        raise MapConsistencyError(f"{name}: first component not strictly increasing")
    if second is not None:
        # mixed eigenvalue n sits below the full-interval eigenvalue n, which sits below mixed n + 1
        if np.any(second >= first) or np.any(first[:-1] >= second[1:]):
            raise MapConsistencyError(f"{name}: components do not alternate")


def pair_map(table: SpectrumTable, which: str) -> SpectralVector:
    if which not in PAIRINGS:
        raise ValueError(f"unknown pairing {which!r}; expected one of {PAIRINGS}")
    a, b = which.split("_")
    src = {"mu": table.mu, "nu": table.nu, "tau": table.tau, "rho": table.rho, "hs": table.hs, "ghs": table.ghs}
    first, second = src[a], src[b]
    _check_alternation(first, second if b in ("tau", "rho") else None, which)
    return SpectralVector(f"pair_{which}", np.column_stack([first, second]), table.N)


def map_norm(v: SpectralVector) -> float:
    if v.kind in ("gap_f", "p", "frak_p"):
        return float(np.sqrt(np.sum(v.entries**2)))
    if v.kind in ("h", "frak_h"):
        n = np.arange(1, v.N + 1)
        return float(np.sqrt(np.sum(n**2 * np.sum(v.entries**2, axis=1))))
    raise ValueError(f"map_norm is undefined for kind {v.kind!r}")


@dataclass(frozen=True)
class EstimateLine:
    name: str
    lhs: float
    rhs: float
    holds: bool
    # True when a violation at finite N is conclusive (truncated map norms only underestimate)
    rigorous_if_violated: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def conclusive_violation(self) -> bool:
        return (not self.holds) and self.rigorous_if_violated


@dataclass(frozen=True)
class EstimateReport:
    N: int
    q_norm: float
    p_norm: float
    f_norm: float
    h_norm: float
    h_sup: float
    lines: tuple

    @property
    def violations(self) -> list:
        return [ln for ln in self.lines if ln.conclusive_violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "norms": {"q": self.q_norm, "p": self.p_norm, "f": self.f_norm, "h1": self.h_norm, "h_sup": self.h_sup},
            "inequalities": [
                {"name": ln.name, "lhs": ln.lhs, "rhs": ln.rhs, "margin": ln.margin, "holds": ln.holds,
                 "rigorous_if_violated": ln.rigorous_if_violated}
                for ln in self.lines
            ],
            "conclusive_violations": len(self.violations),
        }


def estimate_check(q, table: SpectrumTable, min_levels: int = 16) -> EstimateReport:
    """Evaluate the six norm inequalities between q and its p, gap and h coordinates.

    Map norms are truncated at N and therefore underestimate: an upper bound
    on a map norm that fails is a conclusive violation, while a failing
    lower bound (q-norm bounded by a map norm) is only reported.
    """
    if table.N < min_levels:
        raise ValueError(f"estimate_check needs N >= {min_levels}, got {table.N}")
    qn = l2_norm(q)
    pn = map_norm(p_map(table))
    fn = map_norm(gap_map(table))
    hv = h_map(table)
    hn = map_norm(hv)
    hsup = float(np.max(np.hypot(hv.entries[:, 0], hv.entries[:, 1]))) if table.N else 0.0
    c = 1.0 / 3.0

    def line(name, lhs, rhs, rigorous):
        # eigenvalue round-off enters the map norms at about 1e-11; slack well above that
        return EstimateLine(name, float(lhs), float(rhs), bool(lhs <= rhs + ESTIMATE_SLACK * (1.0 + rhs)), rigorous)

    lines = (
        line("q <= 2|p|(1+|p|^1/3)", qn, 2 * pn * (1 + pn**c), False),
        line("|p| <= q(1+q^1/3)", pn, qn * (1 + qn**c), True),
        line("q <= 2|f|(1+2|f|^1/3)", qn, 2 * fn * (1 + 2 * fn**c), False),
        line("|f| <= 2q(1+2q^1/3)", fn, 2 * qn * (1 + 2 * qn**c), True),
        line("q <= 3|h|_1(6+sup|h_n|)^1/2", qn, 3 * hn * math.sqrt(6 + hsup), False),
        line("|h|_1 <= 2q(1+q^1/3)", hn, 2 * qn * (1 + qn**c), True),
    )
    return EstimateReport(table.N, qn, pn, fn, hn, hsup, lines)
