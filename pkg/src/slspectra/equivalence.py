"""Sign-flip involutions U_sigma = f^-1 J_sigma f on potentials and checks of the identities they induce.

Convention: every identity "X = Y o U_sigma" is evaluated as X(q) = Y(q*)
with q* = U_sigma q.  Since U_sigma is an involution the other reading
gives the same statements.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .eigensolve import SpectrumTable, all_boundary_spectra, periodic_spectrum, spectrum_table
from .errors import ConvergenceError, MapConsistencyError, SpectralError
from .fundamental import DEFAULT_CONFIG, transfer
from .inverse import SolverConfig, gap_vector, reconstruct_or_raise
from .potential import Potential, l2_norm, reflect
from .spectral_maps import SpectralVector, h_map, p_map

log = logging.getLogger(__name__)

CONVENTION = "identities evaluated as X(q) = Y(q*), q* = U_sigma q"

DEFAULT_TOLERANCES = {
    "eigenvalues": 1e-5,
    "periodic": 1e-6,
    "norm": 1e-4,
    "maps": 1e-5,
    "norming": 1e-5,
    "wronskian": 1e-5,
    "reflection": 1e-4,
    "doubling": 1e-6,
}


@dataclass(frozen=True)
class SignSequence:
    """sigma_1, sigma_2, ...: explicit prefix followed by a repeating tail."""

    prefix: tuple = ()
    tail: tuple = (1,)
    name: str = ""

    def __post_init__(self):
        bits = tuple(self.prefix) + tuple(self.tail)
        if not self.tail:
            raise ValueError("sign sequence needs a non-empty repeating tail")
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"sign bits must be 0 or 1, got {bits}")
        object.__setattr__(self, "prefix", tuple(int(b) for b in self.prefix))
        object.__setattr__(self, "tail", tuple(int(b) for b in self.tail))
        if not self.name:
            body = ",".join(map(str, self.prefix))
            rep = ",".join(map(str, self.tail))
            object.__setattr__(self, "name", f"{body}({rep})..." if body else f"({rep})...")

    def bit(self, j: int) -> int:
        """sigma_j, j >= 1."""
        if j < 1:
            raise IndexError("sign sequence is indexed from 1")
        if j <= len(self.prefix):
            return self.prefix[j - 1]
        return self.tail[(j - len(self.prefix) - 1) % len(self.tail)]

    def bits(self, count: int) -> np.ndarray:
        return np.array([self.bit(j) for j in range(1, count + 1)], dtype=int)

    @classmethod
    def parse(cls, text: str) -> SignSequence:
        """'all-ones', 'odd-ones' or comma-separated bits; the last two bits repeat."""
        t = text.strip().lower()
        if t in PRESETS:
            return PRESETS[t]
        try:
            bits = tuple(int(b) for b in t.split(","))
        except ValueError:
            raise ValueError(f"malformed sign sequence {text!r}") from None
        if not bits or any(b not in (0, 1) for b in bits):
            raise ValueError(f"malformed sign sequence {text!r}")
        return cls(prefix=bits, tail=bits[-2:], name=text.strip())


ALL_ONES = SignSequence(tail=(1,), name="all-ones")
ODD_ONES = SignSequence(tail=(1, 0), name="odd-ones")
PRESETS = {"all-ones": ALL_ONES, "odd-ones": ODD_ONES}


def apply_sign_flip(sigma: SignSequence, v):
    """(J_sigma v)_j = (-1)^sigma_j v_j; accepts a gap_f SpectralVector or a plain sequence."""
    if isinstance(v, SpectralVector):
        if v.kind != "gap_f":
            raise ValueError(f"J_sigma acts on gap_f vectors, got {v.kind!r}")
        return SpectralVector("gap_f", apply_sign_flip(sigma, v.entries), v.N)
    v = np.asarray(v, dtype=float)
    return np.where(sigma.bits(v.size) == 1, -v, v)


def involution(sigma: SignSequence, q: Potential, config: SolverConfig):
    """q* = U_sigma q on modes 1..config.N; returns (q*, ReconstructionResult).

    Raises ConvergenceError (with the best iterate attached) when the inverse
    solve fails.
    """
    N = config.N
    f, _ = gap_vector(q, N, config.integrator)
    target = SpectralVector("gap_f", apply_sign_flip(sigma, f), N)
    result = reconstruct_or_raise(target, config, warm_start=q)
    log.info("U_sigma (sigma=%s, N=%d): %d Newton iterations, residual %.3e", sigma.name, N, result.iterations, result.residual_norm)
    return result.potential, result


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


@dataclass
class EquivalenceReport:
    which: str
    sigma: str
    N: int
    levels_checked: int
    checks: list = field(default_factory=list)
    failure: str | None = None
    solver: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failure is None and all(c.passed for c in self.checks)

    def add(self, name, residual, tolerance):
        self.checks.append(IdentityCheck(name, float(residual), float(tolerance)))

    def residual(self, name) -> float:
        for c in self.checks:
            if c.name == name:
                return c.residual
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "which": self.which,
            "sigma": self.sigma,
            "N": self.N,
            "levels_checked": self.levels_checked,
            "convention": CONVENTION,
            "passed": self.passed,
            "failure": self.failure,
            "checks": [{"name": c.name, "residual": c.residual, "tolerance": c.tolerance, "passed": c.passed} for c in self.checks],
            "solver": self.solver,
            "metadata": self.metadata,
        }

    def format_table(self) -> str:
        lines = [f"{self.which} sigma={self.sigma} N={self.N} levels<={self.levels_checked}"]
        if self.failure:
            lines.append(f"FAILED: {self.failure}")
        for c in self.checks:
            lines.append(f"  {'pass' if c.passed else 'FAIL'}  {c.name:<28s} {c.residual:.3e}  (tol {c.tolerance:.1e})")
        return "\n".join(lines)


def _maxabs(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def _periodic_residual(t: SpectrumTable, s: SpectrumTable, m: int) -> float:
    return max(abs(t.lam0_plus - s.lam0_plus), _maxabs(t.lam_minus[:m], s.lam_minus[:m]), _maxabs(t.lam_plus[:m], s.lam_plus[:m]))


def _wronskian_residual(q, qs, t: SpectrumTable, m: int, points: int = 20) -> float:
    lams = np.linspace(t.lam0_plus - 10.0, float(t.mu[m - 1]), points)
    a = transfer(q, lams)
    b = transfer(qs, lams)
    scale = np.maximum(1.0, np.maximum(np.abs(a.dphi), np.abs(a.theta)))
    r = np.maximum(np.abs(a.dphi - b.theta), np.abs(a.theta - b.dphi)) / scale
    return float(np.max(r))


@dataclass(frozen=True)
class MixedMap:
    zeta: np.ndarray
    xi: np.ndarray
    frak_f: np.ndarray
    selector: np.ndarray  # 1 where level n uses the Neumann-side data


def assemble_mixed_map(sigma: SignSequence, table: SpectrumTable) -> MixedMap:
    """zeta, xi and the mixed p-coordinates selected level by level.

    Level n is switched by sigma_{2n}, the sign acting on nu_n - mu_n.
    sigma_{2n} = 1: (nu_n, rho_n), (nu_n, frak_h_s,n), frak_p_n.
    sigma_{2n} = 0: (mu_n, rho_n), (mu_n, -h_s,n), (p_n,1, -p_n,2), the
    reflected Dirichlet data, so that zeta = (mu x tau) o U_sigma holds.
    """
    N = table.N
    odd = sigma.bits(2 * N)[0::2]
    if np.any(odd != 1):
        j = int(np.flatnonzero(odd != 1)[0])
        raise ValueError(f"mixed map requires sigma_(2j-1) = 1 for all j; sigma_{2 * j + 1} = 0")
    sel = sigma.bits(2 * N)[1::2]
    use_n = sel == 1
    p = p_map(table, "dirichlet").entries
    fp = p_map(table, "neumann").entries
    first = np.where(use_n, table.nu, table.mu)
    zeta = np.column_stack([first, table.rho])
    xi = np.column_stack([first, np.where(use_n, table.ghs, -table.hs)])
    frak = np.where(use_n[:, None], fp, p * np.array([1.0, -1.0]))
    if np.any(np.diff(first) <= 0):
        raise MapConsistencyError("mixed map: first components of zeta are not strictly increasing")
    return MixedMap(zeta=zeta, xi=xi, frak_f=frak, selector=sel)


THEOREM_SIGMA = {"T1": ALL_ONES, "T2": ODD_ONES}


def verify_theorem(q: Potential, which: str, config: SolverConfig, sigma: SignSequence | None = None, tolerances=None) -> EquivalenceReport:
    """Compute q* = U_sigma q and check the identities claimed for the selected preset.

    Levels n <= 3N/4 are compared; the top quarter is where truncation of
    the inverse solve is felt.
    """
    which = which.upper()
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    if which in THEOREM_SIGMA:
        sigma = THEOREM_SIGMA[which]
    elif which == "T3":
        if sigma is None:
            raise ValueError("T3 needs an explicit sign sequence")
    else:
        raise ValueError(f"unknown identity suite {which!r}; expected T1, T2 or T3")
    N = config.N
    m = max(1, (3 * N) // 4)
    report = EquivalenceReport(which, sigma.name, N, m, metadata={"tolerances": tol, "residual_tol": config.residual_tol,
                                                                   "max_iter": config.max_iter, "jacobian_mode": config.jacobian_mode})
    if which == "T3":
        odd = sigma.bits(2 * N)[0::2]
        if np.any(odd != 1):
            raise ValueError("T3 requires sigma_(2j-1) = 1 for all j")
    try:
        t = spectrum_table(q, N, config.integrator)
        qs, res = involution(sigma, q, config)
        report.solver = res.to_dict()
        s = spectrum_table(qs, N, config.integrator)
    except ConvergenceError as exc:
        report.failure = f"involution failed: {exc}"
        if exc.result is not None:
            report.solver = exc.result.to_dict()
        return report
    except SpectralError as exc:
        report.failure = f"{type(exc).__name__}: {exc}"
        return report
    report.metadata["q_star"] = {"cos": qs.cos_coeffs.tolist(), "sin": qs.sin_coeffs.tolist()}
    k = slice(0, m)
    qn, qsn = l2_norm(q), l2_norm(qs)

    if which == "T1":
        r = max(_maxabs(t.mu[k], s.nu[k]), _maxabs(t.nu[k], s.mu[k]), _maxabs(t.tau[k], s.rho[k]), _maxabs(t.rho[k], s.tau[k]))
        report.add("swap (mu,nu,tau,rho)", r, tol["eigenvalues"])
        report.add("periodic edges", _periodic_residual(t, s, m), tol["periodic"])
        report.add("norm", abs(qn - qsn) / max(1.0, qn), tol["norm"])
        report.add("nu x frak_h_s vs mu x h_s", max(_maxabs(t.nu[k], s.mu[k]), _maxabs(t.ghs[k], s.hs[k])), tol["norming"])
        try:
            fp_q = p_map(t, "neumann").entries[k]
            p_s = p_map(s, "dirichlet").entries[k]
            fh_q = h_map(t, "neumann").entries[k]
            h_s = h_map(s, "dirichlet").entries[k]
        except MapConsistencyError as exc:
            report.failure = f"map assembly: {exc}"
            return report
        report.add("frak_p vs p", _maxabs(fp_q, p_s), tol["maps"])
        report.add("frak_h vs h", _maxabs(fh_q, h_s), tol["maps"])
        report.add("norming constants", _maxabs(t.ghs[k], s.hs[k]), tol["norming"])
        report.add("wronskian identity", _wronskian_residual(q, qs, t, m), tol["wronskian"])
    elif which == "T2":
        r = max(_maxabs(t.mu[k], s.mu[k]), _maxabs(t.nu[k], s.nu[k]), _maxabs(t.tau[k], s.rho[k]), _maxabs(t.rho[k], s.tau[k]))
        report.add("mu,nu fixed; tau<->rho", r, tol["eigenvalues"])
        report.add("periodic edges", _periodic_residual(t, s, m), tol["periodic"])
        report.add("norm", abs(qn - qsn) / max(1.0, qn), tol["norm"])
        report.add("nu x rho vs nu x tau", max(_maxabs(t.nu[k], s.nu[k]), _maxabs(t.rho[k], s.tau[k])), tol["eigenvalues"])
        report.add("mu x tau vs mu x rho", max(_maxabs(t.mu[k], s.mu[k]), _maxabs(t.tau[k], s.rho[k])), tol["eigenvalues"])
        report.add("q* vs reflect(q)", l2_norm(qs - reflect(q).padded(max(qs.order, q.order))), tol["reflection"])
    else:
        try:
            mixed = assemble_mixed_map(sigma, t)
            p_s = p_map(s, "dirichlet").entries
        except MapConsistencyError as exc:
            report.failure = f"map assembly: {exc}"
            return report
        report.add("zeta vs mu x tau", max(_maxabs(mixed.zeta[k, 0], s.mu[k]), _maxabs(mixed.zeta[k, 1], s.tau[k])), tol["eigenvalues"])
        report.add("xi vs mu x h_s", max(_maxabs(mixed.xi[k, 0], s.mu[k]), _maxabs(mixed.xi[k, 1], s.hs[k])), tol["norming"])
        report.add("mixed p vs p", _maxabs(mixed.frak_f[k], p_s[k]), tol["maps"])
    return report


def _set_residual(a1, a2, b1, b2):
    """Distance between unordered pairs {a1, a2} and {b1, b2}, entrywise."""
    straight = np.maximum(np.abs(a1 - b1), np.abs(a2 - b2))
    crossed = np.maximum(np.abs(a1 - b2), np.abs(a2 - b1))
    return float(np.max(np.minimum(straight, crossed))) if np.size(a1) else 0.0


def verify_doubling(q: Potential, N: int, config=None, tolerance: float | None = None) -> EquivalenceReport:
    """Spectra of the even extension to [0, 2] against those of q on [0, 1]."""
    icfg = config or DEFAULT_CONFIG
    tol = DEFAULT_TOLERANCES["doubling"] if tolerance is None else tolerance
    report = EquivalenceReport("doubling", "-", N, N, metadata={"tolerance": tol})
    try:
        base, _ = all_boundary_spectra(q, N, icfg)
        ext = q.even_extension()
        espec, _ = all_boundary_spectra(ext, 2 * N, icfg)
        # raw roots: collapsing a closed gap would move each edge by up to half its width
        eper = periodic_spectrum(ext, 2 * N, espec, icfg, collapse=False)
    except SpectralError as exc:
        report.failure = f"{type(exc).__name__}: {exc}"
        return report
    mu, nu, tau, rho = base["DD"][:N], base["NN"][: N + 1], base["DN"][:N], base["ND"][:N]
    emu, enu = espec["DD"][: 2 * N], espec["NN"][: 2 * N + 1]
    report.add("mu~(2n-1) = tau_n, mu~(2n) = mu_n", max(_maxabs(emu[0::2], tau), _maxabs(emu[1::2], mu)), tol)
    report.add("nu~(2n-1) = rho_n, nu~(2n) = nu_n", max(_maxabs(enu[1::2], rho), _maxabs(enu[2::2], nu[1:])), tol)
    lm, lp = eper.lam_minus, eper.lam_plus
    report.add("{lam~(2n)-,+} = {mu_n, nu_n}", _set_residual(lm[1::2], lp[1::2], mu, nu[1:]), tol)
    report.add("nu~0 = lam~0+", abs(enu[0] - eper.lam0_plus), tol)
    report.add("{lam~m-,+} = {mu~m, nu~m}", _set_residual(lm, lp, emu, enu[1:]), tol)
    report.metadata["levels_extended"] = 2 * N
    return report


@dataclass(frozen=True)
class SmoothnessReport:
    slope_q: float | None
    slope_u: float | None
    modes_q: int
    modes_u: int
    note: str

    def to_dict(self) -> dict:
        return {"slope_q": self.slope_q, "slope_u": self.slope_u, "modes_q": self.modes_q, "modes_u": self.modes_u, "note": self.note}


def decay_slope(q: Potential, floor: float = 1e-9, modes: int | None = None):
    """Least-squares slope of log|c_k| against log k over modes k <= ``modes`` above ``floor``; None below two modes."""
    c = np.hypot(q.cos_coeffs, q.sin_coeffs)
    if modes is not None:
        c = c[:modes]
    k = np.arange(1, c.size + 1)
    keep = c > floor
    if np.count_nonzero(keep) < 2:
        return None, int(np.count_nonzero(keep))
    slope = np.polyfit(np.log(k[keep]), np.log(c[keep]), 1)[0]
    return float(slope), int(np.count_nonzero(keep))


def smoothness_diagnostic(q: Potential, sigma: SignSequence, config: SolverConfig, floor: float = 1e-9) -> SmoothnessReport:
    """Fourier decay exponents of q and U_sigma q (a consistency diagnostic at finite N)."""
    if sigma.bits(2 * config.N).min() != 1:
        raise ValueError("smoothness diagnostic is defined for the all-ones sequence")
    if q.order == 0 or l2_norm(q) == 0.0:
        return SmoothnessReport(None, None, 0, 0, "zero potential: no resolved modes")
    qs, _ = involution(sigma, q, config)
    # both fits use the modes carried by the input; beyond them U q holds only higher-order terms
    sq, nq = decay_slope(q, floor)
    su, nu = decay_slope(qs, floor, modes=min(q.order, config.N))
    notes = []
    if nq < 2:
        notes.append("finite-mode input: slope of q undefined")
    if nu < 2:
        notes.append("U q has fewer than two resolved modes")
    if sq is not None and su is not None:
        notes.append(f"slope difference {abs(sq - su):.3f}")
    return SmoothnessReport(sq, su, nq, nu, "; ".join(notes))
