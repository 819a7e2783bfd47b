"""Boundary spectra, periodic band edges, discriminant maxima and norming constants.

Boundary eigenvalues are isolated with Pruefer oscillation counts and then
refined on the sign change of the matching right-end value (phi, theta',
phi', theta for DD, NN, DN, ND).  All levels and tags are solved together in
one batch so each integrator call serves every pending root.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BracketingError, SpectralRangeError, TableInvariantError
from .fundamental import BOUNDARY_TAGS, DEFAULT_CONFIG, IntegratorConfig, _check_tag, step_count, transfer
from .jsonio import fmt

CLOSED_GAP_RTOL = 1e-8
INVARIANT_GUARD = 1e-9
_TAG_CODE = {tag: i for i, tag in enumerate(BOUNDARY_TAGS)}


def unperturbed(bc: str, index, length: float = 1.0):
    """Eigenvalue of the tagged problem for q = 0 (NN indexed from 0, the others from 1)."""
    index = np.asarray(index, dtype=float)
    if bc in ("DD", "NN"):
        return (np.pi * index / length) ** 2
    return (np.pi * (index - 0.5) / length) ** 2


def _levels(bc: str, N: int) -> np.ndarray:
    return np.arange(0, N + 1) if bc == "NN" else np.arange(1, N + 1)


def _select(batch, codes):
    """Per-entry target value and eigenvalue count for mixed-tag batches."""
    start_d = (codes == 0) | (codes == 2)
    end_d = (codes == 0) | (codes == 3)
    ang = np.where(start_d, batch.angle_phi, batch.angle_theta)
    counts = np.floor(ang / math.pi + np.where(end_d, 0.0, 0.5)).astype(int)
    target = np.choose(codes, [batch.phi, batch.dtheta, batch.dphi, batch.theta])
    return target, counts


def illinois(fun, a, b, fa, fb, rtol=4e-16, maxiter=200):
    """Vectorised Illinois regula falsi with bisection safeguard.

    Every (a[i], b[i]) must bracket a sign change.  Returns the roots and the
    final bracket widths.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    fa = np.array(fa, dtype=float)
    fb = np.array(fb, dtype=float)
    x = np.where(np.abs(fa) < np.abs(fb), a, b)
    done = (fa == 0) | (fb == 0)
    x = np.where(fa == 0, a, np.where(fb == 0, b, x))
    width_prev = np.abs(b - a)
    stall = np.zeros(a.shape, dtype=int)
    for _ in range(maxiter):
        width = np.abs(b - a)
        done |= width <= rtol * (1.0 + np.abs(x)) * 8
        active = ~done
        if not np.any(active):
            break
        ia = np.flatnonzero(active)
        aa, bb, ffa, ffb = a[ia], b[ia], fa[ia], fb[ia]
        xs = (aa * ffb - bb * ffa) / (ffb - ffa)
        lo, hi = np.minimum(aa, bb), np.maximum(aa, bb)
        bisect = ~np.isfinite(xs) | (xs <= lo) | (xs >= hi) | (stall[ia] >= 2)
        xs = np.where(bisect, 0.5 * (aa + bb), xs)
        stall[ia] = np.where(bisect, 0, stall[ia])
        fx = fun(xs, ia)
        flip = np.sign(fx) != np.sign(ffb)
        # Illinois: halve the stale endpoint value when the same side is kept
        new_a = np.where(flip, bb, aa)
        new_fa = np.where(flip, ffb, 0.5 * ffa)
        a[ia], fa[ia] = new_a, new_fa
        b[ia], fb[ia] = xs, fx
        x[ia] = xs
        w = np.abs(b[ia] - a[ia])
        stall[ia] = np.where(w > 0.5 * width_prev[ia], stall[ia] + 1, 0)
        width_prev[ia] = w
        done[ia] |= fx == 0
    return x, np.abs(b - a)


def _solve_levels(q, tags, ranks, index, config: IntegratorConfig = DEFAULT_CONFIG, steps=None):
    """Eigenvalue number ``rank`` (0-based position) for each (tag, rank) pair."""
    codes = np.array([_TAG_CODE[t] for t in tags], dtype=int)
    ranks = np.asarray(ranks, dtype=int)
    L = q.length
    base = np.array([float(unperturbed(t, i, L)) for t, i in zip(tags, index)])
    # min-max bounds: each eigenvalue moves by at most sup|q| from its unperturbed value
    pad = q.sup_bound + 1.0
    lo = base - pad
    hi = base + pad
    if steps is None:
        steps = step_count(q, float(np.max(np.abs(np.concatenate([lo, hi])))), config)

    def evaluate(lams, idx):
        b = transfer(q, lams, steps, config)
        return _select(b, codes[idx])

    _, c_lo = evaluate(lo, np.arange(lo.size))
    f_hi, c_hi = evaluate(hi, np.arange(hi.size))
    bad = (c_lo > ranks) | (c_hi < ranks + 1)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise BracketingError(
            f"{tags[i]} level {index[i]}: counts {c_lo[i]}..{c_hi[i]} on [{lo[i]:.6g}, {hi[i]:.6g}] do not bracket rank {ranks[i]}"
        )
    for _ in range(200):
        pending = np.flatnonzero((c_lo != ranks) | (c_hi != ranks + 1))
        if pending.size == 0:
            break
        mid = 0.5 * (lo[pending] + hi[pending])
        _, c_mid = evaluate(mid, pending)
        up = c_mid >= ranks[pending] + 1
        hi[pending] = np.where(up, mid, hi[pending])
        c_hi[pending] = np.where(up, c_mid, c_hi[pending])
        lo[pending] = np.where(up, lo[pending], mid)
        c_lo[pending] = np.where(up, c_lo[pending], c_mid)
    else:
        raise BracketingError("oscillation-count bisection did not isolate every level")
    f_lo, _ = evaluate(lo, np.arange(lo.size))
    f_hi, _ = evaluate(hi, np.arange(hi.size))
    same = (np.sign(f_lo) == np.sign(f_hi)) & (f_lo != 0) & (f_hi != 0)
    if np.any(same):
        i = int(np.flatnonzero(same)[0])
        raise BracketingError(f"{tags[i]} level {index[i]}: isolated bracket has no sign change")
    roots, _ = illinois(lambda x, idx: evaluate(x, idx)[0], lo, hi, f_lo, f_hi)
    return roots, steps


def boundary_eigenvalues(q, bc: str, N: int, config: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """First N eigenvalues (N + 1 for NN, starting with nu_0) in increasing order."""
    bc = _check_tag(bc)
    if N < 1:
        raise ValueError("N must be >= 1")
    idx = _levels(bc, N)
    ranks = idx if bc == "NN" else idx - 1
    roots, _ = _solve_levels(q, [bc] * idx.size, ranks, idx, config)
    return roots


def all_boundary_spectra(q, N: int, config: IntegratorConfig = DEFAULT_CONFIG, mixed_extra: int = 1):
    """mu_1..N, nu_0..N, tau_1..N+extra, rho_1..N+extra from one batched solve."""
    tags, ranks, index = [], [], []
    for bc, n in (("DD", N), ("NN", N), ("DN", N + mixed_extra), ("ND", N + mixed_extra)):
        idx = _levels(bc, n)
        tags += [bc] * idx.size
        index += idx.tolist()
        ranks += (idx if bc == "NN" else idx - 1).tolist()
    roots, steps = _solve_levels(q, tags, ranks, index, config)
    out = {}
    pos = 0
    for bc, n in (("DD", N), ("NN", N), ("DN", N + mixed_extra), ("ND", N + mixed_extra)):
        m = n + 1 if bc == "NN" else n
        out[bc] = roots[pos : pos + m]
        pos += m
    return out, steps


@dataclass(frozen=True)
class PeriodicSpectrum:
    lam0_plus: float
    lam_minus: np.ndarray
    lam_plus: np.ndarray
    closed: np.ndarray

    @property
    def gaps(self) -> np.ndarray:
        return self.lam_plus - self.lam_minus


def _gap_roots(q, a, b, steps, config, ends_at_b):
    """Roots of Delta^2 - 1 on brackets [a, b]; the gap side is b (ends_at_b) or a."""
    fa = transfer(q, a, steps, config).gap_function
    fb = transfer(q, b, steps, config).gap_function
    gap_side = np.where(ends_at_b, fb, fa)
    band_side = np.where(ends_at_b, fa, fb)
    gap_pt = np.where(ends_at_b, b, a)
    # gap end numerically non-positive: the band edge sits on the bracket end
    trivial = (gap_side <= 0) | (band_side >= 0)
    roots = gap_pt.copy()
    live = np.flatnonzero(~trivial)
    if live.size:
        def fun(x, idx):
            return transfer(q, x, steps, config).gap_function

        r, _ = illinois(fun, a[live], b[live], fa[live], fb[live])
        roots[live] = r
    return roots


def periodic_spectrum(q, N: int, spectra=None, config: IntegratorConfig = DEFAULT_CONFIG, collapse: bool = True) -> PeriodicSpectrum:
    """Band edges lam_0^+, lam_n^-, lam_n^+ (n <= N) from brackets given by the boundary spectra.

    With ``collapse`` the edges of a closed gap are both set to their midpoint;
    without it the raw roots are kept and only the ``closed`` flags are set.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if spectra is None:
        spectra, steps = all_boundary_spectra(q, N, config)
    mu, nu, tau, rho = spectra["DD"][:N], spectra["NN"], spectra["DN"], spectra["ND"]
    if tau.size < N + 1 or rho.size < N + 1:
        raise ValueError("mixed spectra must include level N + 1")
    steps = step_count(q, float(max(tau[N], rho[N])), config)
    lo_mix = np.minimum(tau[: N + 1], rho[: N + 1])
    hi_mix = np.maximum(tau[:N], rho[:N])
    lo_dn = np.minimum(mu, nu[1:])
    hi_dn = np.maximum(mu, nu[1:])
    if nu[0] >= lo_mix[0] or np.any(hi_mix >= lo_dn) or np.any(hi_dn >= lo_mix[1:]):
        raise TableInvariantError("boundary spectra do not interlace; cannot bracket band edges")
    a = np.concatenate([[nu[0]], hi_mix, hi_dn])
    b = np.concatenate([[lo_mix[0]], lo_dn, lo_mix[1:]])
    ends_at_b = np.concatenate([[False], np.ones(N, bool), np.zeros(N, bool)])
    roots = _gap_roots(q, a, b, steps, config, ends_at_b)
    lam0 = float(roots[0])
    lm = roots[1 : N + 1].copy()
    lp = roots[N + 1 :].copy()
    closed = (lp - lm) < CLOSED_GAP_RTOL * (1.0 + np.abs(lm))
    if collapse:
        common = 0.5 * (lm + lp)
        lm[closed] = common[closed]
        lp[closed] = common[closed]
    return PeriodicSpectrum(lam0_plus=lam0, lam_minus=lm, lam_plus=lp, closed=closed)


def discriminant_maxima(q, N: int, periodic: PeriodicSpectrum | None = None, config: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Maximiser lam_n of Delta^2 on each gap [lam_n^-, lam_n^+] (lam_n^- if the gap is closed)."""
    if periodic is None:
        periodic = periodic_spectrum(q, N, config=config)
    a = periodic.lam_minus.copy()
    b = periodic.lam_plus.copy()
    out = a.copy()
    live = np.flatnonzero(~periodic.closed)
    if live.size == 0:
        return out
    a, b = a[live], b[live]
    steps = step_count(q, float(np.max(b)), config)

    def g(x):
        return transfer(q, x, steps, config).gap_function

    # golden section: Delta^2 - 1 is unimodal on a gap
    r = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(40):
        c = b - r * (b - a)
        d = a + r * (b - a)
        gc, gd = _reeval_pair(g, c, d)
        left = gc > gd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    x = 0.5 * (a + b)
    # secant polish on a central-difference derivative
    eps = np.maximum(1e-7 * (1.0 + np.abs(x)), 1e-3 * (b - a))
    x0 = x - eps
    d0 = (g(x0 + eps) - g(x0 - eps)) / (2 * eps)
    d1 = (g(x + eps) - g(x - eps)) / (2 * eps)
    for _ in range(3):
        denom = d1 - d0
        ok = np.abs(denom) > 0
        xn = np.where(ok, x - d1 * (x - x0) / np.where(ok, denom, 1.0), x)
        inside = (xn >= periodic.lam_minus[live]) & (xn <= periodic.lam_plus[live])
        better = inside & (g(xn) >= g(x))
        x0, d0 = np.where(better, x, x0), np.where(better, d1, d0)
        x = np.where(better, xn, x)
        d1 = (g(x + eps) - g(x - eps)) / (2 * eps)
    out[live] = x
    return out


def _reeval_pair(g, c, d):
    v = g(np.concatenate([c, d]))
    return v[: c.size], v[c.size :]


def norming_constants(q, N: int, variant: str = "dirichlet", eigenvalues=None, config: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """h_{s,n} = ln|phi'(1, mu_n)| (dirichlet) or ln|theta(1, nu_n)| (neumann), n = 1..N."""
    if variant == "dirichlet":
        lams = boundary_eigenvalues(q, "DD", N, config) if eigenvalues is None else np.asarray(eigenvalues)[:N]
        vals = transfer(q, lams, config=config).dphi
    elif variant == "neumann":
        lams = boundary_eigenvalues(q, "NN", N, config)[1:] if eigenvalues is None else np.asarray(eigenvalues)[:N]
        vals = transfer(q, lams, config=config).theta
    else:
        raise ValueError(f"unknown variant {variant!r}")
    vals = np.abs(vals)
    if np.any(vals < 1e-12):
        raise SpectralRangeError("degenerate norming value (|.| < 1e-12)")
    return np.log(vals)


@dataclass(frozen=True)
class SpectrumTable:
    N: int
    mu: np.ndarray
    nu0: float
    nu: np.ndarray
    tau: np.ndarray
    rho: np.ndarray
    lam0_plus: float
    lam_minus: np.ndarray
    lam_plus: np.ndarray
    lam_star: np.ndarray
    hs: np.ndarray
    ghs: np.ndarray
    closed: np.ndarray
    delta_star: np.ndarray  # Delta(lam_n)
    gap_star: np.ndarray  # Delta(lam_n)^2 - 1, cancellation free
    delta_mu: np.ndarray  # Delta(mu_n)
    length: float = 1.0
    tau_next: float = math.nan
    rho_next: float = math.nan
    violations: tuple = field(default=(), compare=False)

    @property
    def n(self) -> np.ndarray:
        return np.arange(1, self.N + 1)

    def violated(self, guard: float = INVARIANT_GUARD) -> list[str]:
        return check_table(self, guard)

    def truncated(self, N: int) -> SpectrumTable:
        if N > self.N:
            raise ValueError("cannot extend a table")
        kw = {}
        for name in ("mu", "nu", "tau", "rho", "lam_minus", "lam_plus", "lam_star", "hs", "ghs", "closed", "delta_star", "gap_star", "delta_mu"):
            kw[name] = getattr(self, name)[:N]
        return SpectrumTable(
            N=N, nu0=self.nu0, lam0_plus=self.lam0_plus, length=self.length,
            tau_next=float(self.tau[N]) if N < self.N else self.tau_next,
            rho_next=float(self.rho[N]) if N < self.N else self.rho_next,
            **kw,
        )


def check_table(t: SpectrumTable, guard: float = INVARIANT_GUARD) -> list[str]:
    """All violated ordering/consistency relations, as readable strings."""
    out = []

    def tol(x):
        return guard * (1.0 + abs(float(x)))

    lo_mix = np.minimum(t.tau, t.rho)
    hi_mix = np.maximum(t.tau, t.rho)
    lo_dn = np.minimum(t.mu, t.nu)
    hi_dn = np.maximum(t.mu, t.nu)
    if not t.nu0 < lo_mix[0] - tol(lo_mix[0]):
        out.append(f"interlacing: nu0={t.nu0!r} !< min(tau1, rho1)={lo_mix[0]!r}")
    for i in range(t.N):
        n = i + 1
        if not hi_mix[i] < lo_dn[i] - tol(lo_dn[i]):
            out.append(f"interlacing: max(tau{n}, rho{n})={hi_mix[i]!r} !< min(mu{n}, nu{n})={lo_dn[i]!r}")
        if i + 1 < t.N and not hi_dn[i] < lo_mix[i + 1] - tol(lo_mix[i + 1]):
            out.append(f"interlacing: max(mu{n}, nu{n})={hi_dn[i]!r} !< min(tau{n + 1}, rho{n + 1})={lo_mix[i + 1]!r}")
        prev = t.lam0_plus if i == 0 else t.lam_plus[i - 1]
        for name, v in (("tau", t.tau[i]), ("rho", t.rho[i])):
            if not (prev < v < t.lam_minus[i]):
                out.append(f"band placement: {name}{n}={v!r} not in (lam{n - 1}+, lam{n}-)=({prev!r}, {t.lam_minus[i]!r})")
        # a gap declared closed absorbs spreads up to the closed-gap tolerance
        slack = max(guard, CLOSED_GAP_RTOL) if t.closed[i] else guard
        for name, v in (("mu", t.mu[i]), ("nu", t.nu[i]), ("lam_star", t.lam_star[i])):
            if not (t.lam_minus[i] - slack * (1 + abs(v)) <= v <= t.lam_plus[i] + slack * (1 + abs(v))):
                out.append(f"band placement: {name}{n}={v!r} not in [lam{n}-, lam{n}+]=[{t.lam_minus[i]!r}, {t.lam_plus[i]!r}]")
        sgn = (-1) ** n
        if sgn * t.delta_star[i] < 1.0 - guard:
            out.append(f"discriminant: (-1)^{n} Delta(lam_{n}) = {sgn * t.delta_star[i]!r} < 1")
        ch = math.cosh(t.hs[i])
        if abs(sgn * t.delta_mu[i] - ch) > 1e-7 * ch:
            out.append(f"norming: (-1)^{n} Delta(mu_{n}) = {sgn * t.delta_mu[i]!r} != cosh h_s = {ch!r}")
    if t.nu0 > t.lam0_plus + tol(t.lam0_plus):
        out.append(f"band placement: nu0={t.nu0!r} > lam0+={t.lam0_plus!r}")
    return out


def spectrum_table(q, N: int, config: IntegratorConfig = DEFAULT_CONFIG, validate: bool = True) -> SpectrumTable:
    """All spectral data up to level N, validated before it is returned."""
    if N < 1:
        raise ValueError("N must be >= 1")
    spectra, _ = all_boundary_spectra(q, N, config)
    per = periodic_spectrum(q, N, spectra, config)
    lam_star = discriminant_maxima(q, N, per, config)
    mu, nu, tau, rho = spectra["DD"], spectra["NN"], spectra["DN"], spectra["ND"]
    steps = step_count(q, float(max(tau[N], rho[N])), config)
    b_mu = transfer(q, mu, steps, config)
    b_nu = transfer(q, nu[1:], steps, config)
    b_star = transfer(q, lam_star, steps, config)
    hs = np.log(np.abs(b_mu.dphi))
    ghs = np.log(np.abs(b_nu.theta))
    gap_star = b_star.gap_function
    closed = per.closed.copy()
    gap_star = np.where(closed, 0.0, np.maximum(gap_star, 0.0))
    table = SpectrumTable(
        N=N, mu=mu, nu0=float(nu[0]), nu=nu[1:], tau=tau[:N], rho=rho[:N],
        lam0_plus=per.lam0_plus, lam_minus=per.lam_minus, lam_plus=per.lam_plus,
        lam_star=lam_star, hs=hs, ghs=ghs, closed=closed,
        delta_star=b_star.delta, gap_star=gap_star, delta_mu=b_mu.delta,
        length=q.length, tau_next=float(tau[N]), rho_next=float(rho[N]),
    )
    if validate:
        bad = check_table(table)
        if bad:
            raise TableInvariantError("spectrum table rejected: " + "; ".join(bad[:5]))
    return table


CSV_HEADER = ["n", "mu", "nu", "tau", "rho", "lam_minus", "lam_plus", "lam_star", "h_s", "gh_s"]


def table_to_csv(t: SpectrumTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerow(["0", "", fmt(t.nu0), "", "", "", fmt(t.lam0_plus), "", "", ""])
    for i in range(t.N):
        w.writerow([str(i + 1)] + [fmt(v) for v in (t.mu[i], t.nu[i], t.tau[i], t.rho[i], t.lam_minus[i], t.lam_plus[i], t.lam_star[i], t.hs[i], t.ghs[i])])
    return buf.getvalue()
