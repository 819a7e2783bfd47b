"""Truncated inverse of the gap map by damped Newton iteration on Fourier coefficients.

Unknowns are (a_1..a_N, b_1..b_N) for a target with 2N gap-map entries.  The
derivative of a simple eigenvalue with respect to q is the squared
normalised eigenfunction, so each Jacobian row is a difference of two such
gradients projected onto cos(2 pi k x), sin(2 pi k x).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .eigensolve import all_boundary_spectra, boundary_eigenvalues
from .errors import ConvergenceError, IllConditionedError, SpectralError
from .fundamental import DEFAULT_CONFIG, GridFunction, IntegratorConfig, _check_tag, eigenfunction
from .potential import Potential, l2_norm
from .parallel import thread_map
from .spectral_maps import SpectralVector

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    N: int
    residual_tol: float = 1e-8
    max_iter: int = 60
    backtrack: float = 0.5
    min_step: float = 2.0**-10
    jacobian_mode: str = "analytic"
    max_condition: float = 1e10
    integrator: IntegratorConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.jacobian_mode not in ("analytic", "finite_difference"):
            raise ValueError(f"unknown jacobian_mode {self.jacobian_mode!r}")


@dataclass
class ReconstructionResult:
    potential: Potential
    residual_norm: float
    iterations: int
    converged: bool
    jacobian_condition_estimate: float
    residual_history: list = field(default_factory=list)
    verified_residual: float = math.nan

    def to_dict(self) -> dict:
        return {
            "residual_norm": self.residual_norm,
            "verified_residual": self.verified_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "jacobian_condition_estimate": self.jacobian_condition_estimate,
            "residual_history": list(self.residual_history),
        }


def _simpson_weights(n_intervals: int, length: float) -> np.ndarray:
    h = length / n_intervals
    w = np.ones(n_intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def eigenvalue_gradient(q, bc: str, n: int, config: IntegratorConfig = DEFAULT_CONFIG, eigenvalue: float | None = None) -> GridFunction:
    """Squared normalised eigenfunction of level n (NN counts from 0): d lambda_n / d q."""
    bc = _check_tag(bc)
    if eigenvalue is None:
        lams = boundary_eigenvalues(q, bc, max(n, 1), config)
        eigenvalue = lams[n] if bc == "NN" else lams[n - 1]
    y = eigenfunction(q, bc, eigenvalue, config)
    return GridFunction(x=y.x, values=y.values**2, normalized=False)


def project_gradients(grads: np.ndarray, x: np.ndarray, modes: int) -> np.ndarray:
    """Rows of int g(x) cos(2 pi k x) dx, k = 1..modes, followed by the sine moments."""
    w = _simpson_weights(x.size - 1, float(x[-1] - x[0]))
    k = np.arange(1, modes + 1)
    arg = 2.0 * np.pi * np.outer(x, k)
    basis = np.hstack([np.cos(arg), np.sin(arg)]) * w[:, None]
    return grads @ basis


def _spectra_levels(q, N, config):
    spectra, _ = all_boundary_spectra(q, N, config, mixed_extra=0)
    return spectra["DD"], spectra["NN"][1:], spectra["DN"], spectra["ND"]


def gap_vector(q, N: int, config: IntegratorConfig = DEFAULT_CONFIG):
    """First 2N gap-map entries without building (and validating) a full table."""
    mu, nu, tau, rho = _spectra_levels(q, N, config)
    f = np.empty(2 * N)
    f[0::2] = rho - tau
    f[1::2] = nu - mu
    return f, (mu, nu, tau, rho)


def gap_jacobian(q, N: int, config: IntegratorConfig = DEFAULT_CONFIG, spectra=None) -> np.ndarray:
    """Analytic Jacobian of the 2N gap-map entries w.r.t. (a_1..a_N, b_1..b_N)."""
    if spectra is None:
        _, spectra = gap_vector(q, N, config)
    mu, nu, tau, rho = spectra
    jobs = [(bc, float(lam)) for bc, lams in (("DD", mu), ("NN", nu), ("DN", tau), ("ND", rho)) for lam in lams]
    funcs = thread_map(lambda job: eigenfunction(q, job[0], job[1], config), jobs)
    x = funcs[0].x
    proj = project_gradients(np.array([y.values**2 for y in funcs]), x, N)
    rows = {bc: proj[i * N : (i + 1) * N] for i, bc in enumerate(("DD", "NN", "DN", "ND"))}
    J = np.empty((2 * N, 2 * N))
    J[0::2] = rows["ND"] - rows["DN"]
    J[1::2] = rows["NN"] - rows["DD"]
    return J


def gap_jacobian_fd(q, N: int, config: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Column-wise central differences with step 1e-5 (1 + |c_k|)."""
    c = q.as_vector(N)
    J = np.empty((2 * N, 2 * N))
    for k in range(2 * N):
        step = 1e-5 * (1.0 + abs(c[k]))
        cp, cm = c.copy(), c.copy()
        cp[k] += step
        cm[k] -= step
        fp, _ = gap_vector(Potential.from_vector(cp), N, config)
        fm, _ = gap_vector(Potential.from_vector(cm), N, config)
        J[:, k] = (fp - fm) / (2 * step)
    return J


def norm_guard(target_norm: float) -> float:
    return 4.0 * target_norm * (1.0 + 2.0 * target_norm ** (1.0 / 3.0)) + 1.0


def reconstruct_from_gap_map(target: SpectralVector, config: SolverConfig, warm_start: Potential | None = None) -> ReconstructionResult:
    """Potential on modes 1..N whose first 2N gap-map entries match ``target``.

    Returns a result with ``converged=False`` (best iterate kept) when the
    iteration stalls or runs out of steps; raises IllConditionedError when
    the Jacobian condition estimate exceeds ``config.max_condition``.
    """
    if target.kind != "gap_f":
        raise ValueError(f"target must be a gap_f vector, got {target.kind!r}")
    N = config.N
    if target.N != N:
        raise ValueError(f"target has N = {target.N}, solver configured for N = {N}")
    t = np.asarray(target.entries, dtype=float)
    guard = norm_guard(float(np.linalg.norm(t)))
    icfg = config.integrator

    c = np.zeros(2 * N) if warm_start is None else warm_start.as_vector(N)
    if l2_norm(Potential.from_vector(c)) > guard:
        c = np.zeros(2 * N)
    q = Potential.from_vector(c)
    f, spectra = gap_vector(q, N, icfg)
    res = float(np.linalg.norm(f - t))
    history = [res]
    cond = math.nan
    iterations = 0
    converged = res <= config.residual_tol
    while not converged and iterations < config.max_iter:
        if config.jacobian_mode == "analytic":
            J = gap_jacobian(q, N, icfg, spectra)
        else:
            J = gap_jacobian_fd(q, N, icfg)
        cond = float(np.linalg.cond(J))
        if not cond <= config.max_condition:
            raise IllConditionedError(
                f"Jacobian condition estimate {cond:.3e} exceeds {config.max_condition:.1e}",
                ReconstructionResult(q, res, iterations, False, cond, history),
            )
        dc = np.linalg.solve(J, t - f)
        step = 1.0
        accepted = False
        while step >= config.min_step:
            c_try = c + step * dc
            q_try = Potential.from_vector(c_try)
            if l2_norm(q_try) <= guard:
                try:
                    f_try, spectra_try = gap_vector(q_try, N, icfg)
                except SpectralError as exc:
                    log.debug("trial step %.3g rejected: %s", step, exc)
                else:
                    res_try = float(np.linalg.norm(f_try - t))
                    if res_try < res:
                        accepted = True
                        break
            step *= config.backtrack
        if not accepted:
            log.info("damped Newton stalled at residual %.3e after %d iterations", res, iterations)
            break
        c, q, f, spectra, res = c_try, q_try, f_try, spectra_try, res_try
        iterations += 1
        history.append(res)
        log.debug("newton iteration %d: step %.3g, residual %.3e, cond %.3e", iterations, step, res, cond)
        converged = res <= config.residual_tol

    result = ReconstructionResult(q, res, iterations, converged, cond, history)
    if converged:
        f_check, _ = gap_vector(q, N, icfg)
        result.verified_residual = float(np.linalg.norm(f_check - t))
    return result


def reconstruct_or_raise(target: SpectralVector, config: SolverConfig, warm_start: Potential | None = None) -> ReconstructionResult:
    result = reconstruct_from_gap_map(target, config, warm_start)
    if not result.converged:
        raise ConvergenceError(
            f"gap-map inversion did not converge: residual {result.residual_norm:.3e} after {result.iterations} iterations",
            result,
        )
    return result
