"""Fundamental solutions of -f'' + q f = lam f and the discriminant.

theta(0) = 1, theta'(0) = 0 and phi(0) = 0, phi'(0) = 1.  Everything is
evaluated at the right end x = L of the potential's interval (L = 1 for a
``Potential``, L = 2 for its even extension).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import ConfigurationError, NotAnEigenvalueError, SpectralRangeError

BOUNDARY_TAGS = ("DD", "NN", "DN", "ND")


@dataclass(frozen=True)
class IntegratorConfig:
    min_steps: int = 1024  # per unit length
    steps_per_wavelength: int = 12
    lambda_max: float = 4.0e6
    eigen_grid: int = 2048  # grid intervals per unit length for eigenfunctions
    hard_min_steps: int = 16

    def __post_init__(self):
        if self.min_steps < self.hard_min_steps:
            raise ConfigurationError(f"min_steps={self.min_steps} below the minimum {self.hard_min_steps}")


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class FundamentalValues:
    lam: float
    theta1: float
    dtheta1: float
    phi1: float
    dphi1: float
    oscillation_count: int

    @property
    def wronskian(self) -> float:
        return self.theta1 * self.dphi1 - self.dtheta1 * self.phi1

    @property
    def discriminant(self) -> float:
        return 0.5 * (self.dphi1 + self.theta1)


@dataclass(frozen=True)
class GridFunction:
    x: np.ndarray
    values: np.ndarray
    normalized: bool = False

    @property
    def step(self) -> float:
        return float(self.x[1] - self.x[0])

    def integral(self, weights=None) -> float:
        f = self.values if weights is None else self.values * weights
        return float(np.trapezoid(f, self.x))

    def check_normalization(self, tol: float = 1e-8) -> float:
        err = abs(float(np.trapezoid(self.values**2, self.x)) - 1.0)
        if self.normalized and err > tol:
            raise ValueError(f"grid function not normalised: |int f^2 - 1| = {err:.3e}")
        return err


def _check_tag(bc: str) -> str:
    bc = bc.upper()
    if bc not in BOUNDARY_TAGS:
        raise ValueError(f"unknown boundary tag {bc!r}; expected one of {BOUNDARY_TAGS}")
    return bc


def step_count(q, lam_max: float, config: IntegratorConfig = DEFAULT_CONFIG) -> int:
    """Steps over the whole interval: a power of two, uniform accuracy up to ``lam_max``."""
    if abs(lam_max) > config.lambda_max:
        raise SpectralRangeError(f"|lambda| = {abs(lam_max):.4g} exceeds lambda_max = {config.lambda_max:.4g}")
    L = q.length
    need = max(
        config.min_steps * L,
        config.steps_per_wavelength * math.sqrt(max(abs(lam_max), 1.0)) * L / (2 * math.pi),
        32 * q.order * L,
    )
    return 1 << max(4, math.ceil(math.log2(need)))


@lru_cache(maxsize=256)
def _prepared(q, steps: int):
    h = q.length / steps
    x = np.arange(steps) * h
    r = math.sqrt(3.0) / 6.0
    q1 = np.asarray(q(x + h * (0.5 - r)), dtype=float)
    q2 = np.asarray(q(x + h * (0.5 + r)), dtype=float)
    return 0.5 * (q1 + q2), math.sqrt(3.0) * h * h / 12.0 * (q1 - q2), h


@dataclass(frozen=True)
class TransferBatch:
    """Right-end data for a batch of lambdas (arrays aligned with ``lams``)."""

    lams: np.ndarray
    theta: np.ndarray
    dtheta: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    angle_theta: np.ndarray
    angle_phi: np.ndarray
    logscale: np.ndarray
    steps: int

    def target(self, bc: str) -> np.ndarray:
        """Function whose zeros are the eigenvalues of the tagged problem."""
        return {"DD": self.phi, "NN": self.dtheta, "DN": self.dphi, "ND": self.theta}[bc]

    def counts(self, bc: str) -> np.ndarray:
        """Number of eigenvalues of the tagged problem strictly below each lambda."""
        ang = self.angle_phi if bc[0] == "D" else self.angle_theta
        shift = 0.0 if bc[1] == "D" else 0.5
        return np.floor(ang / math.pi + shift).astype(int)

    @property
    def delta(self) -> np.ndarray:
        return 0.5 * (self.theta + self.dphi)

    @property
    def gap_function(self) -> np.ndarray:
        """Delta^2 - 1 written as (theta - phi')^2/4 + theta' phi (uses the Wronskian).

        Free of the cancellation in Delta - (+-1), so tiny gaps stay resolved.
        """
        return 0.25 * (self.theta - self.dphi) ** 2 + self.dtheta * self.phi


def transfer(q, lams, steps: int | None = None, config: IntegratorConfig = DEFAULT_CONFIG) -> TransferBatch:
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if not np.all(np.isfinite(lams)):
        raise ValueError("lambda must be finite")
    if steps is None:
        steps = step_count(q, float(np.max(np.abs(lams))) if lams.size else 1.0, config)
    elif steps < config.hard_min_steps:
        raise ConfigurationError(f"steps={steps} below the minimum {config.hard_min_steps}")
    qbar, kcorr, h = _prepared(q, int(steps))
    out, logscale, angles = _kernels.transfer(qbar, kcorr, h, lams)
    if np.any(logscale > 0):
        if np.any(logscale > 700.0):
            raise SpectralRangeError("fundamental solutions overflow (lambda too negative)")
        out = out * np.exp(logscale)[:, None]
    return TransferBatch(
        lams=lams,
        theta=out[:, 0],
        dtheta=out[:, 1],
        phi=out[:, 2],
        dphi=out[:, 3],
        angle_theta=angles[:, 0],
        angle_phi=angles[:, 1],
        logscale=logscale,
        steps=int(steps),
    )


def counts_only(q, bc: str, lams, steps: int | None = None, config: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Eigenvalue counts below each lambda; safe for very negative lambda (no value overflow)."""
    bc = _check_tag(bc)
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if steps is None:
        steps = step_count(q, float(np.max(np.abs(lams))), config)
    qbar, kcorr, h = _prepared(q, int(steps))
    _, _, angles = _kernels.transfer(qbar, kcorr, h, lams)
    ang = angles[:, 1] if bc[0] == "D" else angles[:, 0]
    return np.floor(ang / math.pi + (0.0 if bc[1] == "D" else 0.5)).astype(int)


def fundamental_at_one(q, lam: float, steps: int | None = None, config: IntegratorConfig = DEFAULT_CONFIG) -> FundamentalValues:
    b = transfer(q, [lam], steps, config)
    return FundamentalValues(
        lam=float(lam),
        theta1=float(b.theta[0]),
        dtheta1=float(b.dtheta[0]),
        phi1=float(b.phi[0]),
        dphi1=float(b.dphi[0]),
        oscillation_count=int(math.floor(b.angle_phi[0] / math.pi)),
    )


def discriminant(q, lam, steps: int | None = None, config: IntegratorConfig = DEFAULT_CONFIG):
    """Delta(lam) = (phi'(L, lam) + theta(L, lam)) / 2; scalar in, scalar out."""
    d = transfer(q, lam, steps, config).delta
    return float(d[0]) if np.ndim(lam) == 0 else d


def discriminant_sweep(q, lam_min: float, lam_max: float, points: int, config: IntegratorConfig = DEFAULT_CONFIG):
    lams = np.linspace(lam_min, lam_max, points)
    return lams, transfer(q, lams, config=config).delta


def eigenfunction(q, bc: str, eigenvalue: float, config: IntegratorConfig = DEFAULT_CONFIG, residual_tol: float = 1e-6) -> GridFunction:
    """Normalised eigenfunction on a uniform grid.

    phi(., lam) for a Dirichlet condition at 0 (sign: y'(0) > 0), theta(., lam)
    for a Neumann condition at 0 (sign: y(0) > 0).
    """
    bc = _check_tag(bc)
    L = q.length
    grid = int(round(config.eigen_grid * L))
    steps = max(step_count(q, eigenvalue, config), grid)
    steps = grid * (-(-steps // grid))
    qbar, kcorr, h = _prepared(q, steps)
    f0, df0 = (0.0, 1.0) if bc[0] == "D" else (1.0, 0.0)
    f, df = _kernels.trajectory(qbar, kcorr, h, float(eigenvalue), f0, df0)
    stride = steps // grid
    x = np.linspace(0.0, L, grid + 1)
    y = f[::stride]
    dy = df[::stride]
    nrm = math.sqrt(float(np.trapezoid(y * y, x)))
    y = y / nrm
    dy = dy / nrm
    if bc[1] == "D":
        resid, scale = abs(y[-1]), float(np.max(np.abs(y)))
    else:
        resid, scale = abs(dy[-1]), float(np.max(np.abs(dy)))
    if resid > residual_tol * max(scale, 1.0):
        raise NotAnEigenvalueError(f"boundary residual {resid:.3e} at x = {L} for {bc} and lambda = {eigenvalue!r}")
    return GridFunction(x=x, values=y, normalized=True)
