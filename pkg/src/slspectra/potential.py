"""Zero-mean potentials on [0, 1] stored as truncated Fourier series.

A potential is

    q(x) = sum_{k=1..M} a_k cos(2 pi k x) + b_k sin(2 pi k x),

so the mean over [0, 1] vanishes by construction.  Grid samples are a
derived cache; the coefficients are the canonical data (they are also the
unknowns of the inverse solver).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

DEFAULT_GRID_POINTS = 4096


class PotentialError(ValueError):
    """Invalid potential data or evaluation outside the domain."""


def _as_coeffs(values, name):
    arr = np.asarray(values if values is not None else [], dtype=float).ravel()
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise PotentialError(f"non-finite {name} coefficient at index {int(bad[0])}")
    return arr


@dataclass(frozen=True, eq=False)
class Potential:
    """Real zero-mean potential given by its cosine/sine coefficients.

    ``cos_coeffs[k-1]`` multiplies cos(2 pi k x); shorter sequences are
    padded with zeros so both arrays have the common Fourier order M.
    """

    cos_coeffs: np.ndarray = ()
    sin_coeffs: np.ndarray = ()
    grid_points: int = field(default=DEFAULT_GRID_POINTS, compare=False)

    length = 1.0

    def __post_init__(self):
        a = _as_coeffs(self.cos_coeffs, "cos")
        b = _as_coeffs(self.sin_coeffs, "sin")
        m = max(a.size, b.size)
        a = np.pad(a, (0, m - a.size))
        b = np.pad(b, (0, m - b.size))
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "cos_coeffs", a)
        object.__setattr__(self, "sin_coeffs", b)

    @property
    def order(self) -> int:
        return int(self.cos_coeffs.size)

    @property
    def modes(self) -> np.ndarray:
        return np.arange(1, self.order + 1)

    def __call__(self, x):
        """Vectorised evaluation without domain checks (periodic in x)."""
        x = np.asarray(x, dtype=float)
        if self.order == 0:
            return np.zeros_like(x)
        arg = 2.0 * np.pi * np.multiply.outer(x, self.modes)
        return np.cos(arg) @ self.cos_coeffs + np.sin(arg) @ self.sin_coeffs

    def _key(self):
        nz = np.flatnonzero((self.cos_coeffs != 0) | (self.sin_coeffs != 0))
        m = int(nz[-1]) + 1 if nz.size else 0
        # + 0.0 folds -0.0 into 0.0
        return (self.cos_coeffs[:m] + 0.0).tobytes(), (self.sin_coeffs[:m] + 0.0).tobytes()

    def __eq__(self, other):
        if not isinstance(other, Potential):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __add__(self, other: Potential) -> Potential:
        m = max(self.order, other.order)
        s, o = self.padded(m), other.padded(m)
        return Potential(s.cos_coeffs + o.cos_coeffs, s.sin_coeffs + o.sin_coeffs)

    def __sub__(self, other: Potential) -> Potential:
        return self + other.scaled(-1.0)

    def scaled(self, factor: float) -> Potential:
        return Potential(factor * self.cos_coeffs, factor * self.sin_coeffs)

    def padded(self, order: int) -> Potential:
        """Same potential with the coefficient arrays padded (or trimmed) to ``order``."""
        a = np.zeros(order)
        b = np.zeros(order)
        k = min(order, self.order)
        a[:k] = self.cos_coeffs[:k]
        b[:k] = self.sin_coeffs[:k]
        return Potential(a, b, self.grid_points)

    def as_vector(self, order: int | None = None) -> np.ndarray:
        """Coefficients stacked as (a_1..a_M, b_1..b_M)."""
        p = self if order is None else self.padded(order)
        return np.concatenate([p.cos_coeffs, p.sin_coeffs])

    @classmethod
    def from_vector(cls, c) -> Potential:
        c = np.asarray(c, dtype=float)
        if c.size % 2:
            raise PotentialError("coefficient vector must have even length")
        m = c.size // 2
        return cls(c[:m], c[m:])

    @property
    def sup_bound(self) -> float:
        """Upper bound for max |q| from the coefficients."""
        return float(np.sum(np.hypot(self.cos_coeffs, self.sin_coeffs)))

    @property
    def is_symmetric(self) -> bool:
        return not np.any(self.sin_coeffs)

    @cached_property
    def grid(self) -> np.ndarray:
        """Samples at x_j = j / grid_points, j = 0..grid_points (both ends)."""
        return self(np.linspace(0.0, 1.0, self.grid_points + 1))

    def reflect(self) -> Potential:
        return reflect(self)

    def even_extension(self) -> ExtendedPotential:
        return ExtendedPotential(self)

    def norm(self) -> float:
        return l2_norm(self)

    def __repr__(self):
        return f"Potential(cos={self.cos_coeffs.tolist()}, sin={self.sin_coeffs.tolist()})"


@dataclass(frozen=True)
class ExtendedPotential:
    """Even reflection of ``base`` about x = 1, living on [0, 2]."""

    base: Potential

    length = 2.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.base(np.where(x <= 1.0, x, 2.0 - x))

    @property
    def order(self) -> int:
        return self.base.order

    @property
    def sup_bound(self) -> float:
        return self.base.sup_bound

    def evaluate(self, x: float) -> float:
        if not 0.0 <= x <= 2.0:
            raise PotentialError(f"x = {x} outside [0, 2]")
        return float(self(x))


def potential_from_fourier(cos_coeffs=(), sin_coeffs=()) -> Potential:
    return Potential(cos_coeffs, sin_coeffs)


def zero_potential() -> Potential:
    return Potential([], [])


def evaluate(q: Potential, x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise PotentialError(f"x = {x} outside [0, 1]")
    return float(q(x))


def l2_norm(q: Potential) -> float:
    return math.sqrt(0.5 * float(np.sum(q.cos_coeffs**2 + q.sin_coeffs**2)))


def quadrature_norm_sq(q: Potential, points: int | None = None) -> float:
    """Periodic trapezoid rule for the integral of q^2 over [0, 1]."""
    n = points or q.grid_points
    n = max(n, 2 * q.order + 2)
    return float(np.mean(q(np.arange(n) / n) ** 2))


def reflect(q: Potential) -> Potential:
    """q(1 - x): cosine coefficients kept, sine coefficients negated."""
    return Potential(q.cos_coeffs, -q.sin_coeffs, q.grid_points)


def even_extension(q: Potential) -> ExtendedPotential:
    return ExtendedPotential(q)


def from_grid(values, modes: int) -> tuple[Potential, float]:
    """Project samples at the cell midpoints x_j = (j + 1/2)/n onto ``modes`` Fourier modes.

    The mean is discarded.  Returns the potential and the L2 norm of the
    discarded tail (modes above ``modes``).
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        raise PotentialError("need at least two grid samples")
    bad = np.flatnonzero(~np.isfinite(v))
    if bad.size:
        raise PotentialError(f"non-finite grid value at index {int(bad[0])}")
    n = v.size
    # midpoint sampling shifts every mode by half a cell
    c = np.fft.rfft(v) / n * np.exp(-1j * np.pi * np.arange(n // 2 + 1) / n)
    k_max = (n - 1) // 2
    a = 2.0 * c.real[1 : k_max + 1]
    b = -2.0 * c.imag[1 : k_max + 1]
    keep = min(modes, k_max)
    tail = math.sqrt(0.5 * float(np.sum(a[keep:] ** 2 + b[keep:] ** 2)))
    return Potential(a[:keep], b[:keep]), tail


def random_potential(rng: np.random.Generator, modes: int, norm: float, decay: float = 1.0) -> Potential:
    """Random potential on modes 1..modes with coefficients ~ k^-decay, scaled to ``norm``."""
    k = np.arange(1, modes + 1)
    a = rng.standard_normal(modes) / k**decay
    b = rng.standard_normal(modes) / k**decay
    q = Potential(a, b)
    n0 = l2_norm(q)
    return q.scaled(norm / n0) if n0 > 0 else q


def symmetric_potential(rng: np.random.Generator, modes: int, norm: float) -> Potential:
    q = random_potential(rng, modes, norm)
    q = Potential(q.cos_coeffs, np.zeros(modes))
    n0 = l2_norm(q)
    return q.scaled(norm / n0) if n0 > 0 else q


# JSON potential files: {"fourier": {"cos": [...], "sin": [...]}} or {"grid": {"values": [...]}}

def potential_to_dict(q: Potential) -> dict:
    return {"fourier": {"cos": [float(x) for x in q.cos_coeffs], "sin": [float(x) for x in q.sin_coeffs]}}


def potential_from_dict(data: dict, modes: int = 32) -> Potential:
    if "fourier" in data:
        f = data["fourier"]
        return Potential(f.get("cos", []), f.get("sin", []))
    if "grid" in data:
        q, _ = from_grid(data["grid"]["values"], modes)
        return q
    raise PotentialError("potential JSON needs a 'fourier' or 'grid' entry")


def load_potential(path, modes: int = 32) -> Potential:
    return potential_from_dict(json.loads(Path(path).read_text()), modes)


def save_potential(q: Potential, path) -> None:
    from .jsonio import dumps

    Path(path).write_text(dumps(potential_to_dict(q)) + "\n")
