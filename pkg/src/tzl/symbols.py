"""Symbols (classical observables) on CP^1.

Radial symbols are described by their value as a function of the chart radius
rho = |z|, and also as a function of the area coordinate
u = rho^2 / (1 + rho^2) = Vol(D(0, rho)), which is the natural variable for the
spectral integrals: for radial f the Toeplitz eigenvalues are Beta(j+1, p-j+1)
averages of f in u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def area_to_radius(u):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        return np.sqrt(u / (1.0 - u))


def radius_to_area(rho):
    rho = np.asarray(rho, dtype=float)
    with np.errstate(invalid="ignore"):
        out = rho * rho / (1.0 + rho * rho)
    return np.where(np.isinf(rho), 1.0, out)


class Symbol:
    """Base class. Subclasses set ``radial`` and implement the evaluators."""

    radial = True

    def __call__(self, z):
        """Value at complex chart points (array in, array out)."""
        return self.of_radius(np.abs(np.asarray(z)))

    def of_radius(self, rho):
        return self.of_area(radius_to_area(rho))

    def of_area(self, u):
        raise NotImplementedError

    def area_breakpoints(self) -> list[float]:
        """Points of (0, 1) where f, as a function of u, is not smooth."""
        return []

    def sup(self) -> float:
        raise NotImplementedError

    def text(self) -> str:
        raise NotImplementedError

    def is_nontrivial(self) -> bool:
        return self.sup() > 0


@dataclass(frozen=True)
class Constant(Symbol):
    c: float = 1.0

    def __post_init__(self):
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise ValueError("constant symbol must be finite and >= 0")

    def of_area(self, u):
        return np.full(np.shape(u), float(self.c))

    def sup(self):
        return float(self.c)

    def text(self):
        return f"const:{self.c:g}"


@dataclass(frozen=True)
class PowerVanish(Symbol):
    """f_k(z) = |z|^{2k} / (1 + |z|^2)^k, which is exactly u^k."""

    k: int = 1

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("PowerVanish order must be an integer >= 1")

    def of_area(self, u):
        return np.asarray(u, dtype=float) ** self.k

    def sup(self):
        return 1.0

    def text(self):
        return f"power:{self.k}"


@dataclass(frozen=True)
class ExpInverse(Symbol):
    """f(z) = exp(-1/|z|^2), i.e. exp(-(1 - u)/u) in the area coordinate."""

    def of_area(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(u > 0, np.exp(-(1.0 - u) / np.where(u > 0, u, 1.0)), 0.0)

    def sup(self):
        return 1.0

    def text(self):
        return "expinv"


@dataclass(frozen=True)
class DiscIndicator(Symbol):
    """Indicator of the open chart disc |z| < r."""

    r: float = 1.0

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError("disc radius must be finite and positive")

    @property
    def volume(self) -> float:
        return self.r * self.r / (1.0 + self.r * self.r)

    def of_area(self, u):
        return (np.asarray(u, dtype=float) < self.volume).astype(float)

    def of_radius(self, rho):
        return (np.asarray(rho, dtype=float) < self.r).astype(float)

    def area_breakpoints(self):
        return [self.volume]

    def sup(self):
        return 1.0

    def text(self):
        return f"disc:{self.r:g}"


@dataclass(frozen=True)
class Scaled(Symbol):
    """A nonnegative multiple of another radial symbol."""

    base: Symbol
    factor: float

    def __post_init__(self):
        if not (self.factor >= 0 and math.isfinite(self.factor)):
            raise ValueError("scale factor must be finite and >= 0")
        if not self.base.radial:
            raise ValueError("Scaled wraps radial symbols only")

    def of_area(self, u):
        return self.factor * self.base.of_area(u)

    def of_radius(self, rho):
        return self.factor * self.base.of_radius(rho)

    def area_breakpoints(self):
        return self.base.area_breakpoints()

    def sup(self):
        return self.factor * self.base.sup()

    def text(self):
        return f"scaled:{self.factor:g}*{self.base.text()}"


@dataclass(frozen=True)
class RadialTabulated(Symbol):
    """Piecewise-linear radial profile through (radius, value) samples.

    Constant extrapolation outside the tabulated radii.
    """

    radii: tuple
    values: tuple

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size < 1:
            raise ValueError("radii and values must be 1-D of equal length")
        if np.any(np.diff(r) <= 0) or r[0] < 0:
            raise ValueError("tabulated radii must be nonnegative and strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("tabulated values must be finite and >= 0")
        object.__setattr__(self, "radii", tuple(float(x) for x in r))
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    def of_radius(self, rho):
        return np.interp(np.asarray(rho, dtype=float), self.radii, self.values)

    def of_area(self, u):
        return self.of_radius(area_to_radius(u))

    def area_breakpoints(self):
        return [float(radius_to_area(r)) for r in self.radii if r > 0]

    def sup(self):
        return max(self.values)

    def text(self):
        return "tab:" + ";".join(f"{r!r},{v!r}" for r, v in zip(self.radii, self.values))


@dataclass(frozen=True)
class GeneralGrid(Symbol):
    """A non-radial symbol, sampled on the 2-D chart quadrature grid.

    ``func`` maps complex chart coordinates to nonnegative values;
    ``radial_breakpoints`` lists chart radii where it jumps, so the radial
    panels of the grid can be aligned with them.
    """

    func: Callable = field(compare=False)
    sup_value: float = 1.0
    radial_breakpoints: tuple = ()
    name: str = "general"

    radial = False

    def __call__(self, z):
        return np.asarray(self.func(np.asarray(z)), dtype=float)

    def of_area(self, u):
        raise TypeError("non-radial symbol has no area profile")

    def area_breakpoints(self):
        return [float(radius_to_area(r)) for r in self.radial_breakpoints]

    def sup(self):
        return float(self.sup_value)

    def text(self):
        return self.name


def parse_symbol(text: str) -> Symbol:
    """Parse the command-line symbol forms ``const:c``, ``power:k``, ``expinv``, ``disc:r``.

    ``tab:r0,v0;r1,v1;...`` gives a tabulated radial profile.
    """
    s = text.strip()
    head, _, arg = s.partition(":")
    head = head.lower()
    try:
        if head == "const":
            return Constant(float(arg) if arg else 1.0)
        if head == "power":
            k = float(arg)
            if k != int(k):
                raise ValueError
            return PowerVanish(int(k))
        if head == "expinv" and not arg:
            return ExpInverse()
        if head == "disc":
            return DiscIndicator(float(arg))
        if head == "tab":
            pairs = [item.split(",") for item in arg.split(";") if item]
            return RadialTabulated(tuple(float(a) for a, _ in pairs), tuple(float(b) for _, b in pairs))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"malformed symbol {text!r}: {exc}") from None
    raise ValueError(f"unknown symbol {text!r}")
