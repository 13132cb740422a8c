"""Dickman's rho and the leading-term smooth-number estimate ``x * rho(log x / log y)``."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


class RhoEvaluator:
    """Tabulates rho on a uniform grid over ``[0, u_max]``.

    rho is 1 on ``[0, 1]`` and for ``u > 1`` satisfies ``u rho'(u) = -rho(u - 1)``,
    integrated here as ``rho(u) = rho(k) - int_k^u rho(t - 1) / t dt`` one unit
    interval at a time with the trapezoid rule. The step must divide 1 so the
    delayed values ``rho(t - 1)`` fall on grid points.
    """

    def __init__(self, step: float = 1e-4, u_max: float = 20.0, tolerance: float = 1e-9):
        per_unit = round(1.0 / step)
        if per_unit < 1 or abs(per_unit * step - 1.0) > 1e-12:
            raise ValueError("step must be 1/k for a positive integer k")
        self.per_unit = per_unit
        self.step = 1.0 / per_unit
        self.units = max(1, math.ceil(u_max))
        self.u_max = float(self.units)
        self.tolerance = tolerance
        self.grid = np.linspace(0.0, self.u_max, self.units * per_unit + 1)
        self.values = self._integrate()

    def _integrate(self) -> np.ndarray:
        k, h = self.per_unit, self.step
        vals = np.empty(self.grid.size)
        vals[: k + 1] = 1.0
        for j in range(1, self.units):
            t = self.grid[j * k : (j + 1) * k + 1]
            f = vals[(j - 1) * k : j * k + 1] / t
            increments = 0.5 * h * (f[1:] + f[:-1])
            vals[j * k + 1 : (j + 1) * k + 1] = vals[j * k] - np.cumsum(increments)
        return vals

    def __call__(self, u: float) -> float:
        if u < 0:
            raise ValueError("rho is defined for u >= 0")
        if u <= 1.0:
            return 1.0
        if u > self.u_max:
            raise ValueError(f"u={u} beyond tabulated range {self.u_max}")
        i = min(int(u * self.per_unit), self.grid.size - 2)
        u0 = self.grid[i]
        if u == u0:
            return float(self.values[i])
        # one trapezoid step from the grid point below, delayed value interpolated
        d0 = self.values[i - self.per_unit]
        d1 = self._delayed(u - 1.0)
        return float(self.values[i] - 0.5 * (u - u0) * (d0 / u0 + d1 / u))

    def _delayed(self, v: float) -> float:
        if v <= 1.0:
            return 1.0
        return float(np.interp(v, self.grid, self.values))

    def derivative(self, u: float) -> float:
        """Finite-difference rho' at grid point ``u``.

        Central differences inside unit intervals; at integers, where higher
        derivatives jump, the mean of the two one-sided second-order stencils.
        """
        i = round(u * self.per_unit)
        v, h = self.values, self.step
        if i % self.per_unit:
            return float((v[i + 1] - v[i - 1]) / (2 * h))
        left = (3 * v[i] - 4 * v[i - 1] + v[i - 2]) / (2 * h)
        right = (-3 * v[i] + 4 * v[i + 1] - v[i + 2]) / (2 * h)
        return float(0.5 * (left + right))


_DEFAULT: RhoEvaluator | None = None


def default_evaluator() -> RhoEvaluator:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = RhoEvaluator()
    return _DEFAULT


def rho(u: float, evaluator: RhoEvaluator | None = None) -> float:
    return (evaluator or default_evaluator())(u)


def debruijn_estimate(x: int, y: int, evaluator: RhoEvaluator | None = None) -> float:
    """Leading term ``x * rho(log x / log y)`` of the count of y-smooth numbers up to x."""
    if y < 2:
        raise ValueError("y must be at least 2")
    if x < 1:
        raise ValueError("x must be positive")
    u = math.log(x) / math.log(y)
    return x * rho(u, evaluator)


def smoothness_exponent(epsilon: float) -> float:
    """``u = 1 / (1/4 - epsilon)``."""
    return 1.0 / (0.25 - epsilon)


def predict_c(ab: Fraction | float, epsilon: float, evaluator: RhoEvaluator | None = None) -> float:
    """Diagnostic growth ratio ``exp(2 * ab / rho(1 / (1/4 - epsilon)))``.

    Not used to size the smooth stage; at practical sizes it is astronomically
    large, and ``inf`` is returned once the exponent leaves float range.
    """
    if not 0 < epsilon < 0.125:
        raise ValueError("epsilon must lie in (0, 1/8)")
    if ab < 0:
        raise ValueError("ab must be non-negative")
    exponent = 2.0 * float(ab) / rho(smoothness_exponent(epsilon), evaluator)
    try:
        return math.exp(exponent)
    except OverflowError:
        return math.inf
