"""Integration engines: adaptive panels, semi-infinite tails with breakpoints,
principal-value integrals, and a trapezoidal product-integration Volterra
solver of the second kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, QuadratureError, VolterraInstabilityError


@dataclass(frozen=True)
class QuadSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError("tolerances must be positive")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid on [0, t_max] with `steps` intervals."""

    t_max: float
    steps: int

    def __post_init__(self):
        if self.steps < 2 or self.t_max <= 0:
            raise DomainError("TimeGrid needs t_max > 0 and steps >= 2")

    @property
    def h(self) -> float:
        return self.t_max / self.steps

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.steps + 1)


@dataclass(frozen=True)
class AmplitudeTrace:
    """Complex amplitude samples C(t) on a TimeGrid."""

    grid: TimeGrid
    values: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.grid.times()

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.values) ** 2


def integrate_interval(f, a: float, b: float, spec: QuadSpec = QuadSpec()):
    """Adaptive Gauss-Kronrod integral of a complex-valued f over [a, b].

    Returns (value, error_estimate).  Raises QuadratureError when the
    subdivision budget is exhausted above tolerance.
    """
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")

    def _part(g):
        out = quad(g, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                   limit=spec.max_subdivisions, full_output=1)
        if len(out) > 3:
            val, err = out[0], out[1]
            if err > max(spec.abs_tol, spec.rel_tol * abs(val)) * 10:
                raise QuadratureError(
                    f"integral over [{a}, {b}] did not converge: {out[3]}"
                )
            return val, err
        return out[0], out[1]

    re, re_err = _part(lambda x: f(x).real)
    im, im_err = _part(lambda x: f(x).imag)
    return complex(re, im), math.hypot(re_err, im_err)


def integrate_semi_infinite(f, a: float, breakpoints=(), decay_scale: float = 1.0,
                            spec: QuadSpec = QuadSpec()) -> complex:
    """Integral of f over [a, inf) for integrands decaying with a known
    exponential scale beyond the last breakpoint.

    Finite panels [a, b1], ..., [b_{k-1}, b_k] are integrated adaptively; the
    tail is covered by panels of doubling width until the last panel
    contributes less than rel_tol of the running total.
    """
    pts = [a] + sorted(p for p in breakpoints if p > a)
    total = 0.0 + 0.0j
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, _ = integrate_interval(f, lo, hi, spec)
        total += val
    if decay_scale <= 0:
        raise DomainError("decay_scale must be positive")
    lo = pts[-1]
    width = 4.0 / decay_scale
    for _ in range(60):
        val, _ = integrate_interval(f, lo, lo + width, spec)
        total += val
        if abs(val) < max(spec.rel_tol * abs(total), spec.abs_tol):
            return total
        lo += width
        width *= 2.0
    raise QuadratureError("semi-infinite tail failed to converge in 60 panels")


def integrate_principal_value(f, pole: float, a: float, b: float,
                              spec: QuadSpec = QuadSpec()) -> float:
    """PV integral of f(x)/(x - pole) over [a, b] with a < pole < b.

    Uses the subtraction  PV I = int [f(x)-f(pole)]/(x-pole) dx
                                 + f(pole) ln((b-pole)/(pole-a)),
    so the integrand handed to the adaptive rule is smooth at the pole.
    """
    if not (a < pole < b):
        raise DomainError(f"pole {pole} must lie inside ({a}, {b})")
    fp = f(pole)
    scale = min(pole - a, b - pole)

    def g(x):
        d = x - pole
        if abs(d) < 1e-14 * scale:
            # smooth removable point; derivative via a symmetric difference
            eps = 1e-7 * scale
            return (f(pole + eps) - f(pole - eps)) / (2 * eps)
        return (f(x) - fp) / d

    val, _ = integrate_interval(lambda x: complex(g(x)), a, b, spec)
    return val.real + fp * math.log((b - pole) / (pole - a))


def solve_volterra2(kernel, forcing, grid: TimeGrid,
                    bound: float = 10.0) -> AmplitudeTrace:
    """Solve C(t) = g(t) + int_0^t Kbar(t - t') C(t') dt' by trapezoidal
    product integration (second-order accurate in the step size).

    `kernel` maps an array of lags tau >= 0 to complex Kbar(tau); `forcing`
    maps an array of times to g(t) (pass None for g == 1).  The solver raises
    VolterraInstabilityError when |C| exceeds `bound`, which for probability
    amplitudes signals divergence.
    """
    t = grid.times()
    n = grid.steps
    h = grid.h
    k = np.asarray(kernel(t), dtype=complex)          # Kbar on the lag grid
    g = (np.ones(n + 1, dtype=complex) if forcing is None
         else np.asarray(forcing(t), dtype=complex))
    c = np.empty(n + 1, dtype=complex)
    c[0] = g[0]
    denom = 1.0 - 0.5 * h * k[0]
    for j in range(1, n + 1):
        acc = 0.5 * k[j] * c[0]
        if j > 1:
            acc += np.dot(k[j - 1:0:-1], c[1:j])
        c[j] = (g[j] + h * acc) / denom
        if abs(c[j]) > bound:
            raise VolterraInstabilityError(
                f"|C({t[j]:.4g})| = {abs(c[j]):.3g} exceeded bound {bound}"
            )
    return AmplitudeTrace(grid, c)
