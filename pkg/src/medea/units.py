"""Reduced-unit conventions.

Internally c = 1: frequencies are multiples of the reference frequency
omega_ref and lengths are multiples of c/omega_ref, so k = omega.  User-facing
configuration expresses lengths in reference wavelengths
lambda_ref = 2 pi c / omega_ref; the conversion is a factor 2 pi.

Rates are reported as ratios to the free-space rate Gamma_0, which is a user
supplied scale (the dipole moment never appears explicitly).
"""

import math

TWO_PI = 2.0 * math.pi


def from_wavelengths(x: float) -> float:
    """Length in lambda_ref units -> internal units (c/omega_ref)."""
    return TWO_PI * x


def to_wavelengths(x: float) -> float:
    return x / TWO_PI
