"""Drude-Lorentz permittivity models and derived band-structure quantities.

All frequencies are in units of the reference frequency (the transverse
resonance for dielectrics, the plasma frequency for metals).  The permittivity
is a sum of damped-oscillator resonances

    eps(w) = 1 + sum_a  wP_a^2 / (wT_a^2 - w^2 - i w gamma_a),

which covers dielectric (wT > 0) and metallic (wT = 0) matter.  Every term is
strictly absorbing (gamma > 0), so Im eps > 0 for all w > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError


@dataclass(frozen=True)
class ResonanceTerm:
    """One oscillator resonance: transverse frequency, coupling, linewidth."""

    omega_t: float
    omega_p: float
    gamma: float

    def __post_init__(self):
        if self.omega_t < 0:
            raise DomainError(f"omega_t must be >= 0, got {self.omega_t}")
        if self.omega_p <= 0:
            raise DomainError(f"omega_p must be > 0, got {self.omega_p}")
        if self.gamma <= 0:
            raise DomainError(
                f"gamma must be > 0 (absorbing medium), got {self.gamma}"
            )

    @property
    def is_metallic(self) -> bool:
        return self.omega_t == 0.0


@dataclass(frozen=True)
class DrudeLorentzMedium:
    """A medium defined by one or more resonance terms."""

    terms: tuple[ResonanceTerm, ...]

    def __post_init__(self):
        if len(self.terms) == 0:
            raise DomainError("a medium needs at least one resonance term")
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def single(cls, omega_t: float, omega_p: float, gamma: float) -> "DrudeLorentzMedium":
        return cls((ResonanceTerm(omega_t, omega_p, gamma),))

    def with_gamma(self, gamma: float) -> "DrudeLorentzMedium":
        """Copy of a single-resonance medium with the linewidth replaced."""
        if len(self.terms) != 1:
            raise DomainError("with_gamma requires a single-resonance medium")
        t = self.terms[0]
        return DrudeLorentzMedium.single(t.omega_t, t.omega_p, gamma)


@dataclass(frozen=True)
class ComplexIndex:
    """Refractive index on the passive branch (n_R >= 0, n_I >= 0)."""

    n_r: float
    n_i: float

    @property
    def value(self) -> complex:
        return complex(self.n_r, self.n_i)


def permittivity(medium: DrudeLorentzMedium, omega: float) -> complex:
    """Complex permittivity eps(omega) of a Drude-Lorentz medium.

    Raises DomainError for omega <= 0; the model is evaluated on the positive
    frequency axis only.
    """
    if omega <= 0:
        raise DomainError(f"permittivity requires omega > 0, got {omega}")
    eps = 1.0 + 0.0j
    for t in medium.terms:
        eps += t.omega_p**2 / (t.omega_t**2 - omega**2 - 1j * omega * t.gamma)
    return eps


def refractive_index(eps: complex) -> ComplexIndex:
    """Refractive index n = n_R + i n_I with the passive branch fixed.

    Uses the explicit real/imaginary split

        n_{R,I} = sqrt( ( sqrt(eps_R^2 + eps_I^2) +(-) eps_R ) / 2 )

    instead of a generic complex square root, which avoids branch flips when
    eps_R crosses zero inside a band gap.
    """
    eps = complex(eps)
    if eps.imag < 0:
        raise DomainError(f"non-passive permittivity (Im eps < 0): {eps}")
    mod = math.hypot(eps.real, eps.imag)
    n_r = math.sqrt(max(0.5 * (mod + eps.real), 0.0))
    n_i = math.sqrt(max(0.5 * (mod - eps.real), 0.0))
    return ComplexIndex(n_r, n_i)


def medium_index(medium: DrudeLorentzMedium, omega: float) -> ComplexIndex:
    return refractive_index(permittivity(medium, omega))


def band_edges(term: ResonanceTerm) -> tuple[float, float]:
    """Band-gap edges (omega_T, omega_L) with omega_L = sqrt(wT^2 + wP^2).

    In the lossless limit Re eps < 0 strictly inside this interval; for a
    metal (wT = 0) the gap is (0, omega_P).
    """
    return term.omega_t, math.hypot(term.omega_t, term.omega_p)


def sg_wave_bound(term: ResonanceTerm) -> float:
    """Upper frequency bound for surface-guided waves.

    Surface-guided waves need eps_R < -1, which for one resonance means
    omega < sqrt(wT^2 + wP^2/2).
    """
    return math.sqrt(term.omega_t**2 + 0.5 * term.omega_p**2)
