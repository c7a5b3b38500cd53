"""Reflection part of the Green tensor above an absorbing half-space.

Geometry: the medium fills z <= 0, the emitter sits in vacuum at height
z > 0.  Only the equal-point diagonal components are needed for rates and
shifts; G_yy = G_xx by symmetry.

The k_parallel integrals have a branch point at k_par = k (beta = 0).  They
are split into a propagating panel [0, k], where the substitution
k_par = k sin(u) removes the 1/beta singularity, and an evanescent panel
[k, inf) parameterized by t = sqrt(k_par^2 - k^2) (so beta = i t and the
integrand decays as e^{-2 t z}; decay scale 2z).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, GuardError
from ..media import refractive_index
from ..quadrature import QuadSpec, integrate_interval, integrate_semi_infinite


@dataclass(frozen=True)
class FresnelPair:
    r_p: complex
    r_s: complex


@dataclass(frozen=True)
class PlanarGreen:
    """Equal-point reflection components; g_yy == g_xx exactly."""

    g_xx: complex
    g_zz: complex

    @property
    def g_yy(self) -> complex:
        return self.g_xx

    def projected(self, d_z_sq: float) -> complex:
        """d . G . d for a unit dipole with squared z-component d_z_sq."""
        return d_z_sq * self.g_zz + (1.0 - d_z_sq) * self.g_xx


def _beta_branch(w: complex) -> complex:
    """sqrt with the Im >= 0 branch (decaying evanescent waves)."""
    b = cmath.sqrt(w)
    if b.imag < 0:
        b = -b
    return b


def fresnel_coefficients(eps: complex, omega: float, k_par: float) -> FresnelPair:
    """Fresnel reflection coefficients for s (TE) and p (TM) polarization.

    r_s = (beta - beta_m)/(beta + beta_m),
    r_p = (eps beta - beta_m)/(eps beta + beta_m),
    with beta = sqrt(k^2 - k_par^2), beta_m = sqrt(eps k^2 - k_par^2),
    both on the Im >= 0 branch.
    """
    if k_par < 0:
        raise DomainError("k_par must be >= 0")
    k = omega
    beta = _beta_branch(complex(k * k - k_par * k_par))
    beta_m = _beta_branch(eps * k * k - k_par * k_par)
    return FresnelPair(
        r_p=(eps * beta - beta_m) / (eps * beta + beta_m),
        r_s=(beta - beta_m) / (beta + beta_m),
    )


def surface_polariton_kpar(eps: complex, omega: float) -> float | None:
    """Real part of the p-pole position k sqrt(eps/(eps+1)), if it lies in the
    evanescent region (Re eps < -1); used as an integration breakpoint."""
    if eps.real >= -1.0:
        return None
    ksp2 = eps / (eps + 1.0) * omega * omega
    if ksp2.real <= omega * omega:
        return None
    return math.sqrt(max(ksp2.real - omega * omega, 0.0))


def planar_reflection_green(eps: complex, omega: float, z: float,
                            spec: QuadSpec = QuadSpec()) -> PlanarGreen:
    """Equal-point reflection Green components by the full Sommerfeld
    integrals (propagating + evanescent split described above)."""
    if z <= 0:
        raise DomainError("the emitter must sit in the vacuum half-space z > 0")
    if eps == 1:
        return PlanarGreen(0j, 0j)
    k = omega

    def _fresnel_of_kpar(k_par):
        return fresnel_coefficients(eps, omega, k_par)

    # propagating panel, k_par = k sin u, u in [0, pi/2]
    def zz_prop(u):
        su, cu = math.sin(u), math.cos(u)
        rp = _fresnel_of_kpar(k * su).r_p
        return (1j * k / (4 * np.pi)) * su**3 * cmath.exp(2j * k * z * cu) * rp

    def xx_prop(u):
        su, cu = math.sin(u), math.cos(u)
        fr = _fresnel_of_kpar(k * su)
        ph = cmath.exp(2j * k * z * cu)
        return (1j * k / (8 * np.pi)) * su * ph * (fr.r_s - cu * cu * fr.r_p)

    zz_p, _ = integrate_interval(zz_prop, 0.0, np.pi / 2, spec)
    xx_p, _ = integrate_interval(xx_prop, 0.0, np.pi / 2, spec)

    # evanescent panel, k_par = sqrt(k^2 + t^2), t in (0, inf)
    def zz_evan(t):
        kp2 = k * k + t * t
        rp = _fresnel_of_kpar(math.sqrt(kp2)).r_p
        return (1.0 / (4 * np.pi * k * k)) * kp2 * math.exp(-2 * t * z) * rp

    def xx_evan(t):
        fr = _fresnel_of_kpar(math.sqrt(k * k + t * t))
        damp = math.exp(-2 * t * z)
        return damp / (8 * np.pi) * (fr.r_s + (t * t / (k * k)) * fr.r_p)

    bps = []
    t_sp = surface_polariton_kpar(eps, omega)
    if t_sp is not None and t_sp > 0:
        bps = [0.5 * t_sp, t_sp, 2.0 * t_sp]
    zz_e = integrate_semi_infinite(zz_evan, 0.0, bps, decay_scale=2 * z, spec=spec)
    xx_e = integrate_semi_infinite(xx_evan, 0.0, bps, decay_scale=2 * z, spec=spec)

    return PlanarGreen(g_xx=xx_p + xx_e, g_zz=zz_p + zz_e)


def planar_near_field_green(eps: complex, omega: float, z: float) -> PlanarGreen:
    """Closed-form small-kz expansion of the reflection components, including
    the constant (i k) terms.  Guarded to kz <= 0.3 where the expansion is
    meaningful."""
    if z <= 0:
        raise DomainError("z must be > 0")
    k = omega
    if k * z > 0.3:
        raise GuardError(f"near-field expansion needs kz <= 0.3, got {k * z:.3g}")
    n = refractive_index(eps).value
    g_zz = ((n**2 - 1) / (n**2 + 1) / (16 * np.pi * k**2 * z**3)
            + (n - 1) ** 2 / (n * (n + 1)) / (8 * np.pi * z)
            + 1j * k / (12 * np.pi) * (n - 1) * (2 * n - 1) / (n * (n + 1)))
    g_xx = (0.5 * g_zz
            - (n**2 - 1) / (n**2 + 1) / (16 * np.pi * z)
            - 1j * k / (3 * np.pi) * (n - 1) / (n + 1))
    return PlanarGreen(g_xx=g_xx, g_zz=g_zz)
