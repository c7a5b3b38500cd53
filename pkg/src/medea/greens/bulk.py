"""Green tensor of an unbounded homogeneous medium.

Reduced units throughout: c = 1, so the wavenumber inside the medium is
q = n(omega) * omega with the passive root n.  Lengths carry units of
c / omega_ref.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..media import refractive_index


@dataclass(frozen=True)
class GreenSample:
    """A 3x3 complex Green tensor sample and the frame its indices live in."""

    tensor: np.ndarray
    frame: str = "cartesian"

    def project(self, d_out, d_in) -> complex:
        """d_out . G . d_in for unit vectors given in the tensor's frame."""
        return complex(np.asarray(d_out) @ self.tensor @ np.asarray(d_in))


def _wavenumber(eps: complex, omega: float) -> complex:
    n = refractive_index(eps)
    return n.value * omega


def bulk_green(eps: complex, omega: float, r, r_prime) -> GreenSample:
    """G(r, r', omega) of the bulk medium for r != r' (Cartesian frame)."""
    r = np.asarray(r, dtype=float)
    rp = np.asarray(r_prime, dtype=float)
    rho_vec = r - rp
    rho = np.linalg.norm(rho_vec)
    if rho == 0:
        raise DomainError(
            "bulk_green is singular at coincident points; "
            "use bulk_im_green_coincident for the equal-point imaginary part"
        )
    q = _wavenumber(eps, omega)
    u = q * rho
    unit = rho_vec / rho
    proj = np.outer(unit, unit)
    eye = np.eye(3)
    pref = np.exp(1j * u) / (4 * np.pi * rho)
    tensor = pref * ((1 + 1j / u - 1 / u**2) * eye
                     - (1 + 3j / u - 3 / u**2) * proj)
    return GreenSample(tensor)


def bulk_green_parts(eps: complex, omega: float, r, r_prime):
    """(longitudinal, transverse) decomposition for r != r'.

    The delta-function term of the longitudinal part is omitted (it only
    contributes at coincident points); the two parts sum to bulk_green.
    """
    r = np.asarray(r, dtype=float)
    rp = np.asarray(r_prime, dtype=float)
    rho_vec = r - rp
    rho = np.linalg.norm(rho_vec)
    if rho == 0:
        raise DomainError("decomposition undefined at coincident points")
    q = _wavenumber(eps, omega)
    u = q * rho
    unit = rho_vec / rho
    proj = np.outer(unit, unit)
    eye = np.eye(3)
    near = (eye - 3 * proj) / rho**3
    longitudinal = -near / (4 * np.pi * q**2)
    transverse = (near / (4 * np.pi * q**2)
                  + (q / (4 * np.pi)) * np.exp(1j * u)
                  * ((1 / u + 1j / u**2 - 1 / u**3) * eye
                     - (1 / u + 3j / u**2 - 3 / u**3) * proj))
    return GreenSample(longitudinal), GreenSample(transverse)


def bulk_im_green_coincident(eps: complex, omega: float) -> float:
    """Coefficient of the identity in Im G_transverse(r, r, omega).

    Equals omega * n_R(omega) / (6 pi); for vacuum this is the free-space
    value omega / (6 pi) that fixes the Gamma_0 normalization.
    """
    n = refractive_index(eps)
    return omega * n.n_r / (6 * np.pi)
