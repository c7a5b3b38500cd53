"""Weak-coupling decay observables: normalized rates, line shifts, emission
patterns and emitted-energy fractions for each geometry.

All rates are ratios to the free-space rate Gamma_0 and all shifts are in
units of Gamma_0.  In reduced units the conversion from a projected
reflection Green value g = d^ . G^R . d^ (equal points) is

    Gamma/Gamma_0    = 1 + (6 pi / omega_A) Im g
    delta_w/Gamma_0  =     (3 pi / omega_A) Re g   (resonant term)

fixed by the vacuum value Im G^V = omega/(6 pi) I.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SeriesTruncationError
from .media import DrudeLorentzMedium, permittivity, refractive_index
from .quadrature import QuadSpec, integrate_interval
from .greens.planar import planar_near_field_green, planar_reflection_green
from .greens.sphere import (
    LayeredSphere,
    TruncationPolicy,
    cavity_reflection_c1n,
    converged_sum,
    default_l_cutoff,
    scattering_b_series,
    three_layer_closed,
)
from . import specfun as sf


@dataclass(frozen=True)
class EmitterConfig:
    """Atom position, dipole orientation, transition frequency, rate scale.

    position is geometry specific: height z for the planar half-space,
    radial coordinate r_A for spheres (internal units, c/omega_ref).
    orientation is 'z'/'x'/'radial'/'tangential' or a unit 3-vector.
    gamma0 is the free-space rate in omega_ref units.
    """

    position: float
    orientation: object
    omega_a: float
    gamma0: float = 1.0

    def __post_init__(self):
        if self.omega_a <= 0 or self.gamma0 <= 0:
            raise DomainError("omega_a and gamma0 must be positive")


@dataclass(frozen=True)
class DecayReport:
    rate_ratio: float
    shift_ratio: float = 0.0
    energy_fraction: float | None = None
    meta: dict = field(default_factory=dict)


def axis_fraction(orientation) -> float:
    """Squared projection of the dipole unit vector on the symmetry axis.

    The axis is z for the planar geometry and the (z-aligned) radial
    direction for an atom on a sphere's polar axis.
    """
    if isinstance(orientation, str):
        key = orientation.lower()
        if key in ("z", "radial", "perp"):
            return 1.0
        if key in ("x", "y", "tangential", "par", "parallel"):
            return 0.0
        raise DomainError(f"unknown orientation {orientation!r}")
    v = np.asarray(orientation, dtype=float)
    norm = np.linalg.norm(v)
    if not math.isclose(norm, 1.0, rel_tol=1e-6):
        raise DomainError("orientation vector must be a unit vector")
    return float((v[2] / norm) ** 2)


def rate_from_green(im_green_reflection: float, omega_a: float) -> float:
    """Gamma/Gamma_0 from the projected equal-point Im G^R."""
    if not math.isfinite(im_green_reflection):
        raise DomainError("Im G^R must be finite")
    return 1.0 + 6.0 * math.pi / omega_a * im_green_reflection


def shift_from_green(re_green_at_omega_a: float, omega_a: float,
                     im_green_sampler=None, omega_max: float = 20.0,
                     spec: QuadSpec = QuadSpec(rel_tol=1e-6, abs_tol=1e-12)):
    """Line shift in units of Gamma_0.

    Returns (resonant, broadband): the resonant term (3 pi / w_A) Re G^R and,
    when a sampler for Im G^R(omega) is given, the broadband integral

        (3 / w_A) int_0^wmax (w/w_A)^2 Im g(w) / (w + w_A) dw .

    The full shift is resonant - broadband, but the broadband part is small
    and only weakly frequency dependent, so it is reported separately and the
    headline value is the resonant term alone.
    """
    resonant = 3.0 * math.pi / omega_a * re_green_at_omega_a
    broadband = 0.0
    if im_green_sampler is not None:
        def f(w):
            return complex((w / omega_a) ** 2
                           * im_green_sampler(w) / (w + omega_a))
        val, _ = integrate_interval(f, 1e-9, omega_max, spec)
        tail = abs(f(omega_max)) * omega_max   # assumes ~1/w^2 falloff
        if tail > spec.rel_tol * max(abs(val), 1.0) + spec.abs_tol:
            warnings.warn("broadband shift tail beyond omega_max is not "
                          f"negligible ({tail:.2e})")
        broadband = 3.0 / omega_a * val.real
    return resonant, broadband


# ----------------------------------------------------------------------
# real (Onsager) cavity in bulk material
# ----------------------------------------------------------------------

def rate_real_cavity(medium: DrudeLorentzMedium | None, omega_a: float,
                     radius: float) -> DecayReport:
    """Decay of an atom centered in an empty sphere inside a medium,
    nonperturbative in the cavity radius."""
    c1n = cavity_reflection_c1n(medium, omega_a, radius)
    return DecayReport(
        rate_ratio=1.0 + c1n.real,
        shift_ratio=-0.5 * c1n.imag,
        meta={"c1n": c1n, "kt": radius * omega_a},
    )


def rate_real_cavity_expansion(medium: DrudeLorentzMedium, omega_a: float,
                               radius: float) -> float:
    """Small-cavity expansion of the rate (local-field correction form with
    the absorption-induced radius-dependent terms)."""
    eps = permittivity(medium, omega_a)
    n = refractive_index(eps)
    kt = radius * omega_a
    pre = abs(3 * eps / (2 * eps + 1)) ** 2
    aeps = abs(eps) ** 2
    a2e1 = abs(2 * eps + 1) ** 2
    bracket = (n.n_r + eps.imag / aeps * (
        (1.0 / kt) ** 3
        + (28 * aeps + 16 * eps.real + 1) / (5 * a2e1) * (1.0 / kt)
        - 2.0 / a2e1 * (2 * n.n_i * aeps + n.n_i * eps.real + n.n_r * eps.imag)))
    return pre * bracket


# ----------------------------------------------------------------------
# planar half-space
# ----------------------------------------------------------------------

def rate_planar(medium: DrudeLorentzMedium | None, omega_a: float, z: float,
                orientation="z", spec: QuadSpec = QuadSpec(),
                include_broadband: bool = False) -> DecayReport:
    """Rate and shift above a half-space from the full Sommerfeld integrals."""
    if z <= 0:
        raise DomainError("z must be > 0")
    eps = 1.0 + 0j if medium is None else permittivity(medium, omega_a)
    dz2 = axis_fraction(orientation)
    g = planar_reflection_green(eps, omega_a, z, spec)
    proj = g.projected(dz2)
    broadband = 0.0
    if include_broadband and medium is not None:
        coarse = QuadSpec(rel_tol=1e-4, abs_tol=1e-10, max_subdivisions=200)

        def sampler(w):
            return planar_reflection_green(
                permittivity(medium, w), w, z, coarse).projected(dz2).imag

        _, broadband = shift_from_green(proj.real, omega_a, sampler,
                                        spec=coarse)
    resonant, _ = shift_from_green(proj.real, omega_a)
    return DecayReport(
        rate_ratio=rate_from_green(proj.imag, omega_a),
        shift_ratio=resonant,
        meta={"g_xx": g.g_xx, "g_zz": g.g_zz, "broadband": broadband,
              "kz": omega_a * z},
    )


def rate_planar_near_field(medium: DrudeLorentzMedium | None, omega_a: float,
                           z: float, orientation="z") -> DecayReport:
    """Asymptotic small-kz rate and shift; meta carries the leading z^-3
    terms of both."""
    if z <= 0:
        raise DomainError("z must be > 0")
    eps = 1.0 + 0j if medium is None else permittivity(medium, omega_a)
    dz2 = axis_fraction(orientation)
    g = planar_near_field_green(eps, omega_a, z)
    proj = g.projected(dz2)
    kz = omega_a * z
    a1 = abs(eps + 1.0) ** 2
    leading_rate = (3.0 / 8.0) * (1 + dz2) * kz**-3 * eps.imag / a1
    leading_shift = (3.0 / 32.0) * (1 + dz2) * kz**-3 * (abs(eps) ** 2 - 1) / a1
    return DecayReport(
        rate_ratio=rate_from_green(proj.imag, omega_a),
        shift_ratio=3.0 * math.pi / omega_a * proj.real,
        meta={"leading_rate": leading_rate, "leading_shift": leading_shift,
              "kz": kz},
    )


# ----------------------------------------------------------------------
# spherical microresonator (atom at the center of a three-layer structure)
# ----------------------------------------------------------------------

def rate_spherical_resonator(medium: DrudeLorentzMedium, omega_a: float,
                             r1: float, r2: float,
                             thick_wall_warn: float = 1e-3) -> DecayReport:
    """Atom at the center of a cavity of radius r2 surrounded by a material
    wall out to r1 and vacuum beyond.

    The rate comes from the general three-layer coefficient (l = 1); the
    thick-wall tangent form and the emitted-energy fraction W/W0 are reported
    alongside.  A wall too thin for the tangent form triggers a warning, not
    a failure.
    """
    if not r1 > r2 > 0:
        raise DomainError("need r1 > r2 > 0")
    geom = LayeredSphere((r1, r2), (None, medium, None))
    closed = three_layer_closed(geom, omega_a, 1)
    a_n, c_n = closed["N"]
    rate = 1.0 + c_n.real
    n = refractive_index(permittivity(medium, omega_a))
    # tangent form, written with sin/cos to stay finite at tan poles
    s, c = math.sin(omega_a * r2), math.cos(omega_a * r2)
    nn = n.value
    rate_tan = ((nn * c - 1j * s) / (c - 1j * nn * s)).real
    thick_factor = math.exp(-n.n_i * (r1 - r2) * omega_a)
    if thick_factor > thick_wall_warn:
        warnings.warn(
            f"wall attenuation factor {thick_factor:.2e} exceeds "
            f"{thick_wall_warn:.0e}; the tangent form is unreliable here"
        )
    energy = abs(a_n) ** 2 / rate if rate > 0 else None
    return DecayReport(
        rate_ratio=rate,
        shift_ratio=-0.5 * c_n.imag,
        energy_fraction=energy,
        meta={"rate_tangent_form": rate_tan, "thick_wall_factor": thick_factor,
              "a1n": a_n, "c1n": c_n},
    )


# ----------------------------------------------------------------------
# microsphere (two-layer), atom outside on the polar axis
# ----------------------------------------------------------------------

def _compose_terms(mant: np.ndarray, expo: np.ndarray) -> np.ndarray:
    """Elementwise scaled -> complex with underflow to zero, overflow raising."""
    out = np.zeros(len(mant), dtype=complex)
    nz = mant != 0
    mag = np.where(nz, expo + np.log2(np.maximum(np.abs(mant), 1e-300)), -np.inf)
    if np.any(mag > 1000):
        lbad = int(np.argmax(mag))
        raise sf.SpecialFunctionOverflow(
            f"partial-wave term overflow at l={lbad}", l=lbad)
    ok = nz & (mag > -1070)
    e = np.clip(expo, -2100, 2100).astype(np.int64)
    out[ok] = (np.ldexp(mant.real[ok], e[ok])
               + 1j * np.ldexp(mant.imag[ok], e[ok]))
    return out


class _SphereSeries:
    """Shared per-l machinery for the exterior microsphere sums."""

    def __init__(self, geom: LayeredSphere, omega: float, r_atom: float,
                 policy: TruncationPolicy, cap: int | None = None):
        if geom.n_layers != 2:
            raise DomainError("microsphere operations need a two-layer sphere")
        if geom.media[0] is not None:
            raise DomainError("the atom must sit in a vacuum outer layer")
        if r_atom <= geom.radii[0]:
            raise DomainError("the atom must be outside the sphere (r_A > R)")
        self.geom = geom
        self.omega = omega
        self.r_atom = r_atom
        self.policy = policy
        self.x_a = omega * r_atom
        lcap = policy.l_cap if cap is None else cap
        (self.bm_m, self.bm_e), (self.bn_m, self.bn_e) = \
            scattering_b_series(geom, omega, lcap)
        self.jm, self.je = sf.sph_jn_scaled(lcap, self.x_a)
        self.hm, self.he = sf.sph_hn_scaled(lcap, self.x_a)
        self.jdm, self.jde = sf.riccati_scaled("j", lcap, self.x_a,
                                               self.jm, self.je)
        self.hdm, self.hde = sf.riccati_scaled("h", lcap, self.x_a,
                                               self.hm, self.he)
        self.ls = np.arange(0, lcap + 1)
        x_in = abs(geom.wavenumber(2, omega)) * geom.radii[0]
        self.l_min = max(default_l_cutoff(self.x_a),
                         default_l_cutoff(x_in))

    def b_h_sq(self, which: str) -> np.ndarray:
        """B_l * h_l(x_A)^2 (which='n'|'m'), composed per l."""
        bm, be = (self.bn_m, self.bn_e) if which == "n" else (self.bm_m, self.bm_e)
        mant = bm * self.hm * self.hm
        expo = be + self.he + self.he
        return _compose_terms(mant, expo)

    def b_hd_sq(self) -> np.ndarray:
        mant = self.bn_m * self.hdm * self.hdm
        expo = self.bn_e + self.hde + self.hde
        return _compose_terms(mant, expo)

    def j_plus_bh(self, which: str = "n"):
        """(j_l + B_l h_l)(x_A) and the same with Riccati derivatives,
        as scaled pairs (mant, exp) arrays."""
        bm, be = (self.bn_m, self.bn_e) if which == "n" else (self.bm_m, self.bm_e)
        out_m = np.empty(len(bm), dtype=complex)
        out_e = np.empty(len(bm), dtype=np.int64)
        outd_m = np.empty(len(bm), dtype=complex)
        outd_e = np.empty(len(bm), dtype=np.int64)
        for l in range(len(bm)):
            t = sf._sc_mul(bm[l], int(be[l]), self.hm[l], int(self.he[l]))
            out_m[l], out_e[l] = sf._sc_add(self.jm[l], int(self.je[l]), *t)
            td = sf._sc_mul(bm[l], int(be[l]), self.hdm[l], int(self.hde[l]))
            outd_m[l], outd_e[l] = sf._sc_add(self.jdm[l], int(self.jde[l]), *td)
        return (out_m, out_e), (outd_m, outd_e)


def _with_series(geom: LayeredSphere, omega: float, r_atom: float,
                 policy: TruncationPolicy, fn):
    """Run fn(series), growing the partial-wave order cap geometrically until
    the sums converge (quasi-static tails near a touching atom can need a few
    hundred to a few thousand orders) or the policy cap is breached."""
    x_a = omega * r_atom
    x_in = abs(geom.wavenumber(2, omega)) * geom.radii[0]
    l_min = max(default_l_cutoff(x_a), default_l_cutoff(x_in))
    # quasi-static absorption tails decay like exp(-2 l ln(r_A/R)); size the
    # first attempt to reach ~1e-10 dynamic range in one build
    l_qs = l_min + int(12.0 / max(math.log(r_atom / geom.radii[0]), 1e-6))
    cap = min(policy.l_cap, max(2 * l_min, 128, l_qs))
    while True:
        ser = _SphereSeries(geom, omega, r_atom, policy, cap=cap)
        try:
            return fn(ser)
        except SeriesTruncationError:
            if cap >= policy.l_cap:
                raise
            cap = min(policy.l_cap, 2 * cap)


def rate_microsphere(geom: LayeredSphere, omega_a: float, r_atom: float,
                     orientation="radial",
                     policy: TruncationPolicy = TruncationPolicy()) -> DecayReport:
    """Decay rate of an atom outside a sphere.

    Radial dipoles couple only to N waves; tangential dipoles to both M and
    N.  An arbitrary unit vector is decomposed as
    Gamma = d_r^2 Gamma_radial + (1 - d_r^2) Gamma_tangential.
    """
    dr2 = axis_fraction(orientation)

    def run(ser):
        ls = ser.ls[1:]
        meta = {"x_atom": ser.x_a, "l_min": ser.l_min}
        rate = 0.0
        shift = 0.0
        if dr2 > 0:
            series = 1.5 * ls * (ls + 1) * (2 * ls + 1) * \
                (ser.b_h_sq("n")[1:] / ser.x_a**2)
            val, l_used = converged_sum(series.real, ser.l_min, ser.policy)
            sval, _ = converged_sum(-0.5 * series.imag, ser.l_min, ser.policy)
            rate += dr2 * (1.0 + val)
            shift += dr2 * sval
            meta["l_used_radial"] = l_used
            meta["l_dominant"] = 1 + int(np.argmax(np.abs(series.real[:l_used])))
        if dr2 < 1:
            series = 0.75 * (2 * ls + 1) * \
                (ser.b_h_sq("m")[1:] + ser.b_hd_sq()[1:])
            val, l_used = converged_sum(series.real, ser.l_min, ser.policy)
            sval, _ = converged_sum(-0.5 * series.imag, ser.l_min, ser.policy)
            rate += (1 - dr2) * (1.0 + val)
            shift += (1 - dr2) * sval
            meta["l_used_tangential"] = l_used
        return DecayReport(rate_ratio=rate, shift_ratio=shift, meta=meta)

    return _with_series(geom, omega_a, r_atom, policy, run)


def shift_microsphere(geom: LayeredSphere, omega_a: float, r_atom: float,
                      orientation="radial",
                      policy: TruncationPolicy = TruncationPolicy()) -> float:
    """Sphere-assisted line shift (units of Gamma_0, resonant term).

    The same partial-wave products as the rate with Re -> Im and the sign and
    factor-1/2 of the shift normalization.
    """
    return rate_microsphere(geom, omega_a, r_atom, orientation,
                            policy).shift_ratio


def single_resonance_shift(omega_a: float, omega_c: float,
                           delta_omega_c: float, gamma_c: float) -> float:
    """Closed-form shift near one isolated Lorentzian field resonance:
    extrema of size -+ Gamma_C/4 at omega_A = omega_C +- Delta_omega_C."""
    d = omega_a - omega_c
    return -0.5 * gamma_c * delta_omega_c * d / (d * d + delta_omega_c**2)


def emitted_energy_fraction_microsphere(
        geom: LayeredSphere, omega_a: float, r_atom: float,
        policy: TruncationPolicy = TruncationPolicy()) -> float:
    """Fraction W/W0 of the transition energy that escapes to the far field
    (radially oriented dipole only; 1 - W/W0 is absorbed by the sphere)."""

    def run(ser):
        ls = ser.ls[1:]
        (gm, ge), _ = ser.j_plus_bh("n")
        mod_sq = _compose_terms(gm * gm.conjugate(), ge + ge).real
        terms_rate = 1.5 * ls * (ls + 1) * (2 * ls + 1) * \
            (ser.b_h_sq("n")[1:].real / ser.x_a**2)
        rate_val, l_used = converged_sum(terms_rate, ser.l_min, ser.policy)
        gamma_ratio = 1.0 + rate_val
        terms_w = 1.5 * ls * (ls + 1) * (2 * ls + 1) / ser.x_a**2 * mod_sq[1:]
        # reuse the rate's converged order; |j + B h|^2 shares its tail
        w_val = float(np.sum(terms_w[:l_used]))
        return w_val / gamma_ratio

    return _with_series(geom, omega_a, r_atom, policy, run)


def field_amplitude(geom: LayeredSphere, omega: float, r_atom: float,
                    orientation, r: float, theta: float, phi: float = 0.0,
                    policy: TruncationPolicy = TruncationPolicy()) -> np.ndarray:
    """Normalized complex field amplitude F at (r, theta, phi) of a dipole on
    the polar axis at r_atom, in the local spherical basis.

    Returns (F_r, F_theta) for a radial dipole and (F_r, F_theta, F_phi) for
    a tangential one (dipole in the xz-plane).  Normalization: the prefactor
    (k^3 d / 4 pi eps0) is set to 1, so |F|^2 is the emission pattern.
    """
    if r < r_atom:
        raise DomainError("field point must satisfy r >= r_atom")
    which = "radial" if axis_fraction(orientation) > 0.5 else "tangential"

    def run(ser):
        lcap = len(ser.ls) - 1
        x_r = omega * r
        hm_r, he_r = sf.sph_hn_scaled(lcap, x_r)
        hdm_r, hde_r = sf.riccati_scaled("h", lcap, x_r, hm_r, he_r)
        x = math.cos(theta)
        p = sf.legendre_p_all(lcap, x)
        p1 = sf.legendre_p1_all(lcap, theta)        # sin(t) P_l'
        pi_l = sf.legendre_pi_all(lcap, theta)      # P_l'
        ls = np.arange(0, lcap + 1)
        if which == "radial":
            (gm, ge), _ = ser.j_plus_bh("n")
            rad = _compose_terms(gm * hm_r / (ser.x_a * x_r), ge + he_r)
            the = _compose_terms(gm * hdm_r / ser.x_a, ge + hde_r)
            f_r = (2 * ls + 1) * ls * (ls + 1) * rad * p
            f_t = -(2 * ls + 1) * the * p1
            comp = np.stack([f_r, f_t])
        else:
            (_gnm, _gne), (gndm, gnde) = ser.j_plus_bh("n")
            (gmm, gme), _ = ser.j_plus_bh("m")
            bn_t = _compose_terms(gndm * hm_r / (ser.x_a * x_r), gnde + he_r)
            bn_d = _compose_terms(gndm * hdm_r / ser.x_a, gnde + hde_r)
            bm_v = _compose_terms(gmm * hm_r, gme + he_r)
            p_tilde = ls * (ls + 1) * p - x * pi_l
            pref = np.divide(2 * ls + 1, ls * (ls + 1),
                             out=np.zeros(lcap + 1), where=ls > 0)
            f_r = math.cos(phi) * pref * ls * (ls + 1) * bn_t * p1
            f_t = math.cos(phi) * pref * (bm_v * pi_l + bn_d * p_tilde)
            f_p = -math.sin(phi) * pref * (bm_v * p_tilde + bn_d * pi_l)
            comp = np.stack([f_r, f_t, f_p])
        norms = np.abs(comp).max(axis=0)
        csums = np.cumsum(comp, axis=1)
        run_mag = np.abs(csums).max(axis=0)
        k = ser.policy.consecutive
        for idx in range(max(ser.l_min, k), lcap + 1):
            thresh = max(ser.policy.rel_tol * run_mag[idx],
                         ser.policy.abs_floor)
            if np.all(norms[idx - k + 1: idx + 1] < thresh):
                return csums[:, idx]
        raise SeriesTruncationError("emission pattern sum not converged",
                                    l_cap=lcap)

    return _with_series(geom, omega, r_atom, policy, run)


def emission_pattern(geom: LayeredSphere, omega_a: float, r_atom: float,
                     orientation, r: float, theta: float, phi: float = 0.0,
                     policy: TruncationPolicy = TruncationPolicy()) -> float:
    """Far-field emission pattern |F|^2 at (r, theta, phi), normalized so the
    prefactor (k_A^3 d / 4 pi eps0)^2 = 1."""
    amp = field_amplitude(geom, omega_a, r_atom, orientation, r, theta, phi,
                          policy)
    return float(np.sum(np.abs(amp) ** 2))
