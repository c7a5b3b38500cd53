"""Spherical Bessel/Hankel functions of complex argument and Legendre helpers.

The multilayer scattering coefficients need j_l, h1_l and the derivative
combination [z f_l(z)]'/z for orders up to a few thousand at arguments whose
imaginary part can reach several hundred (thick absorbing layers).  Raw
function values then span hundreds of decades, so everything internal is kept
in a scaled form

    value = mantissa * 2**exponent        (mantissa complex, exponent int)

and only physically bounded combinations are composed back into floats.

Algorithm choices:
  * j_l: Miller-type downward recurrence normalized against the closed forms
    j_0/j_1 (upward recurrence on j is unstable for l > |z|).
  * y_l: upward recurrence from closed-form seeds (stable; y is dominant).
  * h1_l: j + i*y for nearly real arguments.  For Im z > 4 that sum cancels
    catastrophically (|h| ~ e^{-Im z} while |j|,|y| ~ e^{+Im z}), so the exact
    terminating series of h1_l is used instead, continued upward in l past the
    turning point where h is again the dominant solution.
  * Associated Legendre functions exclude the Condon-Shortley phase
    (P_l^m > 0 as x -> 1^- ), the convention the multipole expansions here
    assume; sign errors in this phase invert TE/TM interference terms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SpecialFunctionOverflow

# Renormalization band for scaled mantissas; kept narrow enough that triple
# products of mantissas stay inside the double range.
_BIG = 2.0**256
_SMALL = 2.0**-256
_SHIFT = 256

# Above this imaginary part, h = j + i*y is replaced by the terminating series.
_H_SERIES_IM = 4.0

# Composing a scaled value with |value| above 2**_COMPOSE_MAX raises.
_COMPOSE_MAX = 1000


# ----------------------------------------------------------------------
# scaled arithmetic on (mantissa, exponent) pairs
# ----------------------------------------------------------------------

def _renorm(m: complex, e: int) -> tuple[complex, int]:
    am = abs(m)
    if am == 0.0:
        return 0.0 + 0.0j, 0
    while am >= _BIG:
        m *= _SMALL
        e += _SHIFT
        am = abs(m)
    while am < _SMALL:
        m *= _BIG
        e -= _SHIFT
        am = abs(m)
    return m, e


def _sc_add(m1: complex, e1: int, m2: complex, e2: int) -> tuple[complex, int]:
    if m1 == 0.0:
        return m2, e2
    if m2 == 0.0:
        return m1, e1
    if e1 < e2:
        m1, e1, m2, e2 = m2, e2, m1, e1
    d = e2 - e1
    if d < -2000:
        return m1, e1
    return _renorm(m1 + m2 * math.ldexp(1.0, d), e1)


def _sc_mul(m1: complex, e1: int, m2: complex, e2: int) -> tuple[complex, int]:
    return _renorm(m1 * m2, e1 + e2)


def compose(m: complex, e: int, *, context: str = "", l: int | None = None):
    """Scaled value -> complex float; underflow becomes 0, overflow raises."""
    if m == 0.0:
        return 0.0 + 0.0j
    mag = e + math.log2(abs(m))
    if mag > _COMPOSE_MAX:
        raise SpecialFunctionOverflow(
            f"value 2**{mag:.0f} exceeds floating range ({context})", l=l
        )
    if mag < -1070:
        return 0.0 + 0.0j
    return complex(math.ldexp(m.real, e), math.ldexp(m.imag, e))


def _exp_iz_scaled(z: complex) -> tuple[complex, int]:
    """e^{iz} as a scaled pair, valid for any imaginary part."""
    log2mag = -z.imag / math.log(2.0)
    e = int(math.floor(log2mag))
    m = cmath.exp(1j * z.real) * math.ldexp(1.0, 0) * 2.0 ** (log2mag - e)
    return _renorm(m, e)


def _sincos_scaled(z: complex):
    """Scaled (sin z, cos z) robust against huge |Im z|."""
    ep_m, ep_e = _exp_iz_scaled(z)            # e^{iz}
    em_m, em_e = _exp_iz_scaled(-z)           # e^{-iz}
    sm, se = _sc_add(ep_m, ep_e, -em_m, em_e)
    sm, se = _sc_mul(sm, se, -0.5j, 0)
    cm, ce = _sc_add(ep_m, ep_e, em_m, em_e)
    cm, ce = _sc_mul(cm, ce, 0.5 + 0j, 0)
    return (sm, se), (cm, ce)


# ----------------------------------------------------------------------
# scaled spherical Bessel arrays over l = 0..lmax at one complex argument
# ----------------------------------------------------------------------

def _miller_start(lmax: int, az: float) -> int:
    base = max(lmax, int(az))
    return base + 26 + int(1.5 * math.sqrt(max(base, 1)))


def sph_jn_scaled(lmax: int, z: complex):
    """Scaled j_0..j_lmax by downward recurrence. z must be nonzero."""
    z = complex(z)
    if z == 0:
        raise DomainError("sph_jn_scaled requires z != 0 (use the z=0 limit)")
    L = _miller_start(lmax, abs(z))
    inv_z = 1.0 / z
    fm = np.empty(lmax + 1, dtype=complex)
    fe = np.empty(lmax + 1, dtype=np.int64)
    # unnormalized downward sweep
    fp_m, fp_e = 0.0 + 0.0j, 0            # f_{L+1}
    fc_m, fc_e = 1.0 + 0.0j, 0            # f_L
    for l in range(L, -1, -1):
        nm, ne = _sc_add(*_sc_mul((2 * l + 3) * inv_z, 0, fc_m, fc_e),
                         -fp_m, fp_e)     # f_{l} = (2l+3)/z f_{l+1} - f_{l+2}
        fp_m, fp_e = fc_m, fc_e
        fc_m, fc_e = nm, ne
        if l <= lmax:
            fm[l], fe[l] = fc_m, fc_e
    # normalize against the larger of the closed forms j0, j1
    (sn, sne), (cs, cse) = _sincos_scaled(z)
    j0 = _sc_mul(sn, sne, inv_z, 0)
    t1 = _sc_mul(sn, sne, inv_z * inv_z, 0)
    t2 = _sc_mul(cs, cse, -inv_z, 0)
    j1 = _sc_add(*t1, *t2)

    def _log2(m, e):
        return -math.inf if m == 0 else e + math.log2(abs(m))

    if lmax >= 1 and _log2(*j1) > _log2(*j0):
        anchor_true, anchor_raw = j1, (fm[1], int(fe[1]))
    else:
        anchor_true, anchor_raw = j0, (fm[0], int(fe[0]))
    if anchor_raw[0] == 0:
        raise DomainError(f"Miller normalization failed at z={z}")
    am, ae = _renorm(anchor_true[0] / anchor_raw[0],
                     anchor_true[1] - anchor_raw[1])
    for l in range(lmax + 1):
        fm[l], fe[l] = _sc_mul(fm[l], int(fe[l]), am, ae)
    return fm, fe


def _upward_scaled(lmax, z, s0, s1, lstart=1):
    """Generic scaled upward sweep f_{l+1} = (2l+1)/z f_l - f_{l-1}.

    s0, s1 are scaled seeds for orders lstart-1 and lstart; returns arrays
    covering lstart-1 .. lmax (caller slices back into place).
    """
    inv_z = 1.0 / z
    n = lmax - lstart + 2
    fm = np.empty(n, dtype=complex)
    fe = np.empty(n, dtype=np.int64)
    fm[0], fe[0] = s0
    fm[1], fe[1] = s1
    pm, pe = s0
    cm, ce = s1
    for i, l in enumerate(range(lstart, lmax)):
        nm, ne = _sc_add(*_sc_mul((2 * l + 1) * inv_z, 0, cm, ce), -pm, pe)
        pm, pe = cm, ce
        cm, ce = nm, ne
        fm[i + 2], fe[i + 2] = cm, ce
    return fm, fe


def sph_yn_scaled(lmax: int, z: complex):
    """Scaled y_0..y_lmax by the (stable) upward recurrence."""
    z = complex(z)
    if z == 0:
        raise DomainError("y_l has a pole at z = 0")
    inv_z = 1.0 / z
    (sn, sne), (cs, cse) = _sincos_scaled(z)
    y0 = _sc_mul(cs, cse, -inv_z, 0)
    t1 = _sc_mul(cs, cse, -inv_z * inv_z, 0)
    t2 = _sc_mul(sn, sne, -inv_z, 0)
    y1 = _sc_add(*t1, *t2)
    if lmax == 0:
        return np.array([y0[0]]), np.array([y0[1]], dtype=np.int64)
    fm, fe = _upward_scaled(lmax, z, y0, y1)
    return fm, fe


def _h_series_one(l: int, z: complex):
    """Exact terminating series for h1_l(z), scaled; also returns digits lost.

    h1_l(z) = (-i)^{l+1} (e^{iz}/z) sum_{m=0}^{l} (l+m)!/(m!(l-m)!) (-2iz)^{-m}
    """
    w = 1.0 / (-2j * z)
    c = 1.0 + 0.0j
    s = c
    sabs = abs(c)
    ce = 0
    se = 0
    for m in range(l):
        c *= (l + m + 1) * (l - m) * w / (m + 1)
        c, ce = _renorm(c, ce)
        s, se = _sc_add(s, se, c, ce)
        sabs = max(sabs, abs(compose_mag(c, ce)))
    # digits lost to cancellation inside the sum
    smag = compose_mag(s, se)
    lost = 0.0 if smag == 0 else max(0.0, math.log10(sabs / smag)) if sabs > 0 else 0.0
    em, ee = _exp_iz_scaled(z)
    pm, pe = _sc_mul(em, ee, (-1j) ** ((l + 1) % 4) / z, 0)
    hm, he = _sc_mul(pm, pe, s, se)
    return (hm, he), lost


def compose_mag(m: complex, e: int) -> float:
    """|scaled value| as a float of potentially huge dynamic range (log-safe)."""
    if m == 0:
        return 0.0
    lg = e + math.log2(abs(m))
    if lg > 1020:
        return math.inf
    if lg < -1070:
        return 0.0
    return abs(m) * math.ldexp(1.0, e)


def _h_series_mp(l: int, z: complex, dps: int) -> tuple[complex, int]:
    """High-precision fallback for the terminating h series (rare regime)."""
    import mpmath as mp

    with mp.workdps(dps):
        zz = mp.mpc(z)
        s = mp.mpc(1)
        c = mp.mpc(1)
        for m in range(l):
            c = c * (l + m + 1) * (l - m) / ((m + 1) * (-2j * zz))
            s += c
        val = (-1j) ** (l + 1) * mp.exp(1j * zz) / zz * s
        me = mp.mag(val)
        mant = complex(val / mp.mpf(2) ** me)
    return _renorm(mant, int(me))


def sph_hn_scaled(lmax: int, z: complex):
    """Scaled h1_0..h1_lmax, stable for any Im z >= 0."""
    z = complex(z)
    if z == 0:
        raise DomainError("h1_l has a pole at z = 0")
    if z.imag <= _H_SERIES_IM:
        jm, je = sph_jn_scaled(lmax, z)
        ym, ye = sph_yn_scaled(lmax, z)
        hm = np.empty(lmax + 1, dtype=complex)
        he = np.empty(lmax + 1, dtype=np.int64)
        for l in range(lmax + 1):
            hm[l], he[l] = _sc_add(jm[l], int(je[l]),
                                   1j * ym[l], int(ye[l]))
        return hm, he
    lser = min(lmax, int(1.4 * abs(z)) + 20)
    hm = np.empty(lmax + 1, dtype=complex)
    he = np.empty(lmax + 1, dtype=np.int64)
    for l in range(lser + 1):
        (m, e), lost = _h_series_one(l, z)
        if lost > 4.0:
            m, e = _h_series_mp(l, z, dps=30 + int(2 * lost))
        hm[l], he[l] = m, e
    if lmax > lser:
        fm, fe = _upward_scaled(lmax, z,
                                (hm[lser - 1], int(he[lser - 1])),
                                (hm[lser], int(he[lser])), lstart=lser)
        hm[lser - 1:], he[lser - 1:] = fm, fe
    return hm, he


def riccati_scaled(kind: str, lmax: int, z: complex, fm=None, fe=None):
    """Scaled [z f_l(z)]'/z for l = 0..lmax via f_{l-1} - l f_l / z.

    kind is 'j' or 'h'; pass the matching value arrays to avoid recomputing.
    The l = 0 case uses the closed forms f_{-1}: j_{-1} = cos z / z and
    h1_{-1} = e^{iz}/z.
    """
    z = complex(z)
    if fm is None:
        fm, fe = (sph_jn_scaled if kind == "j" else sph_hn_scaled)(lmax, z)
    inv_z = 1.0 / z
    dm = np.empty(lmax + 1, dtype=complex)
    de = np.empty(lmax + 1, dtype=np.int64)
    if kind == "j":
        (_sn, _sne), (cs, cse) = _sincos_scaled(z)
        fm1 = _sc_mul(cs, cse, inv_z, 0)
    else:
        em, ee = _exp_iz_scaled(z)
        fm1 = _sc_mul(em, ee, inv_z, 0)
    dm[0], de[0] = fm1
    for l in range(1, lmax + 1):
        t = _sc_mul(-l * inv_z, 0, fm[l], int(fe[l]))
        dm[l], de[l] = _sc_add(fm[l - 1], int(fe[l - 1]), *t)
    return dm, de


# ----------------------------------------------------------------------
# public scalar API
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RiccatiTerms:
    """j, h1 and their Riccati derivative combinations at one argument."""

    j: complex
    h: complex
    jd: complex   # [z j_l(z)]'/z
    hd: complex   # [z h1_l(z)]'/z


def sph_bessel_j(l: int, z: complex) -> complex:
    """Spherical Bessel function j_l(z) for complex z."""
    if l < 0:
        raise DomainError("l must be >= 0")
    z = complex(z)
    if z == 0:
        return 1.0 + 0.0j if l == 0 else 0.0 + 0.0j
    jm, je = sph_jn_scaled(l, z)
    return compose(jm[l], int(je[l]), context=f"j_{l}({z})", l=l)


def sph_hankel1(l: int, z: complex) -> complex:
    """Spherical Hankel function of the first kind h1_l(z)."""
    if l < 0:
        raise DomainError("l must be >= 0")
    z = complex(z)
    if z == 0:
        raise DomainError("h1_l(z) has a pole at z = 0")
    hm, he = sph_hn_scaled(l, z)
    return compose(hm[l], int(he[l]), context=f"h_{l}({z})", l=l)


def riccati_terms(l: int, z: complex) -> RiccatiTerms:
    """j_l, h1_l and the [z f]'/z combinations, all at the same argument z."""
    if l < 0:
        raise DomainError("l must be >= 0")
    z = complex(z)
    if z == 0:
        raise DomainError("riccati_terms requires z != 0")
    jm, je = sph_jn_scaled(l, z)
    hm, he = sph_hn_scaled(l, z)
    jdm, jde = riccati_scaled("j", l, z, jm, je)
    hdm, hde = riccati_scaled("h", l, z, hm, he)
    ctx = f"riccati l={l}, z={z}"
    return RiccatiTerms(
        j=compose(jm[l], int(je[l]), context=ctx, l=l),
        h=compose(hm[l], int(he[l]), context=ctx, l=l),
        jd=compose(jdm[l], int(jde[l]), context=ctx, l=l),
        hd=compose(hdm[l], int(hde[l]), context=ctx, l=l),
    )


# ----------------------------------------------------------------------
# Legendre functions (Condon-Shortley phase EXCLUDED)
# ----------------------------------------------------------------------

def legendre_p_all(lmax: int, x: float) -> np.ndarray:
    """P_0(x) .. P_lmax(x)."""
    if abs(x) > 1 + 1e-12:
        raise DomainError(f"|x| <= 1 required, got {x}")
    p = np.empty(lmax + 1)
    p[0] = 1.0
    if lmax >= 1:
        p[1] = x
    for l in range(1, lmax):
        p[l + 1] = ((2 * l + 1) * x * p[l] - l * p[l - 1]) / (l + 1)
    return p


def legendre_dp_all(lmax: int, x: float) -> np.ndarray:
    """P'_0(x) .. P'_lmax(x), finite also at x = +-1.

    Computed by the derivative recurrence P'_{l+1} = P'_{l-1} + (2l+1) P_l,
    which has no 1/(1-x^2) factor.
    """
    p = legendre_p_all(lmax, x)
    dp = np.empty(lmax + 1)
    dp[0] = 0.0
    if lmax >= 1:
        dp[1] = 1.0
    for l in range(1, lmax):
        dp[l + 1] = dp[l - 1] + (2 * l + 1) * p[l]
    return dp


def _double_factorial(n: int) -> float:
    out = 1.0
    k = n
    while k > 1:
        out *= k
        k -= 2
    return out


def assoc_legendre(l: int, m: int, x: float) -> float:
    """Unnormalized P_l^m(x) without the Condon-Shortley phase.

    Convention: P_l^m(x) = (1-x^2)^{m/2} d^m P_l / dx^m, positive as x -> 1^-
    for every m.
    """
    if not (0 <= m <= l):
        raise DomainError(f"need 0 <= m <= l, got l={l}, m={m}")
    if abs(x) > 1 + 1e-12:
        raise DomainError(f"|x| <= 1 required, got {x}")
    x = min(1.0, max(-1.0, x))
    sx = math.sqrt(max(0.0, 1.0 - x * x))
    pmm = _double_factorial(2 * m - 1) * sx**m if m > 0 else 1.0
    if math.isinf(pmm):
        raise SpecialFunctionOverflow("P_m^m overflow", l=l)
    if l == m:
        return pmm
    pm1 = x * (2 * m + 1) * pmm
    if l == m + 1:
        return pm1
    for ll in range(m + 2, l + 1):
        pm2, pmm = pmm, pm1
        pm1 = ((2 * ll - 1) * x * pmm - (ll + m - 1) * pm2) / (ll - m)
        if math.isinf(pm1):
            raise SpecialFunctionOverflow("P_l^m overflow", l=ll)
    return pm1


def assoc_legendre_theta_derivative(l: int, m: int, theta: float) -> float:
    """d P_l^m(cos theta) / d theta (Condon-Shortley phase excluded).

    Away from the poles this is [l cos(t) P_l^m - (l+m) P_{l-1}^m] / sin(t);
    at theta = 0, pi the exact limits are used (nonzero only for m = 1).
    """
    if not (0 <= m <= l):
        raise DomainError(f"need 0 <= m <= l, got l={l}, m={m}")
    x = math.cos(theta)
    s = math.sin(theta)
    if abs(s) < 1e-9:
        if m != 1:
            return 0.0
        lim = l * (l + 1) / 2.0
        return lim if x > 0 else (-1.0) ** (l + m + 1) * lim
    plm = assoc_legendre(l, m, x)
    pl1m = assoc_legendre(l - 1, m, x) if l - 1 >= m else 0.0
    return (l * x * plm - (l + m) * pl1m) / s


def assoc_legendre_over_sin(l: int, m: int, theta: float) -> float:
    """m P_l^m(cos theta) / sin(theta), finite at theta -> 0, pi.

    Uses a dedicated recurrence on q_l = P_l^m / sin(theta) whose seeds carry
    sin^{m-1}, so no pole division ever happens.  Zero for m = 0.
    """
    if not (0 <= m <= l):
        raise DomainError(f"need 0 <= m <= l, got l={l}, m={m}")
    if m == 0:
        return 0.0
    x = math.cos(theta)
    s = math.sin(theta)
    qmm = _double_factorial(2 * m - 1) * s ** (m - 1)
    if l == m:
        return m * qmm
    qm1 = x * (2 * m + 1) * qmm
    if l == m + 1:
        return m * qm1
    for ll in range(m + 2, l + 1):
        qm2, qmm = qmm, qm1
        qm1 = ((2 * ll - 1) * x * qmm - (ll + m - 1) * qm2) / (ll - m)
    return m * qm1


def legendre_p1_all(lmax: int, theta: float) -> np.ndarray:
    """P_l^1(cos theta) = sin(theta) P'_l(cos theta) for l = 0..lmax."""
    x = math.cos(theta)
    s = math.sin(theta)
    out = np.empty(lmax + 1)
    out[0] = 0.0
    if lmax >= 1:
        out[1] = s
    if lmax >= 2:
        out[2] = 3.0 * x * s
    for l in range(3, lmax + 1):
        out[l] = ((2 * l - 1) * x * out[l - 1] - l * out[l - 2]) / (l - 1)
    return out


def legendre_pi_all(lmax: int, theta: float) -> np.ndarray:
    """P'_l(cos theta) = P_l^1 / sin(theta) for l = 0..lmax, pole-safe."""
    x = math.cos(theta)
    out = np.empty(lmax + 1)
    out[0] = 0.0
    if lmax >= 1:
        out[1] = 1.0
    if lmax >= 2:
        out[2] = 3.0 * x
    for l in range(3, lmax + 1):
        out[l] = ((2 * l - 1) * x * out[l - 1] - l * out[l - 2]) / (l - 1)
    return out
