"""Scattering coefficients of spherically layered media.

Layers are enumerated from outward in: layer 1 is the unbounded outer region,
layer N the core; interface f (radius R_f, strictly decreasing) separates
layers f and f+1.  For each angular order l and polarization (M or N waves;
N waves carry the radial field component a radial dipole couples to) the
scattered field in layer f from a source in layer s is described by four
coefficients:

    A: h-type field, j-type source factor      (absent for f = N or s = 1)
    B: h-type field, h-type source factor      (absent for f = N or s = N)
    C: j-type field, j-type source factor      (absent for f = 1 or s = 1)
    D: j-type field, h-type source factor      (absent for f = 1 or s = N)

Two equivalent routes are implemented:

  * sphere_coefficients: a per-layer-normalized boundary-condition linear
    solve.  Robust for thick absorbing layers where raw basis functions span
    hundreds of decades (values are kept in scaled mantissa/exponent form and
    the system is equilibrated before solving).
  * sphere_coefficients_recurrence: the textbook interface-matrix recurrence
    built from reflection/transmission coefficients of each interface.  Used
    for cross-validation; its intermediates can overflow for extreme
    evanescent arguments.

Closed forms for two and three layers are provided as independent checks.
Note the two-layer interior coefficient is C = T_F1 R_P1 / T_P1; this is the
form consistent with the recurrence, with a direct solve of the interface
conditions, and with the small-cavity closed form used by the local-field
correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, SeriesTruncationError, SpecialFunctionOverflow
from ..media import DrudeLorentzMedium, permittivity, refractive_index
from .. import specfun as sf


@dataclass(frozen=True)
class LayeredSphere:
    """Concentric layers, outermost first.

    radii: interface radii R_1 > R_2 > ... > R_{N-1} in units of c/omega_ref.
    media: N entries, None meaning vacuum.
    """

    radii: tuple[float, ...]
    media: tuple[DrudeLorentzMedium | None, ...]

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "media", tuple(self.media))
        if len(self.media) != len(radii) + 1:
            raise DomainError("need exactly one more layer than interfaces")
        if any(r <= 0 for r in radii):
            raise DomainError("radii must be positive")
        if any(a <= b for a, b in zip(radii, radii[1:])):
            raise DomainError("radii must be strictly decreasing (outermost first)")

    @property
    def n_layers(self) -> int:
        return len(self.media)

    def layer_eps(self, i: int, omega: float) -> complex:
        """Permittivity of layer i (1-based)."""
        med = self.media[i - 1]
        return 1.0 + 0.0j if med is None else permittivity(med, omega)

    def wavenumber(self, i: int, omega: float) -> complex:
        return refractive_index(self.layer_eps(i, omega)).value * omega


@dataclass(frozen=True)
class WaveCoefficients:
    a: complex
    b: complex
    c: complex
    d: complex


@dataclass(frozen=True)
class MieCoefficients:
    l: int
    f: int
    s: int
    m: WaveCoefficients
    n: WaveCoefficients


@dataclass(frozen=True)
class TruncationPolicy:
    """Stopping rule for partial-wave sums.

    A sum stops once l exceeds the size-parameter cutoff AND `consecutive`
    successive terms each contribute less than rel_tol of the running sum
    (in magnitude, with abs_floor as an absolute escape for near-zero sums).
    With tail_guard the geometric extrapolation of the remaining tail must
    also stay below rel_tol of the running sum, which matters for the slowly
    decaying quasi-static tails of nearly touching geometries.  Exceeding
    l_cap raises SeriesTruncationError.
    """

    rel_tol: float = 1e-10
    abs_floor: float = 1e-14
    consecutive: int = 3
    l_cap: int = 2000
    tail_guard: bool = False


def default_l_cutoff(x: float) -> int:
    """Size-parameter based minimum order (Wiscombe-style bound)."""
    x = abs(x)
    return int(math.ceil(x + 4.0 * x ** (1.0 / 3.0) + 10.0))


def converged_sum(terms: np.ndarray, l_min: int, policy: TruncationPolicy):
    """Sum terms[l], l = 1..len, under the truncation policy.

    `terms` holds the l-th term at index l-1.  Returns (sum, l_used).
    """
    csum = np.cumsum(terms)
    mags = np.abs(terms)
    run = np.abs(csum)
    k = policy.consecutive
    for idx in range(max(l_min, k) - 1, len(terms)):
        thresh = max(policy.rel_tol * run[idx], policy.abs_floor)
        if not np.all(mags[idx - k + 1: idx + 1] < thresh):
            continue
        if policy.tail_guard and mags[idx] > 0 and mags[idx - k + 1] > 0:
            q = (mags[idx] / mags[idx - k + 1]) ** (1.0 / (k - 1)) \
                if k > 1 else 0.5
            if q < 1.0:
                tail = mags[idx] * q / (1.0 - q)
                if tail > thresh:
                    continue
            else:
                continue
        return csum[idx], idx + 1
    raise SeriesTruncationError(
        f"partial-wave sum not converged at l = {len(terms)}",
        l_cap=len(terms),
        last_term=float(mags[-1]) if len(mags) else None,
    )


# ----------------------------------------------------------------------
# scaled interface machinery
# ----------------------------------------------------------------------

class _LayerTables:
    """Scaled j, h and their Riccati derivatives for every (layer, interface)
    contact pair of a geometry, up to order lmax."""

    def __init__(self, geom: LayeredSphere, omega: float, lmax: int):
        self.geom = geom
        self.omega = omega
        self.lmax = lmax
        self.k = {i: geom.wavenumber(i, omega) for i in range(1, geom.n_layers + 1)}
        self._tab = {}
        for f, R in enumerate(geom.radii, start=1):
            for i in (f, f + 1):
                z = self.k[i] * R
                jm, je = sf.sph_jn_scaled(lmax, z)
                hm, he = sf.sph_hn_scaled(lmax, z)
                jdm, jde = sf.riccati_scaled("j", lmax, z, jm, je)
                hdm, hde = sf.riccati_scaled("h", lmax, z, hm, he)
                self._tab[(i, f)] = {
                    "j": (jm, je), "h": (hm, he), "jd": (jdm, jde), "hd": (hdm, hde),
                }

    def get(self, kind: str, i: int, f: int, l: int):
        m, e = self._tab[(i, f)][kind]
        return m[l], int(e[l])


def _vf_pair(pol: str, tab: _LayerTables, kind: str, i: int, f: int, l: int):
    """Scaled (value, flux) continuity quantities of basis `kind` for layer i
    at interface f: M waves match (f, k [zf]'/z), N waves match ([zf]'/z, k f)."""
    base = tab.get(kind, i, f, l)
    der = tab.get(kind + "d", i, f, l)
    k = tab.k[i]
    if pol == "M":
        return base, sf._sc_mul(der[0], der[1], k, 0)
    return der, sf._sc_mul(base[0], base[1], k, 0)


def _equilibrated_solve(rows, rhs):
    """Solve a small scaled complex system with row/column equilibration.

    rows: list of lists of (mant, exp); rhs: list of (mant, exp).
    Returns solution as a list of (mant, exp).
    """
    n = len(rows)
    mant = np.array([[m for (m, _) in row] for row in rows], dtype=complex)
    expo = np.array([[e for (_, e) in row] for row in rows], dtype=np.int64)
    expo = np.where(mant == 0, np.int64(-(10**9)), expo)
    col = expo.max(axis=0)
    col = np.where(col == -(10**9), 0, col)
    scaled_e = expo - col[None, :]
    row = scaled_e.max(axis=1)
    rhs_m = np.array([m for (m, _) in rhs], dtype=complex)
    rhs_e = np.array([e for (_, e) in rhs], dtype=np.int64)
    row = np.maximum(row, np.where(rhs_m == 0, row, rhs_e))
    a = mant * np.exp2((scaled_e - row[:, None]).astype(float))
    b = rhs_m * np.exp2((rhs_e - row).astype(float) * np.where(rhs_m == 0, 0, 1))
    x = np.linalg.solve(a, b)
    return [sf._renorm(x[j], -int(col[j])) for j in range(n)]


def _solve_column(pol: str, tab: _LayerTables, l: int, s: int, column: str):
    """Normalized boundary-condition solve for one source-factor column.

    column 'J': j-type source factor (coefficients A in h-fields, C in
    j-fields), direct-wave injection h(k_s r) on the inner side of interface
    s-1.  column 'H': h-type source factor (B, D), injection j(k_s r) on the
    outer side of interface s.  Returns (u, w): dicts layer -> scaled pair.
    """
    geom = tab.geom
    N = geom.n_layers
    n_unknown = 2 * (N - 1)
    # unknown ordering: u_1, (u_2, w_2), ..., (u_{N-1}, w_{N-1}), w_N
    index_u = {1: 0}
    index_w = {}
    pos = 1
    for i in range(2, N):
        index_u[i] = pos
        index_w[i] = pos + 1
        pos += 2
    index_w[N] = pos

    zero = (0.0 + 0.0j, 0)
    rows = []
    rhs = []
    for f in range(1, N):
        for quant in (0, 1):  # 0: value continuity, 1: flux continuity
            row = [zero] * n_unknown
            # outer side (layer f): + ; inner side (layer f+1): -
            if f in index_u:
                row[index_u[f]] = _vf_pair(pol, tab, "h", f, f, l)[quant]
            if f in index_w:
                row[index_w[f]] = _vf_pair(pol, tab, "j", f, f, l)[quant]
            if (f + 1) in index_u:
                vm, ve = _vf_pair(pol, tab, "h", f + 1, f, l)[quant]
                row[index_u[f + 1]] = (-vm, ve)
            if (f + 1) in index_w:
                vm, ve = _vf_pair(pol, tab, "j", f + 1, f, l)[quant]
                row[index_w[f + 1]] = (-vm, ve)
            b = zero
            if column == "J" and f + 1 == s:
                # direct wave h(k_s r) on the inner side moves to the rhs
                b = _vf_pair(pol, tab, "h", s, f, l)[quant]
            elif column == "H" and f == s:
                # direct wave j(k_s r) on the outer side
                bm, be = _vf_pair(pol, tab, "j", s, f, l)[quant]
                b = (-bm, be)
            rows.append(row)
            rhs.append(b)
    sol = _equilibrated_solve(rows, rhs)
    u = {i: sol[index_u[i]] for i in index_u}
    w = {i: sol[index_w[i]] for i in index_w}
    u[N] = zero
    w[1] = zero
    return u, w


def _compose_coeff(pair, *, l, layer):
    try:
        return sf.compose(pair[0], pair[1], context=f"layer {layer}", l=l)
    except SpecialFunctionOverflow as exc:
        raise SpecialFunctionOverflow(
            f"scattering coefficient overflow at l={l}, layer={layer}",
            l=l, layer=layer,
        ) from exc


def sphere_coefficients(geom: LayeredSphere, omega: float, l: int,
                        f: int, s: int) -> MieCoefficients:
    """Scattering coefficients (A, B, C, D) for both polarizations.

    f and s are 1-based field and source layer indices; l >= 1.
    """
    N = geom.n_layers
    if not (1 <= f <= N and 1 <= s <= N):
        raise DomainError(f"field/source layers must be in 1..{N}")
    if l < 1:
        raise DomainError("l must be >= 1")
    tab = _LayerTables(geom, omega, l)
    out = {}
    for pol in ("M", "N"):
        uJ, wJ = _solve_column(pol, tab, l, s, "J")
        uH, wH = _solve_column(pol, tab, l, s, "H")
        a = 0j if (f == N or s == 1) else _compose_coeff(uJ[f], l=l, layer=f)
        b = 0j if (f == N or s == N) else _compose_coeff(uH[f], l=l, layer=f)
        c = 0j if (f == 1 or s == 1) else _compose_coeff(wJ[f], l=l, layer=f)
        d = 0j if (f == 1 or s == N) else _compose_coeff(wH[f], l=l, layer=f)
        out[pol] = WaveCoefficients(a, b, c, d)
    return MieCoefficients(l=l, f=f, s=s, m=out["M"], n=out["N"])


# ----------------------------------------------------------------------
# interface reflection/transmission coefficients and the matrix recurrence
# ----------------------------------------------------------------------

def _interface_rt_scaled(pol: str, tab: _LayerTables, l: int, f: int):
    """Scaled (R_P, R_F, T_P, T_F) of interface f.

    Index pattern (layer f outer, f+1 inner; all functions at R_f):
      M: R_P = (k2 H2' H1 - k1 H1' H2) / (k2 J1 H2' - k1 J1' H2), etc.
      N: primed and unprimed swap roles.
    """
    k1, k2 = tab.k[f], tab.k[f + 1]
    J1 = tab.get("j", f, f, l)
    H1 = tab.get("h", f, f, l)
    J1d = tab.get("jd", f, f, l)
    H1d = tab.get("hd", f, f, l)
    J2 = tab.get("j", f + 1, f, l)
    H2 = tab.get("h", f + 1, f, l)
    J2d = tab.get("jd", f + 1, f, l)
    H2d = tab.get("hd", f + 1, f, l)

    def mul(k, a, b):
        return sf._sc_mul(*sf._sc_mul(a[0], a[1], b[0], b[1]), k, 0)

    def comb(k_a, a1, a2, k_b, b1, b2):
        return sf._sc_add(*mul(k_a, a1, a2), *mul(-k_b, b1, b2))

    if pol == "M":
        den_p = comb(k2, J1, H2d, k1, J1d, H2)
        den_f = comb(k2, J2d, H1, k1, J2, H1d)
        num_rp = comb(k2, H2d, H1, k1, H1d, H2)
        num_rf = comb(k2, J2d, J1, k1, J1d, J2)
        num_tp = comb(k2, J2, H2d, k2, J2d, H2)
        num_tf = comb(k2, J2d, H2, k2, J2, H2d)
    else:
        den_p = comb(k2, J1d, H2, k1, J1, H2d)
        den_f = comb(k2, J2, H1d, k1, J2d, H1)
        num_rp = comb(k2, H2, H1d, k1, H1, H2d)
        num_rf = comb(k2, J2, J1d, k1, J1, J2d)
        num_tp = comb(k2, J2d, H2, k2, J2, H2d)
        num_tf = comb(k2, J2, H2d, k2, J2d, H2)

    def ratio(num, den):
        if den[0] == 0:
            raise DomainError(f"degenerate interface {f} at l={l}")
        return sf._renorm(num[0] / den[0], num[1] - den[1])

    return (ratio(num_rp, den_p), ratio(num_rf, den_f),
            ratio(num_tp, den_p), ratio(num_tf, den_f))


def interface_coefficients(pol: str, l: int, k_outer: complex, k_inner: complex,
                           radius: float):
    """Plain-complex (R_P, R_F, T_P, T_F) of a single interface."""
    geom = LayeredSphere((radius,), (None, None))
    tab = _LayerTables.__new__(_LayerTables)
    tab.geom = geom
    tab.omega = 0.0
    tab.lmax = l
    tab.k = {1: k_outer, 2: k_inner}
    tab._tab = {}
    for i in (1, 2):
        z = tab.k[i] * radius
        jm, je = sf.sph_jn_scaled(l, z)
        hm, he = sf.sph_hn_scaled(l, z)
        jdm, jde = sf.riccati_scaled("j", l, z, jm, je)
        hdm, hde = sf.riccati_scaled("h", l, z, hm, he)
        tab._tab[(i, 1)] = {"j": (jm, je), "h": (hm, he),
                            "jd": (jdm, jde), "hd": (hdm, hde)}
    rp, rf, tp, tf = _interface_rt_scaled(pol, tab, l, 1)
    return tuple(sf.compose(m, e, context=f"interface R/T l={l}", l=l)
                 for (m, e) in (rp, rf, tp, tf))


def sphere_coefficients_recurrence(geom: LayeredSphere, omega: float, l: int,
                                   f: int, s: int) -> MieCoefficients:
    """Coefficients via the interface-matrix recurrence

        [[A_{f+1}+d_{f+1,s}, B_{f+1}], [C_{f+1}, D_{f+1}]]
            = [[1/T_F, R_F/T_F], [R_P/T_P, 1/T_P]]_f
              . [[A_f, B_f], [C_f, D_f + d_{f,s}]]

    with A_N = B_N = C_1 = D_1 = 0, solved by affine propagation of the two
    columns.  Cross-validation path; prefer sphere_coefficients in regimes
    with strongly evanescent layers.
    """
    N = geom.n_layers
    if not (1 <= f <= N and 1 <= s <= N):
        raise DomainError(f"field/source layers must be in 1..{N}")
    tab = _LayerTables(geom, omega, l)
    out = {}
    for pol in ("M", "N"):
        mats = []
        for fi in range(1, N):
            rp, rf, tp, tf = (sf.compose(m, e, l=l)
                              for (m, e) in _interface_rt_scaled(pol, tab, l, fi))
            mats.append(np.array([[1.0 / tf, rf / tf],
                                  [rp / tp, 1.0 / tp]], dtype=complex))

        def propagate(column: str, x1: complex):
            vals = [np.array([x1, 0.0 + 0.0j])]
            v = vals[0]
            for fi in range(1, N):
                vin = v.copy()
                if column == "H" and fi == s:
                    vin[1] += 1.0
                v = mats[fi - 1] @ vin
                if column == "J" and fi + 1 == s:
                    v = v - np.array([1.0 + 0.0j, 0.0])
                vals.append(v)
            return vals

        layers = {}
        for column in ("J", "H"):
            hom = propagate(column, 1.0 + 0.0j)
            par = propagate(column, 0.0 + 0.0j)
            slope = hom[-1][0] - par[-1][0]
            x1 = -par[-1][0] / slope
            layers[column] = [x1 * (h - p) + p for h, p in zip(hom, par)]
        a = 0j if (f == N or s == 1) else layers["J"][f - 1][0]
        c = 0j if (f == 1 or s == 1) else layers["J"][f - 1][1]
        b = 0j if (f == N or s == N) else layers["H"][f - 1][0]
        d = 0j if (f == 1 or s == N) else layers["H"][f - 1][1]
        out[pol] = WaveCoefficients(a, b, c, d)
    return MieCoefficients(l=l, f=f, s=s, m=out["M"], n=out["N"])


# ----------------------------------------------------------------------
# closed forms (two and three layers) in scaled arithmetic
# ----------------------------------------------------------------------

def two_layer_closed(geom: LayeredSphere, omega: float, l: int):
    """Closed two-layer forms: B = -R_F1 and (interior) C = T_F1 R_P1 / T_P1.

    Returns {'M': (B, C), 'N': (B, C)}.
    """
    if geom.n_layers != 2:
        raise DomainError("two_layer_closed needs exactly two layers")
    tab = _LayerTables(geom, omega, l)
    out = {}
    for pol in ("M", "N"):
        rp, rf, tp, tf = _interface_rt_scaled(pol, tab, l, 1)
        b = sf.compose(-rf[0], rf[1], l=l)
        cm, ce = sf._sc_mul(*sf._sc_mul(*tf, *rp), 1.0 / tp[0], -tp[1])
        out[pol] = (b, sf.compose(cm, ce, l=l))
    return out


def three_layer_closed(geom: LayeredSphere, omega: float, l: int):
    """Closed three-layer forms for a source in the core (s = 3):

        A = T_F1 T_F2 T_P1 / (T_P1 + T_F1 R_P1 R_F2)
        C = A / T_P2 * (R_P2 / T_F1 + R_P1 / T_P1)

    Returns {'M': (A, C), 'N': (A, C)}.
    """
    if geom.n_layers != 3:
        raise DomainError("three_layer_closed needs exactly three layers")
    tab = _LayerTables(geom, omega, l)
    out = {}
    for pol in ("M", "N"):
        rp1, rf1, tp1, tf1 = _interface_rt_scaled(pol, tab, l, 1)
        rp2, rf2, tp2, tf2 = _interface_rt_scaled(pol, tab, l, 2)

        def mul(a, b):
            return sf._sc_mul(a[0], a[1], b[0], b[1])

        def div(a, b):
            return sf._renorm(a[0] / b[0], a[1] - b[1])

        num_a = mul(mul(tf1, tf2), tp1)
        den_a = sf._sc_add(*tp1, *mul(mul(tf1, rp1), rf2))
        a_pair = div(num_a, den_a)
        bracket = sf._sc_add(*div(rp2, tf1), *div(rp1, tp1))
        c_pair = mul(div(a_pair, tp2), bracket)
        out[pol] = (sf.compose(*a_pair, l=l), sf.compose(*c_pair, l=l))
    return out


def cavity_reflection_c1n(medium: DrudeLorentzMedium | None, omega: float,
                          radius: float) -> complex:
    """Generalized reflection coefficient of an empty spherical cavity in a
    homogeneous medium, l = 1, N polarization (closed form).

    kt = radius * omega; for vacuum surroundings the coefficient is exactly 0
    (free-space decay).
    """
    if radius <= 0:
        raise DomainError("radius must be > 0")
    if medium is None:
        return 0j
    eps = permittivity(medium, omega)
    n = refractive_index(eps).value
    if abs(n - 1.0) < 1e-14:
        return 0j
    kt = radius * omega
    s, c = math.sin(kt), math.cos(kt)
    num = np.exp(1j * kt) * (1j + kt * (n + 1) - 1j * kt**2 * n
                             - kt**3 * n**2 / (n + 1))
    den = (s - kt * (c + 1j * n * s) + 1j * kt**2 * n * c
           - kt**3 * (c - 1j * n * s) * n**2 / (n**2 - 1))
    return complex(num / den)


# ----------------------------------------------------------------------
# bulk series for the two-layer microsphere (source and field outside)
# ----------------------------------------------------------------------

def scattering_b_series(geom: LayeredSphere, omega: float, l_cap: int):
    """Scaled arrays of the exterior scattering coefficients B^M_l, B^N_l
    (l = 0..l_cap) of a two-layer sphere: B = -R_F1.

    Returned as ((bm_mant, bm_exp), (bn_mant, bn_exp)); callers combine them
    with scaled Hankel factors so that only bounded products are composed.
    """
    if geom.n_layers != 2:
        raise DomainError("scattering_b_series applies to two-layer spheres")
    tab = _LayerTables(geom, omega, l_cap)
    k1, k2 = tab.k[1], tab.k[2]
    out = {}
    for pol in ("M", "N"):
        bm = np.zeros(l_cap + 1, dtype=complex)
        be = np.zeros(l_cap + 1, dtype=np.int64)
        if k1 != k2:
            for l in range(l_cap + 1):
                _rp, rf, _tp, _tf = _interface_rt_scaled(pol, tab, l, 1)
                bm[l], be[l] = -rf[0], rf[1]
        out[pol] = (bm, be)
    return out["M"], out["N"]
