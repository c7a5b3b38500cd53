"""Time-domain evolution of the upper-state amplitude, emitted intensity and
emitted-light spectra.

Everything is expressed in reference-frequency units (times in 1/omega_ref,
rates in omega_ref); the free-space rate gamma0 enters as an explicit number.
Three kernel models drive the amplitude equation

    C(t) = 1 + int_0^t Kbar(t - t') C(t') dt' :

  * markov: Kbar = -Gamma/2 + i delta, giving pure exponential decay.
  * lorentzian: one narrow field resonance; the memory kernel is
    K(tau) = -(1/2) Gamma_C dwC e^{-i(wC - wA) tau} e^{-dwC tau}, equivalent
    to a damped-oscillator ODE whose closed форm is used directly.  (The
    resonant strong-coupling limit is damped Rabi oscillation at
    Omega = sqrt(2 Gamma_C dwC).)
  * sampled: a tabulated reflection-rate spectrum; Kbar(tau) is built by
    exact product integration of the piecewise-linear spectrum against
    (e^{-i Delta tau} - 1)/(i Delta), so huge windows and long times cost
    nothing in resolution.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import sici

from .errors import DomainError, GridExtrapolationError
from .media import DrudeLorentzMedium, band_edges, medium_index
from .quadrature import AmplitudeTrace, TimeGrid, solve_volterra2

_EULER = 0.5772156649015328606


@dataclass(frozen=True)
class KernelSpec:
    """Kernel model selector; see module docstring for the conventions.

    markov:     gamma (total rate), delta (line shift).
    lorentzian: omega_c, delta_omega_c (> 0), gamma_c (>= 0), omega_a.
    sampled:    omega grid (strictly increasing), spectrum S(omega) in rate
                units (the local reflection coupling spectrum), omega_a and
                the vacuum rate gamma0 folded in as -gamma0/2.
    """

    mode: str
    gamma: float = 0.0
    delta: float = 0.0
    omega_c: float = 0.0
    delta_omega_c: float = 0.0
    gamma_c: float = 0.0
    omega_a: float = 0.0
    omega_grid: np.ndarray | None = None
    spectrum: np.ndarray | None = None
    gamma0: float = 0.0

    def __post_init__(self):
        if self.mode not in ("markov", "lorentzian", "sampled"):
            raise DomainError(f"unknown kernel mode {self.mode!r}")
        if self.mode == "lorentzian":
            if self.delta_omega_c <= 0:
                raise DomainError("delta_omega_c must be > 0")
            if self.gamma_c < 0:
                raise DomainError("gamma_c must be >= 0")
        if self.mode == "sampled":
            w = np.asarray(self.omega_grid, dtype=float)
            s = np.asarray(self.spectrum, dtype=float)
            if w.ndim != 1 or len(w) < 2 or np.any(np.diff(w) <= 0):
                raise DomainError("sampled omega grid must be strictly increasing")
            if s.shape != w.shape:
                raise DomainError("spectrum and grid shapes differ")
            if not (w[0] < self.omega_a < w[-1]):
                raise GridExtrapolationError(
                    f"omega_a = {self.omega_a} outside tabulated grid "
                    f"[{w[0]}, {w[-1]}]"
                )
            object.__setattr__(self, "omega_grid", w)
            object.__setattr__(self, "spectrum", s)


def _cin(x: np.ndarray) -> np.ndarray:
    """Cin(x) = gamma + ln|x| - Ci(|x|), the entire cosine integral."""
    ax = np.abs(x)
    out = np.zeros_like(ax)
    nz = ax > 1e-280
    si, ci = sici(ax[nz])
    out[nz] = _EULER + np.log(ax[nz]) - ci
    return out


def _phase_integral(x: np.ndarray) -> np.ndarray:
    """F(x) = int_0^x (e^{-iu} - 1)/(iu) du = -Si(x) + i Cin(x)."""
    si = np.zeros_like(x)
    nz = np.abs(x) > 1e-280
    si[nz] = np.sign(x[nz]) * sici(np.abs(x[nz]))[0]
    return -si + 1j * _cin(x)


def sampled_kernel_on_grid(spec: KernelSpec, taus: np.ndarray) -> np.ndarray:
    """Kbar(tau) for the sampled mode by exact piecewise-linear product
    integration of the spectrum against (e^{-i Delta tau} - 1)/(i Delta)."""
    w = spec.omega_grid
    s = spec.spectrum
    d = w - spec.omega_a                       # Delta at the nodes
    taus = np.asarray(taus, dtype=float)
    out = np.full(len(taus), -0.5 * spec.gamma0, dtype=complex)
    da, db = d[:-1], d[1:]
    slope = (s[1:] - s[:-1]) / (db - da)
    const = s[:-1] - slope * da                # s(Delta) = const + slope*Delta
    for i, tau in enumerate(taus):
        if tau == 0.0:
            continue
        xa, xb = da * tau, db * tau
        big_f = _phase_integral(xb) - _phase_integral(xa)
        # Psi = int (e^{-i D tau} - 1)/i dD over the panel
        ea, eb = np.exp(-1j * xa), np.exp(-1j * xb)
        psi = ((eb - ea) / (-1j * tau) - (db - da)) / 1j
        out[i] += np.sum(const * big_f + slope * psi) / (2 * math.pi)
    return out


def lorentzian_volterra_kernel(spec: KernelSpec, taus: np.ndarray) -> np.ndarray:
    """Analytic Kbar(tau) of the full-line Lorentzian memory kernel."""
    a = 1j * (spec.omega_c - spec.omega_a) + spec.delta_omega_c
    kappa = -0.5 * spec.gamma_c * spec.delta_omega_c
    taus = np.asarray(taus, dtype=float)
    return kappa * (1.0 - np.exp(-a * taus)) / a


def kernel_value(spec: KernelSpec, tau: float) -> complex:
    """Kernel sample at lag tau.

    markov -> the Volterra kernel Kbar (a constant); lorentzian -> the memory
    kernel K(tau) of the single-resonance line; sampled -> Kbar(tau).
    """
    if tau < 0:
        raise DomainError("tau must be >= 0")
    if spec.mode == "markov":
        return complex(-0.5 * spec.gamma, spec.delta)
    if spec.mode == "lorentzian":
        return (-0.5 * spec.gamma_c * spec.delta_omega_c
                * cmath.exp(-1j * (spec.omega_c - spec.omega_a) * tau
                            - spec.delta_omega_c * tau))
    return complex(sampled_kernel_on_grid(spec, np.array([tau]))[0])


def evolve_amplitude(spec: KernelSpec, grid: TimeGrid) -> AmplitudeTrace:
    """Upper-state amplitude C(t) with C(0) = 1.

    markov and lorentzian use their closed forms (the lorentzian one is the
    exact damped-oscillator solution, valid in all three damping regimes);
    sampled goes through the Volterra product-integration solver.
    """
    t = grid.times()
    if spec.mode == "markov":
        vals = np.exp((-0.5 * spec.gamma + 1j * spec.delta) * t)
        return AmplitudeTrace(grid, vals)
    if spec.mode == "lorentzian":
        a = 1j * (spec.omega_c - spec.omega_a) + spec.delta_omega_c
        b = 0.5 * spec.gamma_c * spec.delta_omega_c
        disc = cmath.sqrt(a * a - 4 * b)
        lp = 0.5 * (-a + disc)
        lm = 0.5 * (-a - disc)
        if abs(lp - lm) < 1e-12 * max(abs(lp), abs(lm), 1e-30):
            lam = -0.5 * a
            vals = np.exp(lam * t) * (1.0 - lam * t)
        else:
            vals = (lp * np.exp(lm * t) - lm * np.exp(lp * t)) / (lp - lm)
        return AmplitudeTrace(grid, vals)
    kbar = sampled_kernel_on_grid(spec, t)
    return solve_volterra2(lambda _t: kbar, None, grid)


def rabi_frequency(gamma_c: float, delta_omega_c: float) -> float:
    """Vacuum Rabi frequency of the resonant strong-coupling regime."""
    return math.sqrt(2.0 * gamma_c * delta_omega_c)


def resonator_linewidth(r2: float, gamma_c_ratio: float) -> float:
    """Cavity line width dwC = c Gamma_0 / (R2 Gamma_C) in omega_ref units,
    written with the rate ratio Gamma_C/Gamma_0 so the overall scale drops."""
    if r2 <= 0 or gamma_c_ratio <= 0:
        raise DomainError("r2 and gamma_c_ratio must be positive")
    return 1.0 / (r2 * gamma_c_ratio)


def resonator_rate_estimates(medium: DrudeLorentzMedium, omega_c: float) -> dict:
    """Analytic estimates of Gamma_C/Gamma_0 for the central-atom resonator.

    Inside the band gap absorption dominates: (n_I^2 + 1)/n_R, approximately
    2 sqrt((wL^2-w^2)(w^2-wT^2))/(gamma w) for weak damping.  Below the gap
    radiative loss dominates: n_R = sqrt((wL^2-w^2)/(wT^2-w^2))."""
    if len(medium.terms) != 1:
        raise DomainError("estimates assume a single-resonance medium")
    term = medium.terms[0]
    w_t, w_l = band_edges(term)
    n = medium_index(medium, omega_c)
    in_gap = w_t < omega_c < w_l
    out = {"in_gap": in_gap,
           "index_form": ((n.n_i**2 + 1.0) / n.n_r) if in_gap else n.n_r}
    if in_gap:
        out["weak_damping_form"] = (2.0 * math.sqrt(
            (w_l**2 - omega_c**2) * (omega_c**2 - w_t**2))
            / (term.gamma * omega_c))
    elif omega_c < w_t:
        out["weak_damping_form"] = math.sqrt(
            (w_l**2 - omega_c**2) / (w_t**2 - omega_c**2))
    return out


def fit_resonance(sampler, window: tuple[float, float], points: int = 2001):
    """Locate one resonance line of a rate-ratio curve: returns
    (omega_c, delta_omega_c, gamma_c_ratio) from the peak and its HWHM."""
    ws = np.linspace(window[0], window[1], points)
    vals = np.array([sampler(w) for w in ws])
    i = int(np.argmax(vals))
    peak = vals[i]
    half = 0.5 * peak
    lo = i
    while lo > 0 and vals[lo] > half:
        lo -= 1
    hi = i
    while hi < len(ws) - 1 and vals[hi] > half:
        hi += 1
    if lo == 0 or hi == len(ws) - 1:
        raise DomainError("resonance not fully contained in the fit window")

    def cross(j0, j1):
        f0, f1 = vals[j0], vals[j1]
        return ws[j0] + (half - f0) * (ws[j1] - ws[j0]) / (f1 - f0)

    w_lo = cross(lo, lo + 1)
    w_hi = cross(hi - 1, hi)
    return float(ws[i]), float(0.5 * (w_hi - w_lo)), float(peak)


# ----------------------------------------------------------------------
# emitted intensity and spectrum
# ----------------------------------------------------------------------

def fourier_tabulated(omega: np.ndarray, g: np.ndarray, omega_a: float,
                      taus: np.ndarray) -> np.ndarray:
    """W(tau) = int g(omega) e^{-i (omega - omega_a) tau} d omega for a
    piecewise-linear tabulated g (columns = vector components allowed).

    Exact per panel (Filon-type), so tau resolution never limits accuracy;
    small tau falls back to the trapezoid rule.
    """
    omega = np.asarray(omega, dtype=float)
    g = np.atleast_2d(np.asarray(g, dtype=complex).T).T   # (n_omega, ncomp)
    d = omega - omega_a
    da, db = d[:-1], d[1:]
    wpan = db - da
    slope = (g[1:] - g[:-1]) / wpan[:, None]
    const = g[:-1] - slope * da[:, None]
    dmax = np.max(np.abs(d))
    out = np.empty((len(taus), g.shape[1]), dtype=complex)
    for i, tau in enumerate(taus):
        if abs(tau) * dmax < 0.5:
            phase = np.exp(-1j * d * tau)
            out[i] = np.trapz(g * phase[:, None], omega, axis=0)
            continue
        ea, eb = np.exp(-1j * da * tau), np.exp(-1j * db * tau)
        int_e = (eb - ea) * (1j / tau)
        int_de = (1j / tau) * (db * eb - da * ea) - (1j / tau) ** 2 * (eb - ea)
        out[i] = (const * int_e[:, None] + slope * int_de[:, None]).sum(axis=0)
    return out


def intensity_exact(trace: AmplitudeTrace, omega: np.ndarray,
                    amp_samples: np.ndarray, omega_a: float) -> np.ndarray:
    """Exact emitted intensity I(t) (normalized to (k^3 d/4 pi eps0)^2 = 1).

    amp_samples holds the normalized complex field amplitude F(omega) per
    frequency (rows) and component (columns); the real part is the projected
    Im G entering the emission integral, weighted here by omega/omega_a.
    """
    t = trace.times
    g = (omega / omega_a)[:, None] * np.real(amp_samples)
    w_tau = fourier_tabulated(omega, g, omega_a, t)
    c = trace.values
    h = trace.grid.h
    n = len(t)
    a = np.zeros((n, w_tau.shape[1]), dtype=complex)
    for j in range(1, n):
        acc = 0.5 * (c[0] * w_tau[j] + c[j] * w_tau[0])
        if j > 1:
            acc = acc + c[1:j] @ w_tau[j - 1:0:-1]
        a[j] = h * acc / math.pi
    return np.sum(np.abs(a) ** 2, axis=1)


def spectrum_exact(trace: AmplitudeTrace, omega: np.ndarray,
                   amp_samples: np.ndarray, omega_a: float,
                   omega_s: float) -> float:
    """Exact time-gated power spectrum at setting frequency omega_s for the
    detector window [0, t_max of the trace]."""
    t = trace.times
    g = (omega / omega_a)[:, None] * np.real(amp_samples)
    w_tau = fourier_tabulated(omega, g, omega_a, t)
    c = trace.values
    h = trace.grid.h
    n = len(t)
    a = np.zeros((n, w_tau.shape[1]), dtype=complex)
    for j in range(1, n):
        acc = 0.5 * (c[0] * w_tau[j] + c[j] * w_tau[0])
        if j > 1:
            acc = acc + c[1:j] @ w_tau[j - 1:0:-1]
        a[j] = h * acc / math.pi
    phase = np.exp(1j * (omega_s - omega_a) * t)
    val = np.trapz(phase[:, None] * a, t, axis=0)
    return float(np.sum(np.abs(val) ** 2))


def intensity_markov(f_sq: float, gamma: float, t: np.ndarray) -> np.ndarray:
    """Markov-mode intensity |F|^2 e^{-Gamma t}."""
    return f_sq * np.exp(-gamma * np.asarray(t, dtype=float))


def spectrum_markov(f_sq: float, gamma: float, omega_s, omega_a_shifted: float,
                    t_window: float):
    """Markov-mode time-gated spectrum."""
    d = np.asarray(omega_s, dtype=float) - omega_a_shifted
    num = np.exp((-0.5 * gamma + 1j * d) * t_window) - 1.0
    return f_sq * np.abs(num / (d + 0.5j * gamma)) ** 2


def intensity_free_space(theta: float, omega_a: float, rho: float,
                         gamma0: float, t) -> np.ndarray:
    """Retarded free-space far-field intensity (normalized units)."""
    t = np.asarray(t, dtype=float)
    amp = (math.sin(theta) / (omega_a * rho)) ** 2
    return np.where(t >= rho, amp * np.exp(-gamma0 * (t - rho)), 0.0)


def spectrum_free_space(theta: float, omega_a: float, rho: float,
                        gamma0: float, omega_a_shifted: float,
                        omega_s, t_window: float):
    """Retarded free-space spectrum; zero until the light-travel time."""
    if t_window <= rho:
        return np.zeros_like(np.asarray(omega_s, dtype=float))
    amp = (math.sin(theta) / (omega_a * rho)) ** 2
    return amp * spectrum_markov(1.0, gamma0, omega_s, omega_a_shifted,
                                 t_window - rho)
