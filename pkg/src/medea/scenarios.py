"""Scenario runners: map validated configs onto the library operations and
collect named columns.

Each scenario is a pure function of (config, point); sweeps dispatch points
to a process pool when threads > 1 and collect in input order, so reruns are
byte-reproducible.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from . import __version__
from . import decay, dynamics, twoatom
from .errors import MedeaError
from .greens.sphere import LayeredSphere, TruncationPolicy
from .media import permittivity, refractive_index
from .quadrature import QuadSpec, TimeGrid
from .schemas import (
    DynamicsConfig,
    RunRequest,
    ScenarioConfig,
    SweepResult,
    ValidationReport,
)
from .units import from_wavelengths


@dataclass(frozen=True)
class TolProfile:
    quad: QuadSpec
    truncation_rel: float

    def policy(self, l_cap: int) -> TruncationPolicy:
        return TruncationPolicy(rel_tol=self.truncation_rel, l_cap=l_cap)


PROFILES = {
    "golden": TolProfile(QuadSpec(), 1e-10),
    "fast": TolProfile(QuadSpec(rel_tol=1e-5, abs_tol=1e-9,
                                max_subdivisions=400), 1e-7),
}

_VAR_UNITS = {
    "omega_a": "omega_ref",
    "z": "lambda_ref",
    "delta_r": "lambda_ref",
    "theta": "rad",
    "time_gamma": "1/Gamma0",
}


def _col(name: str, unit: str = "1") -> str:
    return f"{name}[{unit}]"


# ----------------------------------------------------------------------
# per-point evaluators (module level so process pools can pickle them)
# ----------------------------------------------------------------------

def _point_bulk_cavity(cfg, profile, x):
    out = {}
    radius = from_wavelengths(cfg.radius)
    for sfx, med in cfg.gamma_cases():
        rep = decay.rate_real_cavity(med, x, radius)
        out[_col("rate" + sfx, "Gamma0")] = rep.rate_ratio
        out[_col("shift" + sfx, "Gamma0")] = rep.shift_ratio
    eps = permittivity(cfg.medium.to_medium(), x)
    n = refractive_index(eps)
    out[_col("eps_real")] = eps.real
    out[_col("eps_imag")] = eps.imag
    out[_col("n_real")] = n.n_r
    out[_col("n_imag")] = n.n_i
    return out


def _point_planar(cfg, profile, x):
    out = {}
    if cfg.sweep.variable == "omega_a":
        omega, z = x, from_wavelengths(cfg.z)
    else:
        omega, z = cfg.omega_a, from_wavelengths(x)
    for sfx, med in cfg.gamma_cases():
        if cfg.near_field:
            rep = decay.rate_planar_near_field(med, omega, z, cfg.orientation)
        else:
            rep = decay.rate_planar(med, omega, z, cfg.orientation,
                                    spec=profile.quad)
        out[_col("rate" + sfx, "Gamma0")] = rep.rate_ratio
        out[_col("shift" + sfx, "Gamma0")] = rep.shift_ratio
    return out


def _point_resonator(cfg, profile, x):
    out = {}
    r1, r2 = from_wavelengths(cfg.r1), from_wavelengths(cfg.r2)
    for sfx, med in cfg.gamma_cases():
        rep = decay.rate_spherical_resonator(med, x, r1, r2)
        out[_col("rate" + sfx, "Gamma0")] = rep.rate_ratio
        out[_col("rate_tangent" + sfx, "Gamma0")] = rep.meta["rate_tangent_form"]
        out[_col("shift" + sfx, "Gamma0")] = rep.shift_ratio
        out[_col("energy_fraction" + sfx)] = (
            rep.energy_fraction if rep.energy_fraction is not None else math.nan)
    return out


def _microsphere_geom(cfg, med, x):
    radius = from_wavelengths(cfg.radius)
    if cfg.sweep.variable == "omega_a":
        omega = x
        r_atom = radius + from_wavelengths(cfg.delta_r)
    else:
        omega = cfg.omega_a
        r_atom = radius + from_wavelengths(x)
    return LayeredSphere((radius,), (None, med)), omega, r_atom


def _point_microsphere_rate(cfg, profile, x):
    out = {}
    for sfx, med in cfg.gamma_cases():
        geom, omega, r_atom = _microsphere_geom(cfg, med, x)
        rep = decay.rate_microsphere(geom, omega, r_atom, cfg.orientation,
                                     profile.policy(cfg.l_cap))
        out[_col("rate" + sfx, "Gamma0")] = rep.rate_ratio
        out[_col("shift" + sfx, "Gamma0")] = rep.shift_ratio
    return out


def _point_microsphere_shift(cfg, profile, x):
    out = {}
    for sfx, med in cfg.gamma_cases():
        geom, omega, r_atom = _microsphere_geom(cfg, med, x)
        rep = decay.rate_microsphere(geom, omega, r_atom, cfg.orientation,
                                     profile.policy(cfg.l_cap))
        out[_col("shift" + sfx, "Gamma0")] = rep.shift_ratio
        out[_col("rate" + sfx, "Gamma0")] = rep.rate_ratio
    return out


def _point_microsphere_energy(cfg, profile, x):
    out = {}
    for sfx, med in cfg.gamma_cases():
        geom, omega, r_atom = _microsphere_geom(cfg, med, x)
        w = decay.emitted_energy_fraction_microsphere(
            geom, omega, r_atom, profile.policy(cfg.l_cap))
        out[_col("energy_fraction" + sfx)] = w
    return out


def _point_microsphere_pattern(cfg, profile, x):
    out = {}
    radius = from_wavelengths(cfg.radius)
    r_atom = radius + from_wavelengths(cfg.delta_r)
    r_field = from_wavelengths(cfg.r_field)
    for sfx, med in cfg.gamma_cases():
        geom = LayeredSphere((radius,), (None, med))
        val = decay.emission_pattern(geom, cfg.omega_a, r_atom,
                                     cfg.orientation, r_field, x, cfg.phi,
                                     profile.policy(cfg.l_cap))
        out[_col("pattern" + sfx, "norm")] = val
    return out


def _point_twoatom(cfg, profile, x):
    out = {}
    radius = from_wavelengths(cfg.radius)
    for sfx, med in cfg.gamma_cases():
        geom = LayeredSphere((radius,), (None, med))
        if cfg.sweep.variable == "omega_a":
            omega = x
            r_atom = radius + from_wavelengths(cfg.delta_r)
        else:
            omega = cfg.omega_a
            r_atom = radius + from_wavelengths(x)
        policy = TruncationPolicy(rel_tol=max(profile.truncation_rel, 1e-11),
                                  l_cap=cfg.l_cap, tail_guard=True)
        pair = twoatom.PairConfig(geom, r_atom, omega, policy=policy)
        gp, gm = twoatom.pair_rates_microsphere(pair)
        out[_col("gamma_plus" + sfx, "Gamma0")] = gp
        out[_col("gamma_minus" + sfx, "Gamma0")] = gm
        out[_col("gamma_single" + sfx, "Gamma0")] = 0.5 * (gp + gm)
    return out


_POINT_FNS = {
    "bulk_cavity": _point_bulk_cavity,
    "planar": _point_planar,
    "resonator": _point_resonator,
    "microsphere_rate": _point_microsphere_rate,
    "microsphere_shift": _point_microsphere_shift,
    "microsphere_energy": _point_microsphere_energy,
    "microsphere_pattern": _point_microsphere_pattern,
    "twoatom_rates": _point_twoatom,
}


# ----------------------------------------------------------------------
# trace-style scenarios (dynamics, bell) produce their grid in one shot
# ----------------------------------------------------------------------

def _microsphere_rate_sampler(med, radius, r_atom, policy):
    geom = LayeredSphere((radius,), (None, med))

    def sampler(w):
        return decay.rate_microsphere(geom, w, r_atom, "radial",
                                      policy).rate_ratio

    return sampler


def _run_dynamics(cfg: DynamicsConfig, profile):
    k = cfg.kernel
    times_gamma = cfg.sweep.grid()
    t_max_gamma = float(times_gamma[-1])
    meta = {}
    if k.mode == "markov":
        spec = dynamics.KernelSpec(mode="markov", gamma=k.gamma_ratio,
                                   delta=k.delta_ratio)
        grid = TimeGrid(t_max_gamma, cfg.steps)
        scale = 1.0
    elif k.mode == "lorentzian":
        spec = dynamics.KernelSpec(
            mode="lorentzian", omega_c=k.detuning_ratio,
            delta_omega_c=k.linewidth_ratio, gamma_c=k.gamma_c_ratio,
            omega_a=0.0)
        grid = TimeGrid(t_max_gamma, cfg.steps)
        scale = 1.0
        meta["omega_rabi_ratio"] = dynamics.rabi_frequency(
            k.gamma_c_ratio, k.linewidth_ratio)
    else:
        med = cfg.medium.to_medium()
        r1, r2 = from_wavelengths(k.r1), from_wavelengths(k.r2)

        def ratio(w):
            return decay.rate_spherical_resonator(med, w, r1, r2).rate_ratio

        wc, dwc, gc_ratio = dynamics.fit_resonance(
            ratio, (k.omega_a - 2e-3, k.omega_a + 2e-3))
        win = k.window_linewidths * dwc
        n_core = int(0.8 * k.grid_points)
        core = np.linspace(-8 * dwc, 8 * dwc, n_core)
        n_tail = max((k.grid_points - n_core) // 2, 20)
        tail = np.geomspace(8 * dwc, max(win, 16 * dwc), n_tail)
        d = np.unique(np.concatenate([-tail[::-1], core, tail]))
        w_grid = k.omega_a + d
        w_grid = w_grid[w_grid > 0]
        s_vals = np.array([(w / k.omega_a) ** 3 * (ratio(w) - 1.0) * k.gamma0
                           for w in w_grid])
        spec = dynamics.KernelSpec(mode="sampled", omega_grid=w_grid,
                                   spectrum=s_vals, omega_a=k.omega_a,
                                   gamma0=k.gamma0)
        grid = TimeGrid(t_max_gamma / k.gamma0, cfg.steps)
        scale = k.gamma0
        gc_abs = gc_ratio * k.gamma0
        meta.update(omega_c=wc, delta_omega_c=dwc, gamma_c_ratio=gc_ratio,
                    omega_rabi=dynamics.rabi_frequency(gc_abs, dwc),
                    rabi_over_linewidth=dynamics.rabi_frequency(gc_abs, dwc) / dwc)
    trace = dynamics.evolve_amplitude(spec, grid)
    tg = trace.times * scale
    cols = {
        _col("time_gamma", "1/Gamma0"): [float(v) for v in tg],
        _col("population"): [float(v) for v in trace.populations],
        _col("re_c"): [float(v.real) for v in trace.values],
        _col("im_c"): [float(v.imag) for v in trace.values],
    }
    return cols, meta


def _run_bell(cfg, profile):
    med = cfg.medium.to_medium()
    radius = from_wavelengths(cfg.radius)
    r_atom = radius + from_wavelengths(cfg.delta_r)
    policy = profile.policy(8000)
    sampler = _microsphere_rate_sampler(med, radius, r_atom, policy)
    wc, dwc, peak_ratio = dynamics.fit_resonance(
        sampler, (cfg.omega_a - cfg.fit_window, cfg.omega_a + cfg.fit_window),
        points=801)
    gamma_c = (peak_ratio - 1.0) * cfg.gamma0
    omega_rabi = dynamics.rabi_frequency(gamma_c, dwc)
    times_gamma = cfg.sweep.grid()
    times = times_gamma / cfg.gamma0
    bs, pop = [], []
    for t in times:
        state = twoatom.strong_coupling_transfer(omega_rabi, dwc, float(t))
        p = abs(state.c_plus) ** 2
        pop.append(p)
        bs.append(twoatom.bell_parameter(p))
    cols = {
        _col("time_gamma", "1/Gamma0"): [float(v) for v in times_gamma],
        _col("bell"): [float(v) for v in bs],
        _col("population_plus"): [float(v) for v in pop],
    }
    meta = {"omega_c": wc, "delta_omega_c": dwc, "gamma_c": gamma_c,
            "omega_rabi": omega_rabi,
            "rabi_over_linewidth": omega_rabi / dwc}
    return cols, meta


# ----------------------------------------------------------------------
# the runner
# ----------------------------------------------------------------------

def _eval_point(cfg, profile_name, x):
    profile = PROFILES[profile_name]
    fn = _POINT_FNS[cfg.scenario]
    try:
        return fn(cfg, profile, x)
    except MedeaError as exc:
        raise type(exc)(
            f"at {cfg.sweep.variable} = {x:.9g}: {exc}") from exc


def run_config(cfg: ScenarioConfig, threads: int = 1,
               tol_profile: str = "golden") -> SweepResult:
    profile = PROFILES[tol_profile]
    provenance = {
        "config": cfg.model_dump(),
        "library_version": __version__,
        "tol_profile": tol_profile,
        "threads": threads,
    }
    if cfg.scenario in ("dynamics", "bell"):
        runner = _run_dynamics if cfg.scenario == "dynamics" else _run_bell
        cols, meta = runner(cfg, profile)
        provenance["diagnostics"] = meta
        return SweepResult(columns=cols, provenance=provenance)

    xs = cfg.sweep.grid()
    worker = partial(_eval_point, cfg, tol_profile)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(worker, xs, chunksize=max(1, len(xs) // (4 * threads))))
    else:
        rows = [worker(x) for x in xs]
    var = cfg.sweep.variable
    cols: dict[str, list[float]] = {
        _col(var, _VAR_UNITS.get(var, "1")): [float(x) for x in xs]
    }
    for name in rows[0]:
        cols[name] = [float(r[name]) for r in rows]
    provenance["diagnostics"] = {"points": len(xs)}
    return SweepResult(columns=cols, provenance=provenance)


def run_request(req: RunRequest) -> SweepResult:
    return run_config(req.config, threads=req.threads,
                      tol_profile=req.tol_profile)


def semantic_warnings(cfg: ScenarioConfig) -> list[str]:
    """Cheap physics sanity checks for validate()."""
    warns = []
    if cfg.scenario == "resonator":
        med = cfg.medium.to_medium()
        mid = 0.5 * (cfg.sweep.start + cfg.sweep.stop)
        n = refractive_index(permittivity(med, mid))
        factor = math.exp(-n.n_i * from_wavelengths(cfg.r1 - cfg.r2) * mid)
        if factor > 1e-3:
            warns.append(
                f"thick-wall factor {factor:.2e} at omega={mid:g} exceeds "
                "1e-3; the tangent-form rate is unreliable there")
    if cfg.scenario == "planar" and cfg.near_field:
        w_hi = cfg.sweep.stop if cfg.sweep.variable == "omega_a" else cfg.omega_a
        z_hi = (from_wavelengths(cfg.z) if cfg.sweep.variable == "omega_a"
                else from_wavelengths(cfg.sweep.stop))
        if w_hi * z_hi > 0.3:
            warns.append(
                f"kz = {w_hi * z_hi:.3g} exceeds the near-field guard 0.3")
    if cfg.scenario in ("microsphere_rate", "microsphere_shift",
                        "microsphere_energy", "twoatom_rates"):
        gap = (cfg.delta_r if cfg.sweep.variable == "omega_a"
               else cfg.sweep.start)
        if gap is not None and cfg.radius > 0:
            l_need = int(12.0 / math.log1p(gap / cfg.radius)) + 60
            if l_need > cfg.l_cap:
                warns.append(
                    f"quasi-static tails may need ~{l_need} orders, above "
                    f"l_cap = {cfg.l_cap}")
    return warns


def validate_config(cfg: ScenarioConfig) -> ValidationReport:
    return ValidationReport(ok=True, scenario=cfg.scenario,
                            warnings=semantic_warnings(cfg))
