"""Pydantic request/response models shared by the HTTP service and the CLI.

Units in configs: frequencies in omega_ref, lengths in reference wavelengths
(lambda_ref = 2 pi c / omega_ref), rates in Gamma_0 unless a field says
otherwise.  Every scenario carries a `sweep` block naming the swept variable.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from .media import DrudeLorentzMedium, ResonanceTerm


class ResonanceTermSpec(BaseModel):
    omega_t: float = Field(ge=0.0, description="transverse resonance frequency")
    omega_p: float = Field(gt=0.0, description="coupling frequency")
    gamma: float = Field(gt=0.0, description="absorption linewidth")


class MediumSpec(BaseModel):
    terms: list[ResonanceTermSpec] = Field(min_length=1)

    def to_medium(self, gamma_override: float | None = None) -> DrudeLorentzMedium:
        terms = []
        for t in self.terms:
            g = t.gamma if gamma_override is None else gamma_override
            terms.append(ResonanceTerm(t.omega_t, t.omega_p, g))
        return DrudeLorentzMedium(tuple(terms))


class SweepSpec(BaseModel):
    variable: str
    start: float
    stop: float
    points: int = Field(ge=2)
    spacing: Literal["linear", "log"] = "linear"

    @model_validator(mode="after")
    def _ordered(self):
        if not self.start < self.stop:
            raise ValueError("sweep start must be < stop")
        if self.spacing == "log" and self.start <= 0:
            raise ValueError("log spacing needs start > 0")
        return self

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


class _ScenarioBase(BaseModel):
    medium: MediumSpec
    sweep: SweepSpec
    gamma_values: list[float] | None = Field(
        default=None,
        description="optional linewidth overrides; one column set per value "
        "(requires a single-resonance medium)",
    )

    @model_validator(mode="after")
    def _gamma_override_shape(self):
        if self.gamma_values is not None and len(self.medium.terms) != 1:
            raise ValueError("gamma_values needs a single-resonance medium")
        return self

    def gamma_cases(self):
        """[(column suffix, medium)] for the configured linewidth overrides."""
        if not self.gamma_values:
            return [("", self.medium.to_medium())]
        return [(f"_gamma_{g:g}", self.medium.to_medium(gamma_override=g))
                for g in self.gamma_values]


class BulkCavityConfig(_ScenarioBase):
    scenario: Literal["bulk_cavity"]
    radius: float = Field(gt=0.0, description="cavity radius [lambda_ref]")

    @field_validator("sweep")
    @classmethod
    def _var(cls, v):
        if v.variable != "omega_a":
            raise ValueError("bulk_cavity sweeps omega_a")
        return v


class PlanarConfig(_ScenarioBase):
    scenario: Literal["planar"]
    z: float = Field(gt=0.0, description="atom height [lambda_ref]")
    orientation: Literal["x", "z"] = "x"
    omega_a: float | None = Field(default=None,
                                  description="needed when sweeping z")
    near_field: bool = Field(default=False,
                             description="use the small-kz closed forms")

    @model_validator(mode="after")
    def _var(self):
        if self.sweep.variable not in ("omega_a", "z"):
            raise ValueError("planar sweeps omega_a or z")
        if self.sweep.variable == "z" and self.omega_a is None:
            raise ValueError("sweeping z requires omega_a")
        return self


class ResonatorConfig(_ScenarioBase):
    scenario: Literal["resonator"]
    r1: float = Field(gt=0.0, description="outer wall radius [lambda_ref]")
    r2: float = Field(gt=0.0, description="inner wall radius [lambda_ref]")

    @model_validator(mode="after")
    def _shape(self):
        if not self.r1 > self.r2:
            raise ValueError(f"need r1 > r2, got r1={self.r1} <= r2={self.r2}")
        if self.sweep.variable != "omega_a":
            raise ValueError("resonator sweeps omega_a")
        return self


class _MicrosphereBase(_ScenarioBase):
    radius: float = Field(gt=0.0, description="sphere radius [lambda_ref]")
    delta_r: float = Field(gt=0.0, description="atom-surface gap [lambda_ref]")
    orientation: Literal["radial", "tangential"] = "radial"
    omega_a: float | None = None
    l_cap: int = Field(default=2000, ge=10)

    @model_validator(mode="after")
    def _var(self):
        if self.sweep.variable not in ("omega_a", "delta_r"):
            raise ValueError("microsphere scenarios sweep omega_a or delta_r")
        if self.sweep.variable == "delta_r" and self.omega_a is None:
            raise ValueError("sweeping delta_r requires omega_a")
        return self


class MicrosphereRateConfig(_MicrosphereBase):
    scenario: Literal["microsphere_rate"]


class MicrosphereShiftConfig(_MicrosphereBase):
    scenario: Literal["microsphere_shift"]


class MicrosphereEnergyConfig(_MicrosphereBase):
    scenario: Literal["microsphere_energy"]


class MicrospherePatternConfig(_ScenarioBase):
    scenario: Literal["microsphere_pattern"]
    radius: float = Field(gt=0.0)
    delta_r: float = Field(gt=0.0)
    orientation: Literal["radial", "tangential"] = "radial"
    omega_a: float
    r_field: float = Field(gt=0.0, description="observation radius [lambda_ref]")
    phi: float = 0.0
    l_cap: int = Field(default=2000, ge=10)

    @field_validator("sweep")
    @classmethod
    def _var(cls, v):
        if v.variable != "theta":
            raise ValueError("microsphere_pattern sweeps theta")
        return v


class MarkovKernelSpec(BaseModel):
    mode: Literal["markov"]
    gamma_ratio: float = Field(default=1.0, gt=0.0,
                               description="Gamma / Gamma_0")
    delta_ratio: float = Field(default=0.0, description="shift / Gamma_0")


class LorentzianKernelSpec(BaseModel):
    mode: Literal["lorentzian"]
    gamma_c_ratio: float = Field(gt=0.0, description="Gamma_C / Gamma_0")
    linewidth_ratio: float = Field(gt=0.0, description="dwC / Gamma_0")
    detuning_ratio: float = Field(default=0.0,
                                  description="(omega_C - omega_A)/Gamma_0")


class ResonatorKernelSpec(BaseModel):
    mode: Literal["resonator"]
    r1: float = Field(gt=0.0)
    r2: float = Field(gt=0.0)
    omega_a: float = Field(gt=0.0)
    gamma0: float = Field(gt=0.0, description="free-space rate [omega_ref]")
    window_linewidths: float = Field(default=50.0, gt=0.0)
    grid_points: int = Field(default=1500, ge=100)

    @model_validator(mode="after")
    def _shape(self):
        if not self.r1 > self.r2:
            raise ValueError("need r1 > r2")
        return self


KernelUnion = Annotated[
    Union[MarkovKernelSpec, LorentzianKernelSpec, ResonatorKernelSpec],
    Field(discriminator="mode"),
]


class DynamicsConfig(_ScenarioBase):
    scenario: Literal["dynamics"]
    kernel: KernelUnion
    steps: int = Field(default=2000, ge=10)

    @field_validator("sweep")
    @classmethod
    def _var(cls, v):
        # the "sweep" is the output time grid, in units of 1/Gamma_0
        if v.variable != "time_gamma":
            raise ValueError("dynamics sweeps time_gamma (units 1/Gamma_0)")
        if v.start != 0:
            raise ValueError("dynamics time grid must start at 0")
        return v


class TwoAtomConfig(_ScenarioBase):
    scenario: Literal["twoatom_rates"]
    radius: float = Field(gt=0.0)
    delta_r: float | None = Field(default=None,
                                  description="gap when sweeping omega_a")
    omega_a: float | None = None
    l_cap: int = Field(default=8000, ge=10)

    @model_validator(mode="after")
    def _var(self):
        if self.sweep.variable not in ("omega_a", "delta_r"):
            raise ValueError("twoatom_rates sweeps omega_a or delta_r")
        if self.sweep.variable == "omega_a" and self.delta_r is None:
            raise ValueError("sweeping omega_a requires delta_r")
        if self.sweep.variable == "delta_r" and self.omega_a is None:
            raise ValueError("sweeping delta_r requires omega_a")
        return self


class BellConfig(_ScenarioBase):
    scenario: Literal["bell"]
    radius: float = Field(gt=0.0)
    delta_r: float = Field(gt=0.0)
    omega_a: float = Field(gt=0.0)
    gamma0: float = Field(gt=0.0, description="free-space rate [omega_ref]")
    fit_window: float = Field(default=2e-3,
                              description="half width of the resonance fit "
                              "window around omega_a [omega_ref]")

    @field_validator("sweep")
    @classmethod
    def _var(cls, v):
        if v.variable != "time_gamma":
            raise ValueError("bell sweeps time_gamma (units 1/Gamma_0)")
        return v


ScenarioConfig = Annotated[
    Union[
        BulkCavityConfig,
        PlanarConfig,
        ResonatorConfig,
        MicrosphereRateConfig,
        MicrosphereShiftConfig,
        MicrospherePatternConfig,
        MicrosphereEnergyConfig,
        DynamicsConfig,
        TwoAtomConfig,
        BellConfig,
    ],
    Field(discriminator="scenario"),
]

SCENARIO_NAMES = (
    "bulk_cavity",
    "planar",
    "resonator",
    "microsphere_rate",
    "microsphere_shift",
    "microsphere_pattern",
    "microsphere_energy",
    "dynamics",
    "twoatom_rates",
    "bell",
)


class RunRequest(BaseModel):
    config: ScenarioConfig
    threads: int = Field(default=1, ge=1, le=64)
    tol_profile: Literal["fast", "golden"] = "golden"


class SweepResult(BaseModel):
    columns: dict[str, list[float]]
    provenance: dict

    @model_validator(mode="after")
    def _equal_lengths(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError("all result columns must have equal length")
        return self


class ValidateRequest(BaseModel):
    config: ScenarioConfig


class ValidationReport(BaseModel):
    ok: bool
    scenario: str | None = None
    errors: list[str] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)
