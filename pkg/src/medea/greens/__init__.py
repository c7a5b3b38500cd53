"""Classical Green tensors: bulk medium, planar half-space, layered spheres."""

from .bulk import GreenSample, bulk_green, bulk_green_parts, bulk_im_green_coincident
from .planar import (
    FresnelPair,
    PlanarGreen,
    fresnel_coefficients,
    planar_near_field_green,
    planar_reflection_green,
)
from .sphere import (
    LayeredSphere,
    MieCoefficients,
    TruncationPolicy,
    WaveCoefficients,
    cavity_reflection_c1n,
    default_l_cutoff,
    scattering_b_series,
    sphere_coefficients,
    sphere_coefficients_recurrence,
    three_layer_closed,
    two_layer_closed,
)

__all__ = [
    "GreenSample",
    "bulk_green",
    "bulk_green_parts",
    "bulk_im_green_coincident",
    "FresnelPair",
    "PlanarGreen",
    "fresnel_coefficients",
    "planar_near_field_green",
    "planar_reflection_green",
    "LayeredSphere",
    "MieCoefficients",
    "WaveCoefficients",
    "TruncationPolicy",
    "cavity_reflection_c1n",
    "default_l_cutoff",
    "scattering_b_series",
    "sphere_coefficients",
    "sphere_coefficients_recurrence",
    "three_layer_closed",
    "two_layer_closed",
]
