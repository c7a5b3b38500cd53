"""medea: decay observables for dipole emitters near absorbing, dispersing
macroscopic bodies, computed from the classical Green tensor.

Reduced units throughout: frequencies in omega_ref, internal lengths in
c/omega_ref (configs use wavelengths lambda_ref = 2 pi c/omega_ref), rates in
the free-space rate Gamma_0.
"""

__version__ = "0.1.0"
