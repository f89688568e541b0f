"""Spectral experiments on the nonlinear smoothing effect of dispersive PDE.

The package evolves model equations (modified KdV, KdV, cubic NLS, a
symmetrized modified Zakharov-Kuznetsov equation, and a gauged derivative
NLS) in the interaction picture on large periodic boxes, measures the extra
Sobolev regularity of the Duhamel term against the predicted gains, and
probes the multilinear frequency-space estimates behind those gains by
brute-force lattice sums.
"""

__version__ = "0.1.0"

from .grids import (
    SpectralGrid,
    FourierField,
    transform_forward,
    transform_inverse,
    sobolev_norm,
    physical_l2_norm,
    weighted_norm,
    lambda_window_norm,
    adapted_norm,
    dealiased_product,
)
from .equations import (
    EquationSpec,
    InteractionTerm,
    FrequencyTuple,
    get_equation,
    equation_names,
    phase,
    multiplier,
    nonlinearity,
    predicted_gain,
    gauge_forward,
    gauge_inverse,
)

__all__ = [
    "__version__",
    "SpectralGrid",
    "FourierField",
    "transform_forward",
    "transform_inverse",
    "sobolev_norm",
    "physical_l2_norm",
    "weighted_norm",
    "lambda_window_norm",
    "adapted_norm",
    "dealiased_product",
    "EquationSpec",
    "InteractionTerm",
    "FrequencyTuple",
    "get_equation",
    "equation_names",
    "phase",
    "multiplier",
    "nonlinearity",
    "predicted_gain",
    "gauge_forward",
    "gauge_inverse",
]
