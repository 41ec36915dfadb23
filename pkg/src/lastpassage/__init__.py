"""Directed last passage percolation on a seed-keyed weight array.

Coupled passage times ``H_N = H([gamma N], N)``, their Tracy-Widom rescaling,
tail and large-deviation experiments, and law-of-the-iterated-logarithm
trajectories.
"""

__version__ = "0.1.0"

from .weights import (  # noqa: E402
    Exponential,
    Geometric,
    WeightField,
    cell_uniform,
    inverse_cdf,
    parse_distribution,
    weight,
    weight_block,
)
from .passage import (  # noqa: E402
    RayConfig,
    RaySweepResult,
    ResourceError,
    TransversalTime,
    grid_passage,
    oracle_passage,
    ray_sweep,
    transversal,
)
from .scaling import (  # noqa: E402
    GeometricRho,
    Normalizer,
    ScalingConstants,
    Source,
    Stretched,
    constants,
    fit_constants,
    phi,
    psi,
    rescale,
    right_rate_asymptote,
    subsequence,
    tw_tail_exponents,
    unrescale,
)

__all__ = [
    "Exponential", "Geometric", "WeightField", "cell_uniform", "inverse_cdf",
    "parse_distribution", "weight", "weight_block",
    "RayConfig", "RaySweepResult", "ResourceError", "TransversalTime", "grid_passage",
    "oracle_passage", "ray_sweep", "transversal",
    "GeometricRho", "Normalizer", "ScalingConstants", "Source", "Stretched", "constants",
    "fit_constants", "phi", "psi", "rescale", "right_rate_asymptote", "subsequence",
    "tw_tail_exponents", "unrescale",
]
