"""First-arrival-position distributions for molecular timing channels.

Submodules: :mod:`~vdfap.specfun` (Bessel K and exponential integrals),
:mod:`~vdfap.distribution` and :mod:`~vdfap.sampling` (the VDFAP family),
:mod:`~vdfap.capacity` (capacity bounds), :mod:`~vdfap.validation` and
:mod:`~vdfap.suite` (Monte-Carlo checks), :mod:`~vdfap.cli`.
"""

from .capacity import (
    CapacityBounds,
    CovarianceConstraint,
    bounds,
    bounds_sweep,
    capacity_lower_bound,
    capacity_upper_bound,
)
from .distribution import (
    FapParams,
    VdfapParams,
    cf_gradient,
    cf_hessian,
    covariance,
    differential_entropy,
    fap_pdf,
    mean,
    stable_sum,
    vdfap_cf,
    vdfap_logpdf,
    vdfap_pdf,
)
from .errors import (
    ConfigurationError,
    DegenerateSampleError,
    DimensionError,
    DomainError,
    MismatchError,
    ParameterError,
    VdfapError,
)
from .sampling import SampleBatch, SamplingMethod, read_batch, sample_exact, write_batch
from .validation import SimulationConfig, knn_entropy, simulate_first_arrival

__version__ = "0.1.0"
