"""Scaled graphs and signed scaled graphs of nonlinear operators.

Estimation of gain/phase point clouds through Hilbert-transform signed phase,
complex-plane separation certificates for feedback interconnections, and
passivity / negative-imaginary system certification.
"""

from .errors import SsgraphError
from .signals import InputFamily, SampledSignal, generate_inputs, inner_product, norm
from .spectral import Spectrum, fourier, hilbert, hilbert_pairing
from .ssg import (
    PointCloud,
    SsgPoint,
    conjugate_cloud,
    estimate_ssg,
    invert_cloud,
    scale_negate_cloud,
    sg_from_ssg,
    signed_phase,
    unsigned_phase,
)
from .systems import (
    Feedback,
    OperatorModel,
    Parallel,
    Scale,
    Series,
    StateSpace,
    StaticNonlinearity,
    TransferFunction,
    analytic_region,
    freq_response,
    model_from_config,
    simulate,
)
from .geometry import (
    CloudRegion,
    Disk,
    HalfPlane,
    ParametricPerimeter,
    StabilityVerdict,
    VerticalLine,
    dist,
    separation_check,
)
from .certify import (
    check_passive,
    check_ssg_ni,
    ni_theorem_verdict,
    passivity_theorem_verdict,
    w_set_diagnostic,
)
from .loop import closed_loop_simulate, empirical_gain

__version__ = "0.1.0"
