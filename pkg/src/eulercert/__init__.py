"""eulercert: explicit incompressible-flow solution families with
numerical certification of the claims made about them."""

from .expressions import (
    EvalDomainError,
    ExpressionError,
    Jet2,
    ParseError,
    UnknownIdentifierError,
    eval_jet,
    eval_real,
    format_expr,
    parse,
)
from .fields import (
    FieldError,
    InadmissiblePointError,
    PressureInfo,
    SingularSetDescriptor,
    SolutionPair,
    SpaceTimePoint,
    VelocityJet,
    pressure_value,
    radial_field_jet,
    vorticity,
)
from .catalog import (
    TransformSpec,
    apply_transform,
    ij_vortex,
    linear3d,
    ns_halfspace_blowup,
    preset,
    preset_ids,
    twin_wave,
)
from .verification import (
    CertificationReport,
    RegionError,
    SampleRegion,
    Tolerances,
    certify,
    default_region,
    divergence,
    fd_crosscheck,
    momentum_residual,
    sample_points,
    vorticity_transport_residual,
)
from .analysis import (
    EnergyResult,
    FitResult,
    NormResult,
    NormSpec,
    ProbeResult,
    RateFit,
    affine_probe,
    annulus_lq_norm,
    blowup_exponent_fit,
    l2_energy_difference,
    twin_wave_form_check,
)

__version__ = "0.1.0"
