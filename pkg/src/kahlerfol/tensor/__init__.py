"""Chart-level differential geometry kernel."""

from .calculus import (
    covariant_derivative,
    covariant_derivative_array,
    covariant_from,
    covector_norm,
    exterior_derivative,
    exterior_derivative_array,
    frame_components,
    lie_derivative_endomorphism_array,
    lie_derivative_metric,
    lie_derivative_metric_array,
    tensor_norm,
    vector_norm,
)
from .curvature import (
    SIGN_CONVENTION,
    CurvatureData,
    TensorValue,
    bianchi_residuals,
    christoffel,
    christoffel_array,
    curvature_at,
    metric_jet,
    ricci,
    riemann,
    scalar_curvature,
    sectional,
    sectional_from,
    wedge_norm_sq,
)
from .fd import DEFAULT_FD, FDConfig, derivative, hessian, jacobian, observed_order, second_derivative
from .geodesic import GeodesicPath, geodesic_integrate, jacobi_integrate, jacobi_residual
from .metric import (
    ChartBox,
    ChartMetric,
    DegeneracyError,
    DomainError,
    NumericError,
    gram_schmidt,
    orthonormal_frame,
)
