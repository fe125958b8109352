"""Contact-geometric BPS Skyrme model on the 3-sphere.

Exact polynomial calculus in the left-invariant frame (``poly``, ``s3geom``),
the curl spectrum on polynomial vector fields (``curlspec``), maps of S^3 and
their pullbacks (``maps``), energy, degree and Beltrami-map checks
(``analysis``), and equivariant gradient flow (``flow``).
"""

from .analysis import (Coupling, EnergyReport, PropertyReport, bound_report, bps_defect,
                       check_properties, convergence_study, degree, energy, energy_and_degree,
                       pointwise_coupling, suspension_coupling)
from .curlspec import EigenField, OperatorPencil, SpectrumReport, assemble, eigenspace, norm_constancy, spectrum
from .errors import (ClusterAmbiguityError, ConfigurationError, ContactSkyrmeError, EvaluationError,
                     InputError, NotFoundError, ResourceError)
from .flow import FlowOptions, FlowResult, Profile, minimize, reduced_energy
from .kernels import BACKEND
from .maps import MapS3, make_map, suspension_map
from .poly import SpherePoly, frame_derive, inner_product, sphere_integral
from .s3geom import GridS3, PolyVectorField, build_grid, curl_frame, quadrature

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ClusterAmbiguityError", "ConfigurationError", "ContactSkyrmeError", "Coupling",
    "EigenField", "EnergyReport", "EvaluationError", "FlowOptions", "FlowResult", "GridS3",
    "InputError", "MapS3", "NotFoundError", "OperatorPencil", "PolyVectorField", "Profile",
    "PropertyReport", "ResourceError", "SpectrumReport", "SpherePoly", "assemble", "bound_report",
    "bps_defect", "build_grid", "check_properties", "convergence_study", "curl_frame", "degree",
    "eigenspace", "energy", "energy_and_degree", "frame_derive", "inner_product", "make_map",
    "minimize", "norm_constancy", "pointwise_coupling", "quadrature", "reduced_energy", "spectrum",
    "sphere_integral", "suspension_coupling", "suspension_map",
]
