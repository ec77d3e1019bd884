"""Random simplicial complexes on marked Poisson processes: sampling,
construction, Z2 homology, functionals, Boolean-model nerves and Monte-Carlo
experiments."""
from .boolean import build_nerve, nerve_of_grains, raster_betti_2d
from .complex import SimplicialComplex, build_complex, build_coupled, difference_operator
from .errors import (
    CapabilityError,
    ConfigError,
    ModelDefinitionError,
    RcmError,
    RejectedInputError,
    ReplicationError,
    StructuralError,
)
from .experiments import (
    ExperimentConfig,
    Model,
    degree_distribution_experiment,
    mixing_parameter,
    poincare_check,
    run_clt_experiment,
    run_covariance_experiment,
    stabilization_probe,
)
from .functionals import euler_characteristic, parse_functional
from .grains import Grain, PlacedGrain, grains_intersect
from .homology import betti, betti_vector
from .kernels import ConnectionKernel, make_kernel
from .pointprocess import MarkSampler, PointConfiguration, Window, sample_poisson

__version__ = "0.1.0"

__all__ = [
    "CapabilityError",
    "ConfigError",
    "ConnectionKernel",
    "ExperimentConfig",
    "Grain",
    "MarkSampler",
    "Model",
    "ModelDefinitionError",
    "PlacedGrain",
    "PointConfiguration",
    "RcmError",
    "RejectedInputError",
    "ReplicationError",
    "SimplicialComplex",
    "StructuralError",
    "Window",
    "betti",
    "betti_vector",
    "build_complex",
    "build_coupled",
    "build_nerve",
    "degree_distribution_experiment",
    "difference_operator",
    "euler_characteristic",
    "grains_intersect",
    "make_kernel",
    "mixing_parameter",
    "nerve_of_grains",
    "parse_functional",
    "poincare_check",
    "raster_betti_2d",
    "run_clt_experiment",
    "run_covariance_experiment",
    "sample_poisson",
    "stabilization_probe",
]
