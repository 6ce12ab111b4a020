"""General position sets over finite fields: geometry, spectra, supersaturation,
containers and random Turán experiments."""
from .errors import (
    BudgetExceeded, DivisionByZero, EmptyHypergraph, GPFQError, IdentityFailed, MixedAmbient,
    NotPrimePower, RoundLimit, WrongDimension,
)
from .field import field_new
from .geometry import (
    Flat, Point, PointSet, affine_span, enumerate_flats, flat_count, gaussian_binomial,
    hyperplanes_containing, is_evasive, is_general_position, moment_curve, space,
)
from .incidence import (
    atypical_hyperplanes, build_incidence, mixing_deviation, second_eigenvalue,
    second_eigenvalue_numeric, verify_cube_identity,
)
from .supersat import (
    UniformHypergraph, balanced_triples, build_coplanar_hypergraph, build_critical_hypergraph,
    check_bounded, count_coplanar, count_critical, delta_tau, find_critical, is_critical,
)
from .containers import ContainerFamily, ContainerParams, container_step, iterate_containers
from .lab import (
    CountRecord, TrialRecord, alpha_deletion_lower, alpha_exact, count_gp_sets,
    first_moment_bound, phase_sweep, sample_random_set,
)
from .kernels import BACKEND

__version__ = "0.1.0"
