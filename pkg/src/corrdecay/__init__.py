"""Correlation-decay computations for repulsive classical gasses."""

from .activity import (ActivityField, Modification, PiecewiseConstant, apply_boundary,
                       discount_at, evaluate_activity, hat_at, restrict_toward)
from .contraction import (ContractionCertificate, certify_neighborhood, convexity_probe,
                          delta_bound, effective_coordinate, g, g_lambda_derivative, g_prime,
                          psi, psi_inv)
from .mc import McConfig, detailed_balance_unit_checks, run_birth_death
from .observables import (ThermoPoint, density_from_pressure, packing_constants,
                          pressure_finite_volume)
from .oracle import (PartitionPolynomial, density_oracle, hard_rod_partition, kpoint_oracle,
                     logZ_bound_check, mean_density, partition_series, partition_zeros)
from .potential import (Potential, critical_activity, evaluate_potential, mayer,
                        temperedness_constant)
from .quadrature import QuadratureScheme, Region, integrate_mayer_ball, integrate_region
from .recursion import (DensityEstimate, apply_F, density, kpoint_density_telescoping,
                        log_partition_via_identity)

__version__ = "0.1.0"
