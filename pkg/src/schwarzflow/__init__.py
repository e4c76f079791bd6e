"""Rearrangement, radial elliptic solves, and nonlinear diffusion on
rotationally symmetric model geometries."""

__version__ = "0.1.0"

from .errors import (CompactProfile, DomainExceeded, EvalDomainError,
                     ExperimentInconsistent, GridMismatch, InvalidProfile,
                     NonConvergence, NonPositiveProfile, ParseError,
                     PreconditionOrderFails, ScenarioError, SchwarzflowError,
                     ShootingBracketFailed, StepRejected, UnsupportedTail,
                     VolumeExceedsManifold, ZeroEnergy)
from .exprparse import differentiate, evaluate, parse_expression, pretty
from .manifold import (ModelManifold, VolumeTable, curvatures, is_parabolic,
                       make_manifold, perimeter_ball, radius_of_volume,
                       smallball_expansion, unit_sphere_area, volume_ball)
from .nonlinearity import (Nonlinearity, expression_nonlinearity,
                           heat_nonlinearity, nonlinearity_from_spec,
                           power_nonlinearity, stefan_nonlinearity)
from .radial import (ConcentrationReport, DecreasingProfile, RadialFunction,
                     RadialGrid, SchwarzRearrangement, concentration_compare,
                     distribution_function, hardy_littlewood_gap, integral,
                     is_nonincreasing, level_perimeter, lp_norm, make_grid,
                     positive_part_integral, sample, schwarz_rearrangement)
from .polya import (CurvatureGap, NazarovResult, PolyaVerdict, TentFamily,
                    ViolationSearch, annulus_isoperimetric_check,
                    curvature_gap, dirichlet_energy, find_radial_violation,
                    nazarov_check, radial_polya_ratio)
from .elliptic import (Beta, EllipticConcentration, EllipticSolution,
                       beta_from_callable, beta_from_phi, discrete_step,
                       discrete_step_full, elliptic_concentration_check,
                       hopf_strict_decrease_check, radial_monotonicity_constant,
                       solve_semilinear, zero_beta)
from .parabolic import (NestedDomainReport, Trajectory, evolve, hminus1_norm,
                        nested_domain_limit, nonlinearity_integral)
from .cli import (Scenario, emit_outputs, load_scenario,
                  run_concentration_experiment, run_falsification_experiment)
