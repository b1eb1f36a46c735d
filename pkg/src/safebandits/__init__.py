"""Safe linear bandits under local differential privacy.

Multi-agent linear stochastic bandits coupled by a polytopic safety
constraint on the expected responses, with per-agent Gaussian response
privatization. The package provides the safe-set geometry (shrinkage and
sharpness), the private confidence-ellipsoid estimation, the two-phase
optimistic controller, a privacy-budget allocator, and a simulation harness
with CSV output and a CLI.
"""

from .allocator import (BudgetInputs, PrivacyVector, UnimprovabilityReport,
                        allocate, f_of_a, g_function, r_of_a,
                        verify_unimprovable)
from .estimation import (AgentEstimator, ConfidenceParams, beta,
                         in_confidence_set, min_eig_bound)
from .geometry import (GeometryError, Polytope, ScalingTransform, SimplexSpec,
                       apply_scaling, build_simplex, geometry_from_text,
                       max_shrinkage, project, sharpness, shrink, vertices)
from .harness import (EpisodeResult, ExperimentConfig, RoundRecord,
                      experiment_setup, load_config, normalized_average,
                      oracle_optimum, regret_bound, reproduce_experiment,
                      run_episode, run_sweep)
from .policy import (ActionProfile, ConservativeSafeSet, KnownSafeBall,
                     KnownSafeSet, OfuSolver, PhasePlan, is_truly_safe,
                     known_safe_set, ofu_select, plan_phases,
                     pure_explore_action)
from .privacy import (PerturbedResponse, PrivacyScheme, RngStreams,
                      alpha_levels, privatize, sigma_for)

__version__ = "0.1.0"
