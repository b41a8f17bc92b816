"""Grid-density laboratory for entropy, Fisher information, Poincare
constants, and entropic central-limit-theorem experiments."""

from .errors import (ConditionViolation, DegenerateDenominator,
                     DegenerateSupport, EntrolabError, IllConditioned,
                     InvalidSpec, IoFailure, NonCenteredInput,
                     PreconditionViolation, SolverFailure, SuspectedInfinite,
                     TailTruncation, TruncationWarning)
from .grid import (DEFAULT_CONFIG, DistributionSpec, GridConfig, GridDensity,
                   affine_transform, center, materialize, moments)
from .functionals import (ScoreFunction, entropy, fisher_information,
                          kl_to_matched_gaussian, l1_distance, score)
from .convolution import (de_bruijn_residual, gaussian_smooth,
                          integrated_debruijn_entropy, ou_evolve,
                          scaled_sum_density, sum_density)
from .poincare import (PoincareEstimate, SolverConfig,
                       convolution_stability_check, poincare_scaling_check,
                       restricted_poincare)
from .inequality_report import InequalityReport, make_report
from .inequalities import (JumpQuantities, ab_diagnostics, check_epi,
                           check_eji, check_compute_identities,
                           check_entropy_jump, check_fisher_sandwich,
                           check_iid_fisher, check_iid_jump_ball,
                           check_poincare_lower_bound,
                           check_projection_pythagoras,
                           check_score_projection)
from .clt import (CltRow, CltTrace, SequenceSpec, entropy_convergence_iff_check,
                  export_csv, geometric_rate_check, run_doubling,
                  run_plain_sum, sequence_poincare_constant,
                  subadditive_rate_bound)

__version__ = "0.1.0"
