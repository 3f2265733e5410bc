"""starkit: planar star bodies, Khintchine-type dichotomies, transference."""

from .errors import (ArityError, DegenerateExpr, DimensionMismatch,
                     EmptySequence, FitFailure, IrrationalSkeleton,
                     NonConvergent, NoSolutions, NotSignificant, ParseError,
                     PrecisionExhausted, SkeletonMismatch, StarkitError)
from .exact import GOLDEN, INV_SQRT2, SQRT2, SQRT3, Quad
from .starbody import (Abs, Expr, FundamentalRectangle, GeoMean, HalfLine,
                       LinearForm, Max, Min, Scale, SkeletonReport,
                       classify_significance, classify_skeleton,
                       extract_skeleton, fundamental_rectangle, height,
                       irrational_cusp, multiplicative, union_jack,
                       width_profile)
from .dsl import (load_distance_function, parse_distance_function,
                  print_distance_function, tree_from_json, tree_to_json)
from .measure import (DensityResult, ResonantHit, ResonantSpec, batch_hits,
                      density, overlap_estimate, overlap_monotonicity_probe,
                      overlap_record, resonant_measure, resonant_membership,
                      resonant_record)
from .khintchine import (BestApproximation, DichotomyReport, PsiFamily,
                         best_approximations, dichotomy_report,
                         euler_phi_sum_check, parse_psi, series_partial_sums,
                         tail_measure, totient_sieve)
from .circle import (ContinuedFraction, CoverageStage, GapPartition,
                     IntervalSystem, continued_fraction, coverage_experiment,
                     covering_check, generalized_ubiquity_lambda,
                     interval_system, three_distance_partition,
                     ubiquity_sequence)
from .transference import (MatrixEncoding, NuVector, TransferParams,
                           TransferReport, TransferWitness, build_matrices,
                           f_plus, find_nu, nearest_signed_distance, phi_form,
                           phi_target, solve_system_i, solve_system_ii,
                           system_ii_values, verify_khintchine_transfer,
                           verify_prop5, verify_theorem_multitrans,
                           verify_theorem_unionjack)

__version__ = "0.1.0"
