"""Kernel sums of inverse squares, their zeros and growth, and the entire functions behind them."""

from .errors import (ClearanceError, ConvergenceError, ExcludedRadiusError, IllConditionedFitError,
                     KslabError, NearMultipleZeroError, NoCriticalRaysError, NormalizationError,
                     PoleHitError, ResolutionError, ScenarioError, SelectionError,
                     ToleranceUnreachable, WindingError)
from .handles import EntireHandle, FunctionHandle
from .kernel_sum import (EvalResult, ExclusionSet, KernelSum, PoleSpec, build_exclusion_set,
                         kernel_sum_from_entire)
from .nevanlinna import (CharacteristicTable, characteristic, characteristic_table, defect_estimate,
                         integrated_counting, order_estimate, pole_counting, proximity,
                         zero_integrated_counting)
from .zero_finder import (Contour, ZeroSet, locate_zeros, rational_handle, winding_number,
                          zero_count_in)
from .good_radii import (GoodRadiusReport, circle_l1, circle_lp, good_radius_sequence,
                         keldysh_angular_measure, log_circle_diagnostic, octave_tail_sums,
                         select_subsequence)
from .ode_bridge import (CriticalRayFamily, PolynomialC, convergence_exponent_estimate,
                         corollary_fer_check, critical_rays, ode_residual, order_from_degree,
                         ray_distance_stats, recover_Q, sector_test, verify_zero_residue_condition)
from .taylor_ode import TaylorODESolution, airy_solution
from .entire_zoo import (CanonicalProduct, KreinSumSpec, airy, bi_inverse_square_expansion, bi_zeros,
                         canonical_product, cos_square_example, defect_half_example,
                         krein_regularized_sum, sine_family)

__version__ = "0.1.0"
