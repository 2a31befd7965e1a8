"""Prescribed zeroes and poles for Helson zeta functions.

Given finite multisets of zeroes and poles in a vertical strip, this
package constructs a unimodular completely multiplicative character
chi whose zeta function zeta_chi(s) = sum chi(n) n^-s continues
meromorphically with exactly the prescribed singularities, and
verifies the construction numerically through independent routes.
"""

from .chi import (BlockRecord, ChiAssignment, RemainderLedger, build_chi,
                  extend_leftovers, greedy_block, load_table, save_table,
                  verify_assignment)
from .engine import ContourSpec, Evaluator, default_contour, make_evaluator, \
    residue_contour
from .errors import (AmbiguousWinding, BudgetExceeded, ChecksumMismatch,
                     DegenerateExponent, DomainError, ExponentOutOfRange,
                     FormatError, HelsonError, NotPrime, OutOfRange,
                     OverlapError, PathBlocked, PoleHit, SeparationError,
                     StripViolation)
from .generator import (GeneratorFunction, build_generator, eval_generator,
                        eval_simple_oracle, select_exponent)
from .mellin import (QClosedForm, QNumeric, eval_q, forward_mellin_check,
                     fourier_inverse_numeric, integrate_q,
                     mellin_inverse_closed, mellin_transform_q,
                     partial_fractions)
from .pipeline import RunConfig, config_to_plan, parse_config, run_pipeline
from .powerlog import PowerLogSum
from .primes import checkpoints, primes_upto, segmented_primes
from .targets import (ResiduePlan, StripMode, TargetPoint, TargetSpec,
                      build_residue_plan, parse_complex, validate_spec)

__version__ = "0.1.0"
