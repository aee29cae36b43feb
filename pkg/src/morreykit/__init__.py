"""
Numerical toolkit for classical and semigroup-averaged Morrey seminorms of
sampled functions on a periodic grid.

The package computes ball-oscillation seminorms in which the ball mean is
replaced by a heat or Poisson semigroup average at the matching scale, plus
the associated maximal, square-function, tent-measure, and atomic-duality
quantities, and verifies the identities tying them together (reproducing
formula, kernel bounds, exact L^2 square-function ratios, dual pairing).
"""

from .grid import (Ball, Field, Grid, SpectralField, ball_enumerate,
                   ball_lp_deviation, ball_mean, forward_transform,
                   inverse_transform, make_ball, weighted_type_norm)
from .operators import (GeneratorSpec, KernelProfile, TruncationError, apply_P,
                        apply_Q, cross_validate_kernel, kernel_eval,
                        kernel_t_derivative, periodized_kernel,
                        poisson_constant, verify_kernel_bounds)
from .quadrature import (LogTimeGrid, calderon_constant_check,
                         calderon_reproduce, integrate_dt_over_t,
                         reproduction_constant)
from .norms import (MorreyParams, SeminormReport, carleson_tent_norm,
                    classical_seminorm, g_function_ratio, maximal_seminorm,
                    poisson_pointwise_seminorm, semigroup_gap_diagnostics,
                    semigroup_seminorm, square_function_seminorm)
from .atoms import (Atom, atomic_lower_bound, dual_identity_check, dual_mass,
                    extremal_atom_family, make_atom, pair)
from .corpus import CorpusFunction, default_corpus, power_law_field, realize
from .fieldio import (read_field_binary, read_field_csv, write_field_binary,
                      write_field_csv)

__version__ = "0.1.0"
