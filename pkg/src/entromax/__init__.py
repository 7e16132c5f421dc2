"""Maximum-entropy distributions on matrix manifolds.

Exact integration oracles over rank-k Hermitian projections and real
rank-one outer products, a certified ellipsoid solver for the dual
program, and an exact sampler for the rank-one case.
"""
from .bounds import (InteriorEstimate, balance_bound_pk, bound_convex, bound_pk,
                     eta_estimate_pk, two_param_bound)
from .ellipsoid import (DualSolution, FirstOrderOracle, barycentric_entropy,
                        closeness_diagnostics, pk_oracle, solve_dual)
from .errors import (EntromaxError, InteriorityError, NumericInstabilityError,
                     ValidationError)
from .matrixcore import (DiagonalFrame, HermitianMatrix, Spectrum, cluster_labels,
                         cluster_spectrum, diagonal_frame, eigh)
from .mc import MCEstimate, mc_estimate_Ek, mc_marginal, sample_uniform_pk
from .oracle_p1 import build_eval_matrix, build_grad_matrix, eval_E1, grad_E1
from .oracle_pk import QPolynomial, eval_Ek, eval_and_grad_Ek, grad_Ek, q_eval
from .oracle_v1 import (INFINITE, SymmetricPD, eval_Ev1, gw_optimum, gw_sample,
                        projected_density_ratio)
from .precision import BigReal, DEFAULT_PREC
from .rng import RandomStreams
from .sampler import (PhaseVector, SimplexPoint, conditional_cdf, sample_p1,
                      sample_p1_many, sample_simplex, sample_simplex_many)

__version__ = "0.1.0"
