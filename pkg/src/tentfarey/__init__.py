"""Transfer operators, symbolic coding and renewal structure of the maps T_r
interpolating between the tent map (r = 0) and the Farey map (r = 1)."""
from .errors import CapacityError, InputError, NumericalDomainError, UnsupportedError
from .maps import (MobiusMatrix, branch_derivative, compose_branches, eval_map,
                   fixed_point_nonzero, inverse_branch_matrix, invariant_density, measure_mu)
from .quadratic import QuadraticSurd

__version__ = "0.1.0"
