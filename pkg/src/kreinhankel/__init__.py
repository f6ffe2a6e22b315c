from kreinhankel.eigensolve import SolverSettings, jacobi_eigen, spectral_projection
from kreinhankel.errors import *
from kreinhankel.hankel import hankel_section, hilbert_alt, hilbert_shifted, parity_split
from kreinhankel.kernels import KernelSpec, ScalingMap, lambda_of_mu
from kreinhankel.operators import Operator, OperatorKind
from kreinhankel.quadrature import TestFunction, discretize, make_grid
from kreinhankel.structs import *
from kreinhankel.utils import LimitingNursery, run_parallel
