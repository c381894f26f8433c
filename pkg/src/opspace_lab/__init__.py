"""Numerical laboratory for ternary products on concrete operator spaces.

Spaces are finite-dimensional subspaces of complex matrices. The package
builds the binary product induced by a distinguished element v, checks the
block-matrix identities behind it, and tests the two conditions under which
the space is a unital operator algebra.
"""

from .cmatrix import opnorm, tolerances
from .discover import adjoint_intersection, cartan, find_unit, tro_closure
from .opspace import (
    AmpElement,
    OperatorSpace,
    amplify,
    column_space,
    diagonal,
    full_matrices,
    load_space,
    make_space,
    upper_triangular,
)
from .product import dot, matrix_dot, product_context
from .triple import main_identity_residual, triple
from .verify import (
    check_complete_contractivity,
    check_condition_i,
    check_condition_ii,
    run_lemma_suite,
    verify_space,
)

__version__ = "0.1.0"
