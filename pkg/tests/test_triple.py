import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opspace_lab.cmatrix import ShapeError, matrix_units
from opspace_lab.discover import cartan
from opspace_lab.opspace import full_matrices, make_space, upper_triangular
from opspace_lab.triple import (
    AssumedRestrictionWarning,
    main_identity_residual,
    norm_inequality_gap,
    polarized_Q,
    projected_gap_search,
    triple,
    triple_context,
)
from oracles import crandn, triple_ref

E11, E12, E21, E22 = matrix_units(2)
seeds = st.integers(0, 2**32 - 1)


def test_triple_examples():
    assert np.array_equal(triple(E11, E11, E11), E11)
    x = crandn(np.random.default_rng(3), 2, 2)
    assert np.allclose(triple(x, np.eye(2), np.eye(2)), x, atol=1e-15)
    assert np.array_equal(triple(E12, E12, E11), E11 / 2)
    assert np.array_equal(triple_ref(E12, E12, E11), E11 / 2)


def test_triple_shape_check():
    with pytest.raises(ShapeError):
        triple(E11, np.eye(3), E11)


@given(seeds)
def test_triple_symmetry_and_conjugate_linearity(seed):
    rng = np.random.default_rng(seed)
    x, y, z = crandn(rng, 3, 2, 3)
    lam = complex(*rng.standard_normal(2))
    assert np.abs(triple(x, y, z) - triple(z, y, x)).max() <= 1e-14
    assert np.allclose(triple(x, lam * y, z), np.conj(lam) * triple(x, y, z), atol=1e-12)
    assert np.allclose(triple(x, y, z), triple_ref(x, y, z), atol=1e-14)


def test_triple_broadcasts(rng):
    xs = crandn(rng, 5, 2, 2)
    y = crandn(rng, 2, 2)
    out = triple(xs, y, xs)
    assert np.allclose(out[3], triple(xs[3], y, xs[3]))


def test_main_identity_examples(rng):
    assert main_identity_residual(E11, E11, E11, E11, E11) == 0
    args = crandn(rng, 5, 3, 3)
    assert main_identity_residual(*args) <= 1e-10
    # roundoff scales with the degree of the terms: cubic in (x, y, z), quintic overall
    a, b, x, y, z = args
    s = 1e3
    assert main_identity_residual(a, b, s * x, s * y, s * z) <= 1e-10 * s**3
    assert main_identity_residual(*(s * args)) <= 1e-10 * s**5


def test_gap_examples(rng):
    assert norm_inequality_gap(E11, E11, E11) == pytest.approx(0, abs=1e-15)
    # {E12, E11, E21} = E22 / 2
    assert np.array_equal(triple(E12, E11, E21), E22 / 2)
    assert norm_inequality_gap(E12, E11, E21) == pytest.approx(-0.5, abs=1e-15)
    x, a, y = crandn(rng, 3, 2, 2)
    x, a, y = (m / np.linalg.norm(m, 2) for m in (x, a, y))
    assert norm_inequality_gap(x, a, y) <= 1e-12


def test_polarized_q_examples(rng):
    a, x, y = crandn(rng, 3, 2, 2)
    assert np.allclose(polarized_Q(a, x, x), triple(x, a, x), atol=1e-12)
    assert np.allclose(polarized_Q(a, x, np.zeros((2, 2))), 0, atol=1e-14)
    assert np.allclose(polarized_Q(a, x, y), triple(x, a, y), atol=1e-10)


def test_triple_context_kinds():
    assert triple_context(full_matrices(2)).basis == "tro"
    ut = upper_triangular(2)
    assert triple_context(ut, middle=[np.eye(2)]).basis == "adjoint_intersection"
    ctx = triple_context(ut, middle=[E12])
    assert not ctx.restriction_valid and ctx.basis == "none"
    with pytest.warns(AssumedRestrictionWarning):
        ctx = triple_context(ut, middle=[E12], assume=True)
    assert ctx.assumed


def test_projected_gap_search_under_orthogonal_projection(rng):
    sp = cartan(3, 2)

    def proj(m):
        return sp.from_coefficients(sp.coefficients(m))

    gap, witness = projected_gap_search(sp, proj, 50, rng)
    assert np.isfinite(gap) and len(witness) == 3
    # the orthogonal projection onto symmetric matrices is contractive here
    assert gap <= 1e-10


def test_make_space_then_tro_context_for_row_space():
    row = make_space("row", 1, 2, [np.array([[1, 0]]), np.array([[0, 1]])])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert triple_context(row).restriction_valid
