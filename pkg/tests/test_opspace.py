import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opspace_lab.cmatrix import DegenerateBasisError, ShapeError, matrix_units
from opspace_lab.discover import cartan
from opspace_lab.opspace import (
    MembershipError,
    amp_norm,
    amp_norm_batch,
    amplify,
    from_coeffs,
    full_matrices,
    load_space,
    make_space,
    member,
    random_element,
    space_from_json,
    space_to_json,
    upper_triangular,
)
from oracles import block, crandn

E11, E12, E21, E22 = matrix_units(2)
seeds = st.integers(0, 2**32 - 1)


def test_make_space_examples():
    ut = make_space("ut", 2, 2, [E11, E12, E22])
    assert ut.dim == 3
    m2 = make_space("m2", 2, 2, [E11, E12, E21, E22])
    assert m2.dim == 4
    assert m2.residual(crandn(np.random.default_rng(1), 2, 2)) <= 1e-14
    with pytest.raises(DegenerateBasisError):
        make_space("bad", 2, 2, [E11, E11])
    with pytest.raises(ShapeError):
        make_space("bad", 2, 2, [np.eye(3)])


def test_onb_is_orthonormal():
    sp = cartan(3, 3)
    flat = sp.onb.reshape(sp.dim, -1)
    assert np.allclose(flat.conj() @ flat.T, np.eye(sp.dim), atol=1e-14)


def test_member_examples():
    ut = upper_triangular(2)
    assert member(ut, E21) == (False, pytest.approx(1.0))
    ok, r = member(ut, E11 + E12)
    assert ok and r <= 1e-15
    ok, r = member(cartan(3, 2), E12)
    assert not ok and r == pytest.approx(1 / np.sqrt(2), abs=1e-12)


def test_amplify_and_norms(rng):
    sp = full_matrices(2)
    x, y = crandn(rng, 2, 2), crandn(rng, 2, 2)
    z = np.zeros((2, 2))
    v = np.linalg.qr(crandn(rng, 2, 2))[0]
    assert amp_norm(amplify(sp, [[v]])) == pytest.approx(1.0, abs=1e-12)
    assert amp_norm(amplify(sp, [[x, z], [z, x]])) == pytest.approx(np.linalg.norm(x, 2), abs=1e-12)
    off = amplify(sp, [[z, x], [y, z]])
    assert off.norm == pytest.approx(max(np.linalg.norm(x, 2), np.linalg.norm(y, 2)), abs=1e-12)
    assert np.array_equal(off.realization, block([[z, x], [y, z]]))
    assert amp_norm(amplify(sp, [[z, z], [z, z]])) == 0
    V = amplify(sp, [[v, z, z], [z, v, z], [z, z, v]])
    assert V.norm == pytest.approx(1.0, abs=1e-12)


def test_amplify_names_offending_entry():
    ut = upper_triangular(2)
    z = np.zeros((2, 2))
    with pytest.raises(MembershipError) as info:
        amplify(ut, [[E11, z], [E21, z]])
    assert info.value.position == (1, 0)
    assert info.value.residual == pytest.approx(1.0)


@given(seeds, st.integers(1, 3))
def test_cross_norm_on_elementary_grids(seed, n):
    rng = np.random.default_rng(seed)
    sp = upper_triangular(3)
    x = sp.from_coefficients(crandn(rng, sp.dim))
    for i in range(n):
        for j in range(n):
            grid = np.zeros((n, n, 3, 3), dtype=complex)
            grid[i, j] = x
            assert amplify(sp, grid).norm == pytest.approx(np.linalg.norm(x, 2), rel=1e-12)


@given(seeds)
def test_padding_and_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    sp = upper_triangular(2)
    e = random_element(sp, 2, rng)
    assert abs(e.pad(3).norm - e.norm) <= 1e-12
    perm = e.with_blocks(e.blocks[::-1])
    assert abs(perm.norm - e.norm) <= 1e-12
    perm = e.with_blocks(e.blocks[:, ::-1])
    assert abs(perm.norm - e.norm) <= 1e-12


def test_random_element_is_unit_and_member(rng):
    sp = upper_triangular(3)
    e = random_element(sp, 3, rng)
    assert e.norm == pytest.approx(1.0, abs=1e-12)
    assert e.membership_residual <= 1e-12


def test_amp_norm_batch(rng):
    sp = full_matrices(2)
    c = crandn(rng, 4, 2, 2, sp.dim)
    assert np.allclose(amp_norm_batch(sp, c), [from_coeffs(sp, ci).norm for ci in c], atol=1e-13)


def test_space_json_round_trip(tmp_path):
    sp = cartan(3, 2)
    path = tmp_path / "s.json"
    path.write_text(json.dumps(space_to_json(sp)))
    back = load_space(path)
    assert back.name == sp.name and back.shape == sp.shape
    assert all(np.array_equal(a, b) for a, b in zip(back.basis, sp.basis))
    with pytest.raises(ValueError):
        space_from_json({"name": "x", "basis": []})
