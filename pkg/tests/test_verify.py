import json

import numpy as np
import pytest

from conftest import algebras
from opspace_lab.cmatrix import matrix_to_json
from opspace_lab.opspace import column_space, diagonal, full_matrices, upper_triangular
from opspace_lab.product import product_context
from opspace_lab.verify import (
    PreconditionError,
    check_complete_contractivity,
    check_condition_ii,
    condition_ii_ratio,
    half_ratio,
    lemma_cases,
    product_ratio,
    replay,
    replay_report,
    run_case,
    run_lemma_suite,
    verify_space,
)
from oracles import block, crandn

SMALL = (4, 40)


def ctx_identity(sp):
    return product_context(sp, np.eye(sp.p))


def test_case_ids_cover_every_statement():
    ids = [c.id for c in lemma_cases(3)]
    for want in ["L3.2", "L3.3", "L3.4", "L3.5", "L3.6", "L3.7", "L3.8", "L3.9", "L3.10", "L3.11", "L3.12",
                 "L4.1", "L4.2", "L4.3", "C4.4", "P4.5a[n=3]", "P4.5b[n=2]", "P4.5c[n=1]"]:
        assert want in ids
    assert len(ids) == len(set(ids))


@pytest.mark.parametrize("sp", algebras(), ids=lambda s: s.name)
def test_suite_on_algebras(sp):
    results = run_lemma_suite(ctx_identity(sp), trials=200, seed=1)
    for r in results:
        if r.id == "L4.3" and sp.name != "diagonal_2":
            continue
        assert r.passed, (r.id, r.max_residual)


def test_l43_general_form_fails_for_noncommutative_algebras():
    # With v = I the second triple has D-block (a d + c b)/2, the first (b c + d a)/2.
    ctx = ctx_identity(full_matrices(2))
    case = {c.id: c for c in lemma_cases()}["L4.3"]
    z = np.zeros((2, 2))
    a, b, c, d = np.array([[1, 0], [0, 0]]), z, z, np.array([[0, 1], [0, 0]])
    inputs = {k: np.asarray(m, dtype=complex) for k, m in zip("abcd", (a, b, c, d))}
    diff = 0.5 * (a @ d + c @ b) - 0.5 * (b @ c + d @ a)
    assert float(case.residuals(ctx, inputs)) == pytest.approx(np.linalg.norm(diff, 2))
    assert np.linalg.norm(diff, 2) == pytest.approx(0.5)
    # its particular case does hold
    r = run_case(ctx, {c.id: c for c in lemma_cases()}["L4.3p"], 200)
    assert r.passed
    r = run_case(ctx_identity(diagonal(2)), case, 200)
    assert r.passed


def test_lemma_examples():
    sp = upper_triangular(2)
    ctx = ctx_identity(sp)
    cases = {c.id: c for c in lemma_cases()}
    v = ctx.v
    assert float(cases["L3.2"].residuals(ctx, {"x": v})) == 0
    rng = np.random.default_rng(0)
    x = sp.from_coefficients(crandn(rng, 20, sp.dim))
    assert np.max(cases["L3.11"].residuals(ctx, {"x": x})) <= 1e-10
    y = sp.from_coefficients(crandn(rng, 20, sp.dim))
    assert np.max(cases["C4.4"].residuals(ctx, {"x": x, "y": y})) <= 1e-10


def test_witnesses_replay():
    ctx = product_context(upper_triangular(2), np.eye(2))
    for r in run_lemma_suite(ctx, trials=100, seed=3, n_max=2):
        assert abs(replay(ctx, json.loads(json.dumps(r.witness))) - r.max_residual) <= 1e-12


def test_suite_is_seeded():
    ctx = ctx_identity(upper_triangular(3))
    a = [r.to_json() for r in run_lemma_suite(ctx, trials=30, seed=5, n_max=1)]
    b = [r.to_json() for r in run_lemma_suite(ctx, trials=30, seed=5, n_max=1)]
    assert json.dumps(a) == json.dumps(b)


def test_condition_ii_examples():
    ctx = ctx_identity(upper_triangular(2))
    r = check_condition_ii(ctx, 2, SMALL, seed=0)
    assert r.ratio <= 1 + 1e-7 and r.status != "fail"
    assert r.ratio >= r.best_start
    assert float(condition_ii_ratio(ctx, ctx.v)) == pytest.approx(1.0, abs=1e-15)
    bad = product_context(column_space(2), np.array([[1.0], [0.0]]))
    with pytest.raises(PreconditionError):
        check_condition_ii(bad, 1, SMALL)


def test_condition_ii_ascent_is_monotone():
    ctx = ctx_identity(full_matrices(2))
    r = check_condition_ii(ctx, 2, SMALL, seed=2, include_v=False)
    for h in r.histories:
        assert np.all(np.diff(h) > 0)
    assert r.ratio >= r.best_start
    assert r.ratio >= 1 - 1e-4


def test_contractivity_examples():
    ctx = ctx_identity(full_matrices(2))
    res = check_complete_contractivity(ctx, 2, SMALL, seed=0)
    assert res.product.ratio <= 1 + 1e-7 and res.half.ratio <= 0.5 + 1e-7
    V = np.kron(np.eye(2), ctx.v)
    assert float(product_ratio(ctx, V, V)) == pytest.approx(1.0)
    # with X = Y = v the block triple is [0, v; 0, 0] / 2
    assert float(half_ratio(ctx, ctx.v, ctx.v)) == pytest.approx(0.5)


def test_injected_large_v_is_caught():
    sp = full_matrices(2)
    ctx = product_context(sp, 1.2 * np.eye(2))
    with pytest.raises(PreconditionError):
        check_complete_contractivity(ctx, 1, SMALL)
    res = check_complete_contractivity(ctx, 1, SMALL, force=True)
    assert res.product.status == "fail"
    assert res.product.ratio >= 1.2 - 1e-6


def test_verify_space_report_and_replay():
    ctx = ctx_identity(diagonal(2))
    rep = verify_space(ctx, trials=50, n_max=2, budget=SMALL, seed=11)
    data = rep.to_json()
    assert set(data) >= {"space", "v", "cases", "condition_i", "condition_ii", "contractivity", "verdict"}
    assert data["verdict"] == "unital operator algebra conditions satisfied"
    assert set(data["condition_ii"]) >= {"ratio", "witness", "budget", "seed"}
    again = verify_space(ctx, trials=50, n_max=2, budget=SMALL, seed=11).to_json()
    assert json.dumps(data, sort_keys=True) == json.dumps(again, sort_keys=True)
    diffs = replay_report(ctx, json.loads(json.dumps(data)))
    assert len(diffs) == len(data["cases"]) + 1 + 2 + 4
    assert max(d for _, d in diffs) <= 1e-12


def test_verify_space_stops_at_condition_i():
    ctx = product_context(column_space(2), np.array([[1.0], [0.0]]))
    data = verify_space(ctx, trials=10, n_max=1, budget=SMALL).to_json()
    assert data["status"] == "fail"
    assert data["condition_i"]["residual"] == pytest.approx(0.5)
    assert data["condition_i"]["witness"]["inputs"]["b"] == matrix_to_json(np.array([[0.0], [1.0]]))
    assert data["cases"] == []


def test_half_form_matches_blocks(rng):
    ctx = ctx_identity(full_matrices(2))
    X, Y = crandn(rng, 2, 2, 2)
    z = np.zeros((2, 2))
    t = 0.5 * (block([[Y, z], [z, z]]) @ block([[ctx.v, z], [z, z]]).conj().T @ block([[z, X], [z, z]]))
    want = np.linalg.norm(t, 2) / (np.linalg.norm(X, 2) * np.linalg.norm(Y, 2))
    assert float(half_ratio(ctx, X, Y)) == pytest.approx(want, abs=1e-14)
