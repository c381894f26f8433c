"""Residual checks for the block-matrix identities behind the product, and
the two conditions characterizing unital operator algebras.

Every lemma case is a function of named random inputs returning the operator
norm of (left side - right side). Inputs are batched along a leading axis, so
one call evaluates all trials; the worst trial is kept as a replayable
witness.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cmatrix import fingerprint, matrix_from_json, matrix_to_json, opnorm, opnorm_batch
from .opspace import OperatorSpace
from .product import ProductContext, dot, embed2
from .triple import triple

__all__ = [
    "PreconditionError",
    "LemmaCase",
    "CaseResult",
    "AscentResult",
    "ContractivityResult",
    "VerificationReport",
    "PASS_RESIDUAL",
    "RATIO_SLACK",
    "lemma_cases",
    "run_case",
    "run_lemma_suite",
    "check_condition_i",
    "check_condition_ii",
    "check_complete_contractivity",
    "verify_space",
    "replay",
    "replay_report",
]

PASS_RESIDUAL = 1e-9
RATIO_SLACK = 1e-7


class PreconditionError(ValueError):
    """Condition (i) fails, so the norm checks are not meaningful."""


def _norms(a: np.ndarray) -> np.ndarray:
    """Operator norms over the leading axes (a single matrix gives a 0-d array)."""
    a = np.asarray(a)
    r, c = a.shape[-2:]
    return opnorm_batch(a.reshape(-1, r, c)).reshape(a.shape[:-2])


def _E(ref, a=None, b=None, c=None, d=None) -> np.ndarray:
    """2 x 2 block matrix [[a, b], [c, d]]; None means a zero block shaped like ref."""
    zero = np.zeros_like(ref)
    pick = [zero if t is None else np.broadcast_to(t, ref.shape) for t in (a, b, c, d)]
    top = np.concatenate(pick[:2], axis=-1)
    bottom = np.concatenate(pick[2:], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _blk(m, i, j, p, q):
    return m[..., i * p:(i + 1) * p, j * q:(j + 1) * q]


# Lemma residuals. Arguments are batched members of A; v comes from ctx.

def _l32(ctx, x):
    v, T = ctx.v, triple
    out = []
    for s in (1.0, -1.0):
        lhs = T(_E(x, x, s * x), _E(x, v, s * v), _E(x, x, s * x))
        t = T(x, v, x)
        out.append(_norms(lhs - 2 * _E(x, t, s * t)))
    return np.maximum(*out)


def _l33(ctx, x):
    v, T = ctx.v, triple
    rhs = T(_E(x, None, x), _E(x, v), _E(x, None, x)) + 2 * T(_E(x, x), _E(x, None, v), _E(x, None, x))
    return _norms(_E(x, T(x, v, x)) - rhs)


def _l34(ctx, a, b):
    v, T = ctx.v, triple
    out = []
    for s in (1.0, -1.0):
        lhs = T(_E(a, a, None, None, s * a), _E(a, v, None, None, s * v), _E(a, b, None, None, s * b))
        t = T(a, v, b)
        out.append(_norms(lhs - _E(a, t, None, None, s * t)))
    return np.maximum(*out)


def _l35(ctx, x, y):
    v, T = ctx.v, triple
    first = T(_E(x, x), _E(x, d=v), _E(x, d=y)) + T(_E(x, y), _E(x, d=v), _E(x, d=x))
    second = T(_E(x, d=x), _E(x, v), _E(x, d=y))
    return np.maximum(_norms(first), _norms(second))


def _l36(ctx, x, a, b, c, d):
    v, T = ctx.v, triple
    terms = (
        T(_E(x, x), _E(x, d=v), _E(x, a, b, c)),
        T(_E(x, x), _E(x, d=v), _E(x, d=v)),
        T(_E(x, b=x), _E(x, c=v), _E(x, a, b, None, d)),
        T(_E(x, b=x), _E(x, c=v), _E(x, c=v)),
    )
    return np.max([_norms(t) for t in terms], axis=0)


def _l37(ctx, x, y):
    v, T = ctx.v, triple
    rhs = (T(_E(x, b=x), _E(x, v), _E(x, b=y)) + T(_E(x, x), _E(x, b=v), _E(x, b=y))
           + T(_E(x, b=x), _E(x, b=v), _E(x, y)))
    return _norms(_E(x, T(x, v, y)) - rhs)


def _l38(ctx, x):
    v, T = ctx.v, triple
    out = []
    for s in (1.0, -1.0):
        lhs = T(_E(x, None, x, None, s * x), _E(x, None, v, None, s * v), _E(x, None, x, None, s * x))
        t = 2 * T(x, v, x)
        out.append(_norms(lhs - _E(x, None, t, None, s * t)))
    return np.maximum(*out)


def _l39(ctx, x):
    v, T = ctx.v, triple
    rhs = T(_E(x, d=x), _E(x, b=v), _E(x, d=x)) + 2 * T(_E(x, d=x), _E(x, d=v), _E(x, b=x))
    return _norms(_E(x, b=T(x, v, x)) - rhs)


def _l310(ctx, x, y):
    v, T = ctx.v, triple
    rhs = (T(_E(x, d=x), _E(x, b=v), _E(x, d=y)) + T(_E(x, d=x), _E(x, d=v), _E(x, b=y))
           + T(_E(x, d=y), _E(x, d=v), _E(x, b=x)))
    return _norms(_E(x, b=T(x, v, y)) - rhs)


def _l311(ctx, x):
    v = ctx.v
    return _norms(triple(_E(x, b=v), _E(x, v), _E(x, b=x)))


def _l312(ctx, x, y):
    v = ctx.v
    return _norms(triple(_E(x, b=x), _E(x, v), _E(x, b=y)))


def _d313(ctx, x, y):
    return _norms(triple(x, ctx.v, y) - 0.5 * (dot(ctx, y, x, check=False) + dot(ctx, x, y, check=False)))


def _l41(ctx, x, y):
    v, T = ctx.v, triple
    lhs = T(_E(x, c=x), _E(x, v), _E(x, b=y))
    rhs = T(_E(x, c=x), _E(x, c=v), _E(x, d=y))
    half = 0.5 * _E(x, d=dot(ctx, x, y, check=False))
    return np.maximum(_norms(lhs - rhs), _norms(lhs - half))


def _l42(ctx, x):
    v = ctx.v
    a = _norms(dot(ctx, x, v, check=False) - x)
    b = _norms(dot(ctx, v, x, check=False) - x)
    return np.maximum(a, b)


def _l43(ctx, a, b, c, d):
    v, T = ctx.v, triple
    p, q = ctx.space.shape
    first = T(_E(a, None, a, None, b), _E(a, b=v), _E(a, None, c, None, d))
    B, D = _blk(first, 0, 1, p, q), _blk(first, 1, 1, p, q)
    second = T(_E(a, c=a, d=b), _E(a, c=v), _E(a, c=c, d=d))
    special = T(_E(a, d=v), _E(a, c=v), _E(a, c=a)) - T(_E(a, d=v), _E(a, b=v), _E(a, b=a))
    return np.max([
        _norms(first - _E(a, b=B, d=D)),
        _norms(second - _E(a, c=B, d=D)),
        _norms(special),
    ], axis=0)


def _l43p(ctx, x):
    # the particular case a = 0, b = v, c = x, d = 0
    v, T = ctx.v, triple
    return _norms(T(_E(x, d=v), _E(x, c=v), _E(x, c=x)) - T(_E(x, d=v), _E(x, b=v), _E(x, b=x)))


def _c44(ctx, x, y):
    v = ctx.v
    return _norms(triple(_E(x, y), _E(x, d=v), _E(x, d=x)))


# Level-n inputs for the amplified statements are np x nq realizations.

def _to_blocks(X, p, q):
    n = X.shape[-2] // p
    return np.swapaxes(X.reshape(X.shape[:-2] + (n, p, n, q)), -3, -2)


def _from_blocks(b):
    n, _, p, q = b.shape[-4:]
    return np.swapaxes(b, -3, -2).reshape(b.shape[:-4] + (n * p, n * q))


def _entry_product(ctx: ProductContext, X, Y):
    """Realization of X.Y, (X.Y)_ij = sum_k x_ik . y_kj, each term through the triple product."""
    p, q = ctx.space.shape
    xb, yb = _to_blocks(X, p, q), _to_blocks(Y, p, q)
    xs = xb[..., :, :, None, :, :]  # x_ik at [i, k, j]
    ys = yb[..., None, :, :, :, :]  # y_kj at [i, k, j]
    xs, ys = np.broadcast_arrays(xs, ys)
    return _from_blocks(dot(ctx, xs, ys, check=False).sum(axis=-4))


def _bigV(ctx: ProductContext, X):
    n = X.shape[-2] // ctx.space.p
    return np.kron(np.eye(n), ctx.v)


def _p45a(ctx, X, Y):
    V = _bigV(ctx, X)
    return _norms(triple(X, V, V) - X)


def _p45b(ctx, X, Y):
    V = _bigV(ctx, X)
    ref = np.broadcast_to(V, X.shape)
    big = 2 * triple(_E(ref, Y), _E(ref, V), _E(ref, b=X))
    return _norms(big - _E(ref, b=_entry_product(ctx, Y, X)))


def _p45c(ctx, X, Y):
    V = _bigV(ctx, X)
    return _norms(_entry_product(ctx, X, Y) + _entry_product(ctx, Y, X) - 2 * triple(X, V, Y))


@dataclass(frozen=True)
class LemmaCase:
    """One displayed identity. ``level`` 0 means inputs are members of A;
    level n >= 1 means inputs are elements of M_n(A) (as realizations)."""

    id: str
    args: tuple
    fn: Callable = field(repr=False)
    level: int = 0

    def residuals(self, ctx: ProductContext, inputs: dict) -> np.ndarray:
        return np.asarray(self.fn(ctx, **{k: inputs[k] for k in self.args}))


_MEMBER_CASES = [
    ("L3.2", ("x",), _l32),
    ("L3.3", ("x",), _l33),
    ("L3.4", ("a", "b"), _l34),
    ("L3.5", ("x", "y"), _l35),
    ("L3.6", ("x", "a", "b", "c", "d"), _l36),
    ("L3.7", ("x", "y"), _l37),
    ("L3.8", ("x",), _l38),
    ("L3.9", ("x",), _l39),
    ("L3.10", ("x", "y"), _l310),
    ("L3.11", ("x",), _l311),
    ("L3.12", ("x", "y"), _l312),
    ("D3.13", ("x", "y"), _d313),
    ("L4.1", ("x", "y"), _l41),
    ("L4.2", ("x",), _l42),
    ("L4.3", ("a", "b", "c", "d"), _l43),
    ("L4.3p", ("x",), _l43p),
    ("C4.4", ("x", "y"), _c44),
]


def lemma_cases(n_max: int = 3) -> list[LemmaCase]:
    cases = [LemmaCase(i, a, f) for i, a, f in _MEMBER_CASES]
    for n in range(1, n_max + 1):
        for tag, f in (("a", _p45a), ("b", _p45b), ("c", _p45c)):
            cases.append(LemmaCase(f"P4.5{tag}[n={n}]", ("X", "Y"), f, n))
    return cases


def _random_members(space: OperatorSpace, rng, count: int) -> np.ndarray:
    c = (rng.standard_normal((count, space.dim)) + 1j * rng.standard_normal((count, space.dim))) / np.sqrt(2)
    x = space.from_coefficients(c)
    return x / opnorm_batch(x)[:, None, None]


def _random_amp(space: OperatorSpace, n: int, rng, count: int) -> np.ndarray:
    shape = (count, n, n, space.dim)
    c = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    X = _from_blocks(space.from_coefficients(c))
    return X / opnorm_batch(X)[:, None, None]


@dataclass
class CaseResult:
    id: str
    trials: int
    max_residual: float
    witness: dict
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.max_residual <= PASS_RESIDUAL

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "trials": self.trials,
            "max_residual": self.max_residual,
            "status": "pass" if self.passed else "fail",
            "witness": self.witness,
        }


def _case_seed(seed: int, case_id: str) -> np.random.Generator:
    # per-case streams keep results independent of case order
    return np.random.default_rng([seed, *case_id.encode()])


def run_case(ctx: ProductContext, case: LemmaCase, trials: int, seed: int = 0) -> CaseResult:
    t0 = time.perf_counter()
    rng = _case_seed(seed, case.id)
    if case.level == 0:
        inputs = {k: _random_members(ctx.space, rng, trials) for k in case.args}
    else:
        inputs = {k: _random_amp(ctx.space, case.level, rng, trials) for k in case.args}
    res = case.residuals(ctx, inputs)
    i = int(np.argmax(res))
    witness = {
        "kind": "lemma",
        "id": case.id,
        "trial": i,
        "inputs": {k: matrix_to_json(inputs[k][i]) for k in case.args},
        "residual": float(res[i]),
    }
    return CaseResult(case.id, trials, float(res[i]), witness, time.perf_counter() - t0)


def run_lemma_suite(ctx: ProductContext, trials: int = 1000, seed: int = 0, n_max: int = 3) -> list[CaseResult]:
    return [run_case(ctx, c, trials, seed) for c in lemma_cases(n_max)]


def check_condition_i(ctx: ProductContext) -> tuple[float, int]:
    """max over the user basis of ||{b, v, v} - b||, with the argmax index."""
    res = [opnorm(triple(b, ctx.v, ctx.v) - b) for b in ctx.space.basis]
    i = int(np.argmax(res))
    return float(res[i]), i


# Adversarial ascent over M_n(A). Parameters are the real and imaginary parts
# of onb coefficients; every objective here is scale invariant.

@dataclass
class AscentResult:
    ratio: float
    witness: dict
    status: str
    budget: tuple
    seed: int
    n: int
    best_start: float = float("nan")
    histories: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "ratio": self.ratio,
            "status": self.status,
            "witness": self.witness,
            "budget": list(self.budget),
            "seed": self.seed,
            "best_start": self.best_start,
        }


def _params_to_amp(space: OperatorSpace, n: int, r: np.ndarray) -> np.ndarray:
    m = n * n * space.dim
    c = (r[..., :m] + 1j * r[..., m:]).reshape(r.shape[:-1] + (n, n, space.dim))
    return _from_blocks(space.from_coefficients(c))


def _ascend(objective: Callable[[np.ndarray], np.ndarray], starts: np.ndarray, steps: int,
            h: float = 1e-5, stall: float = 1e-12) -> tuple[np.ndarray, np.ndarray, list, bool]:
    """Monotone gradient ascent from each start; returns best value and point
    per start, the histories, and whether any start converged.

    A start counts as converged when no step along the gradient improves the
    objective, or when a step gains less than ``stall`` (relative).
    """
    m = starts.shape[-1]
    eye = np.eye(m)
    best_f, best_r, histories, converged = [], [], [], False
    for r in starts:
        r = r / np.linalg.norm(r)
        f = float(objective(r[None])[0])
        hist, t = [f], 0.25
        for _ in range(steps):
            fs = objective(np.concatenate([r + h * eye, r - h * eye]))
            g = (fs[:m] - fs[m:]) / (2 * h)
            gn = np.linalg.norm(g)
            if not np.isfinite(gn) or gn == 0.0:
                converged = True
                break
            g = g / gn
            t = min(4.0 * t, 1.0)
            moved = False
            while t > 1e-12:
                cand = r + t * g
                fc = float(objective(cand[None])[0])
                if fc > f:
                    # keep halving while that does better
                    while t > 1e-12:
                        c2 = r + 0.5 * t * g
                        f2 = float(objective(c2[None])[0])
                        if f2 <= fc:
                            break
                        t, cand, fc = 0.5 * t, c2, f2
                    r, f, moved = cand / np.linalg.norm(cand), fc, True
                    break
                t *= 0.5
            if not moved:
                converged = True
                break
            hist.append(f)
            if hist[-1] - hist[-2] <= stall * max(1.0, abs(f)):
                converged = True
                break
        best_f.append(f)
        best_r.append(r)
        histories.append(hist)
    return np.array(best_f), np.array(best_r), histories, converged


def _gate(ctx: ProductContext, tol: float, force: bool) -> None:
    res, i = check_condition_i(ctx)
    if res > tol and not force:
        raise PreconditionError(
            f"condition (i) fails on {ctx.space.name}: residual {res:.3e} at basis element {i}"
        )


def _starts(rng, count: int, m: int) -> np.ndarray:
    return rng.standard_normal((count, m))


def _v_start(ctx: ProductContext, n: int) -> np.ndarray:
    # X = V (v on every diagonal block), as parameters
    c = np.zeros((n, n, ctx.space.dim), dtype=np.complex128)
    cv = ctx.space.coefficients(ctx.v)
    for i in range(n):
        c[i, i] = cv
    c = c.reshape(-1)
    return np.concatenate([c.real, c.imag])


def _status(ratio: float, bound: float, converged: bool) -> str:
    if ratio > bound + RATIO_SLACK:
        return "fail"
    return "pass" if converged else "inconclusive"


def condition_ii_ratio(ctx: ProductContext, X) -> np.ndarray:
    """||{X, V, X}|| / ||X||^2 for realizations X (batched)."""
    X = np.asarray(X, dtype=np.complex128)
    V = _bigV(ctx, X)
    return _norms(triple(X, V, X)) / _norms(X) ** 2


def check_condition_ii(ctx: ProductContext, n: int, budget=(32, 200), seed: int = 0,
                       tol: float = 1e-10, force: bool = False, include_v: bool = True) -> AscentResult:
    """Estimate sup ||{X,V,X}|| / ||X||^2 over M_n(A) by multistart ascent.

    With ``include_v`` one extra start is X = V, where the ratio is 1 when
    condition (i) holds.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    _gate(ctx, tol, force)
    restarts, steps = budget
    rng = np.random.default_rng([seed, 2, n])
    m = 2 * n * n * ctx.space.dim
    starts = _starts(rng, restarts, m)
    if include_v:
        starts = np.concatenate([_v_start(ctx, n)[None], starts])

    def obj(r):
        return condition_ii_ratio(ctx, _params_to_amp(ctx.space, n, r))

    f0 = obj(starts / np.linalg.norm(starts, axis=1, keepdims=True))
    vals, pts, hists, conv = _ascend(obj, starts, steps)
    k = int(np.argmax(vals))
    X = _params_to_amp(ctx.space, n, pts[k])
    ratio = float(condition_ii_ratio(ctx, X))
    witness = {"kind": "condition_ii", "n": n, "inputs": {"X": matrix_to_json(X)}, "residual": ratio}
    return AscentResult(ratio, witness, _status(ratio, 1.0, conv), (restarts, steps), seed, n,
                        float(np.max(f0)), hists)


@dataclass
class ContractivityResult:
    product: AscentResult
    half: AscentResult

    @property
    def status(self) -> str:
        s = {self.product.status, self.half.status}
        return "fail" if "fail" in s else "inconclusive" if "inconclusive" in s else "pass"

    def to_json(self) -> dict:
        return {"status": self.status, "product": self.product.to_json(), "half": self.half.to_json()}


def product_ratio(ctx: ProductContext, X, Y) -> np.ndarray:
    """||X.Y|| / (||X|| ||Y||) with X.Y built entrywise from the triple product."""
    return _norms(_entry_product(ctx, X, Y)) / (_norms(X) * _norms(Y))


def half_ratio(ctx: ProductContext, X, Y) -> np.ndarray:
    """||{[[Y,0],[0,0]], [[V,0],[0,0]], [[0,X],[0,0]]}|| / (||X|| ||Y||)."""
    X, Y = np.asarray(X, dtype=np.complex128), np.asarray(Y, dtype=np.complex128)
    V = _bigV(ctx, X)
    ref = np.broadcast_to(V, X.shape)
    t = triple(_E(ref, Y), _E(ref, V), _E(ref, b=X))
    return _norms(t) / (_norms(X) * _norms(Y))


def _pair_ascent(ctx, n, budget, seed, which, include_v) -> AscentResult:
    restarts, steps = budget
    rng = np.random.default_rng([seed, 3 if which == "product" else 4, n])
    m = 2 * n * n * ctx.space.dim
    starts = _starts(rng, restarts, 2 * m)
    if include_v:
        vs = _v_start(ctx, n)
        starts = np.concatenate([np.concatenate([vs, vs])[None], starts])
    fn = product_ratio if which == "product" else half_ratio

    def split(r):
        return _params_to_amp(ctx.space, n, r[..., :m]), _params_to_amp(ctx.space, n, r[..., m:])

    def obj(r):
        return fn(ctx, *split(r))

    f0 = np.max([obj(s[None])[0] for s in starts])
    vals, pts, hists, conv = _ascend(obj, starts, steps)
    k = int(np.argmax(vals))
    X, Y = split(pts[k])
    ratio = float(fn(ctx, X, Y))
    bound = 1.0 if which == "product" else 0.5
    witness = {"kind": which, "n": n, "inputs": {"X": matrix_to_json(X), "Y": matrix_to_json(Y)},
               "residual": ratio}
    return AscentResult(ratio, witness, _status(ratio, bound, conv), (restarts, steps), seed, n, float(f0), hists)


def check_complete_contractivity(ctx: ProductContext, n: int, budget=(32, 200), seed: int = 0,
                                 tol: float = 1e-10, force: bool = False,
                                 include_v: bool = True) -> ContractivityResult:
    """Estimate sup ||X.Y|| / (||X|| ||Y||) (bound 1) and the half form (bound 1/2) over M_n(A)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    _gate(ctx, tol, force)
    return ContractivityResult(
        _pair_ascent(ctx, n, budget, seed, "product", include_v),
        _pair_ascent(ctx, n, budget, seed, "half", include_v),
    )


@dataclass
class VerificationReport:
    space: str
    v: np.ndarray
    cases: list
    condition_i: dict
    condition_ii: list
    contractivity: list
    verdict: str

    @property
    def status(self) -> str:
        statuses = [c.to_json()["status"] for c in self.cases]
        statuses.append(self.condition_i["status"])
        statuses += [r.status for r in self.condition_ii] + [r.status for r in self.contractivity]
        if "fail" in statuses:
            return "fail"
        return "inconclusive" if "inconclusive" in statuses else "pass"

    def to_json(self) -> dict:
        def worst(rs):
            if not rs:
                return None
            return max(rs, key=lambda r: r.ratio).to_json()

        return {
            "space": self.space,
            "v": fingerprint(self.v),
            "v_matrix": matrix_to_json(self.v),
            "cases": [c.to_json() for c in self.cases],
            "condition_i": self.condition_i,
            "condition_ii": {
                **(worst(self.condition_ii) or {}),
                "levels": [r.to_json() for r in self.condition_ii],
            },
            "contractivity": {
                "status": _merge([r.status for r in self.contractivity]),
                "ratio": max((r.product.ratio for r in self.contractivity), default=None),
                "half_ratio": max((r.half.ratio for r in self.contractivity), default=None),
                "levels": [r.to_json() for r in self.contractivity],
            },
            "verdict": self.verdict,
            "status": self.status,
        }


def _merge(statuses) -> str:
    if "fail" in statuses:
        return "fail"
    return "inconclusive" if "inconclusive" in statuses else "pass"


VERDICTS = {
    "pass": "unital operator algebra conditions satisfied",
    "fail": "unital operator algebra conditions violated",
    "inconclusive": "inconclusive within search budget",
}


def condition_i_record(ctx: ProductContext, tol: float) -> dict:
    res, i = check_condition_i(ctx)
    return {
        "residual": res,
        "status": "pass" if res <= tol else "fail",
        "witness": {"kind": "condition_i", "index": i, "inputs": {"b": matrix_to_json(ctx.space.basis[i])},
                    "residual": res},
    }


def verify_space(ctx: ProductContext, *, lemmas: bool = True, conditions: bool = True, trials: int = 1000,
                 n_max: int = 3, budget=(32, 200), seed: int = 0, tol: float = 1e-10,
                 force: bool = False) -> VerificationReport:
    """Full pipeline: condition (i), then (if it holds or ``force``) the norm
    checks at levels 1..n_max, and the lemma suite."""
    cond_i = condition_i_record(ctx, tol)
    ok = cond_i["status"] == "pass" or force
    cases = run_lemma_suite(ctx, trials, seed, n_max) if lemmas and ok else []
    c2, cc = [], []
    if conditions and ok:
        for n in range(1, n_max + 1):
            c2.append(check_condition_ii(ctx, n, budget, seed, tol, force=True))
            cc.append(check_complete_contractivity(ctx, n, budget, seed, tol, force=True))
    report = VerificationReport(ctx.space.name, ctx.v, cases, cond_i, c2, cc, "")
    report.verdict = VERDICTS[report.status]
    return report


def replay(ctx: ProductContext, witness: dict) -> float:
    """Re-evaluate a witness record; returns the residual (or ratio)."""
    kind = witness["kind"]
    inputs = {k: matrix_from_json(v) for k, v in witness.get("inputs", {}).items()}
    if kind == "lemma":
        cases = {c.id: c for c in lemma_cases(9)}
        return float(cases[witness["id"]].residuals(ctx, inputs))
    if kind == "condition_i":
        b = inputs["b"]
        return opnorm(triple(b, ctx.v, ctx.v) - b)
    if kind == "condition_ii":
        return float(condition_ii_ratio(ctx, inputs["X"]))
    if kind == "product":
        return float(product_ratio(ctx, inputs["X"], inputs["Y"]))
    if kind == "half":
        return float(half_ratio(ctx, inputs["X"], inputs["Y"]))
    raise ValueError(f"unknown witness kind {kind!r}")


def _witnesses(report: dict):
    for c in report.get("cases", []):
        yield c["witness"]
    ci = report.get("condition_i")
    if ci:
        yield ci["witness"]
    for r in report.get("condition_ii", {}).get("levels", []):
        yield r["witness"]
    for r in report.get("contractivity", {}).get("levels", []):
        yield r["product"]["witness"]
        yield r["half"]["witness"]


def replay_report(ctx: ProductContext, report: dict, failures_only: bool = False) -> list[tuple[dict, float]]:
    """(witness, |recomputed - recorded|) for every witness in a report dict."""
    out = []
    for w in _witnesses(report):
        if failures_only and w.get("status") == "pass":
            continue
        out.append((w, abs(replay(ctx, w) - w["residual"])))
    return out
