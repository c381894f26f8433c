"""Unit-candidate search, TRO-closure testing, A cap A*, and Cartan factors."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .cmatrix import ShapeError, matrix_to_json, matrix_units, opnorm, opnorm_batch, tolerances
from .opspace import OperatorSpace, make_space
from .product import condition_i_residuals
from .triple import triple

__all__ = [
    "UnitCandidate",
    "ClosureReport",
    "unit_objective",
    "find_unit",
    "tro_closure",
    "adjoint_intersection",
    "spin_generators",
    "cartan",
]


@dataclass
class UnitCandidate:
    v: np.ndarray
    norm: float
    objective: float
    rms_residual: float
    cond_i_residual: float
    provenance: dict
    history: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "v": matrix_to_json(self.v),
            "norm": self.norm,
            "objective": self.objective,
            "rms_residual": self.rms_residual,
            "cond_i_residual": self.cond_i_residual,
            "provenance": self.provenance,
        }


@dataclass
class ClosureReport:
    max_triple_residual: float
    worst: tuple
    is_tro: bool

    def to_json(self) -> dict:
        return {"max_triple_residual": self.max_triple_residual, "worst": list(self.worst), "is_tro": self.is_tro}


def unit_objective(space: OperatorSpace, v: np.ndarray) -> np.ndarray:
    """sum_i ||{q_i, v, v} - q_i||_F^2 over the orthonormal basis q_i.

    ``v`` may be a stack (..., p, q); the result has the leading shape.
    """
    v = np.asarray(v, dtype=np.complex128)[..., None, :, :]
    diff = triple(space.onb, v, v) - space.onb
    return np.sum(np.abs(diff) ** 2, axis=(-3, -2, -1))


def _projected(space: OperatorSpace, c: np.ndarray) -> np.ndarray:
    """Matrices for coefficient rows c (..., d), scaled into the unit ball."""
    v = space.from_coefficients(c)
    if v.ndim == 2:
        return v / max(opnorm(v), 1.0)
    return v / np.maximum(opnorm_batch(v), 1.0)[..., None, None]


def _objective(space: OperatorSpace, c: np.ndarray) -> np.ndarray:
    return unit_objective(space, _projected(space, c))


def _halving_search(space, c, grad, f, t):
    """Halve t until the objective drops, then keep halving while it keeps dropping."""
    def trial(t):
        cn = c - t * grad
        return cn, float(_objective(space, cn))

    while t > 1e-16:
        cn, fn = trial(t)
        if fn < f:
            break
        t *= 0.5
    else:
        return t, None, f
    while t > 1e-16:
        cm, fm = trial(0.5 * t)
        if fm >= fn:
            break
        t, cn, fn = 0.5 * t, cm, fm
    return t, cn, fn


def find_unit(space: OperatorSpace, restarts: int = 16, steps: int = 200, seed: int = 0,
              h: float = 1e-5) -> UnitCandidate:
    """Search the unit ball of A for v minimizing the condition-(i) defect.

    The objective is f(P(c)), where c are onb coefficients and P scales onto
    the unit ball; the iterate c itself is left unprojected so the kink of
    the ball does not stall the descent. Gradients are central differences
    in the real and imaginary parts of c. Each step halves its length until
    f drops, so every history is non-increasing.
    """
    rng = np.random.default_rng(seed)
    d = space.dim
    best: UnitCandidate | None = None
    eye = np.eye(2 * d)
    pert = h * (eye[:, :d] + 1j * eye[:, d:])  # d real then d imaginary directions
    for r in range(restarts):
        c = (rng.standard_normal(d) + 1j * rng.standard_normal(d)) / np.sqrt(2)
        c = c / opnorm(space.from_coefficients(c))
        f = float(_objective(space, c))
        history = [f]
        t = 0.25
        for _ in range(steps):
            if f == 0.0:
                break
            fs = _objective(space, np.concatenate([c + pert, c - pert]))
            g = (fs[: 2 * d] - fs[2 * d:]) / (2 * h)
            grad = g[:d] + 1j * g[d:]
            if not np.any(grad):
                break
            t, c_new, f_new = _halving_search(space, c, grad, f, min(4.0 * t, 1.0))
            if c_new is None:
                break
            c, f = c_new, f_new
            history.append(f)
        v = _projected(space, c)
        cand = UnitCandidate(
            v=v,
            norm=opnorm(v),
            objective=f,
            rms_residual=float(np.sqrt(f / d)),
            cond_i_residual=float(np.max(condition_i_residuals(space, v))),
            provenance={"source": "search", "seed": int(seed), "restart": r, "restarts": int(restarts),
                        "steps": int(steps)},
            history=history,
        )
        if best is None or cand.objective < best.objective:
            best = cand
    return best


def tro_closure(space: OperatorSpace, tol: float | None = None) -> ClosureReport:
    """Distance of every b_i b_j* b_k (ordered triples of the user basis) to A."""
    tol = tolerances.equality if tol is None else tol
    b = np.array(space.basis)
    prods = np.einsum("iab,jcb,kcd->ijkad", b, b.conj(), b)
    coeffs = prods.reshape(prods.shape[:3] + (-1,)) @ space._onb_flat.conj()
    back = space.from_coefficients(coeffs)
    res = np.linalg.norm((prods - back).reshape(prods.shape[:3] + (-1,)), axis=-1)
    worst = np.unravel_index(int(np.argmax(res)), res.shape)
    top = float(res[worst])
    return ClosureReport(top, tuple(int(i) for i in worst), top <= tol)


def adjoint_intersection(space: OperatorSpace, rtol: float = 1e-10) -> OperatorSpace:
    """Basis of A cap A* for square ambient shape.

    With x = sum c_i q_i, x* lies in A iff (I - Pi) vec(x*) = 0, a linear
    condition on conj(c); its null space gives the intersection.
    """
    if space.p != space.q:
        raise ShapeError(f"A cap A* needs a square ambient space, got {space.p}x{space.q}")
    flat = space._onb_flat
    adj = np.array([q.conj().T.ravel() for q in space.onb]).T
    m = adj - flat @ (flat.conj().T @ adj)
    _, s, vh = np.linalg.svd(m.conj())
    rank = int(np.sum(s > rtol * max(1.0, s[0] if s.size else 0.0)))
    null = vh[rank:].conj()  # rows are coefficient vectors
    name = f"{space.name}_cap_adjoint"
    if null.shape[0] == 0:
        return OperatorSpace(name, space.p, space.q, (), np.zeros((0, space.p, space.q), dtype=np.complex128))
    mats = space.from_coefficients(null)
    mats = np.where(np.abs(mats) < 1e-14, 0, mats)
    return make_space(name, space.p, space.q, list(mats))


_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def spin_generators(n: int) -> list[np.ndarray]:
    """n pairwise anticommuting self-adjoint unitaries of size 2^(n//2).

    Jordan-Wigner strings of Pauli matrices; for odd n the last generator is
    the (Hermitian) product of the others.
    """
    if not 1 <= n <= 6:
        raise ValueError(f"spin factor generators supported for 1 <= n <= 6, got {n}")
    k = n // 2
    if k == 0:
        return [np.ones((1, 1), dtype=np.complex128)]
    gens = []
    for j in range(k):
        for p in ("X", "Y"):
            factors = ["Z"] * j + [p] + ["I"] * (k - j - 1)
            gens.append(reduce(np.kron, [_PAULI[f] for f in factors]))
    if n % 2:
        # i^k gamma_1...gamma_2k is Hermitian and anticommutes with every gamma_j
        g = (1j ** k) * reduce(np.matmul, gens)
        gens.append(g)
    return gens


def _check_spin(gens: list[np.ndarray]) -> None:
    dim = gens[0].shape[0]
    eye = np.eye(dim)
    for i, a in enumerate(gens):
        for j, b in enumerate(gens):
            target = 2 * eye if i == j else 0 * eye
            if np.abs(a @ b + b @ a - target).max() > 1e-12:
                raise AssertionError(f"spin generators {i}, {j} violate anticommutation")
        if np.abs(a - a.conj().T).max() > 1e-12:
            raise AssertionError(f"spin generator {i} is not self-adjoint")


def cartan(kind: int, n: int | None = None, p: int | None = None, q: int | None = None) -> OperatorSpace:
    """Finite-dimensional Cartan factors as concrete matrix spaces.

    1: M_{p,q};  2: antisymmetric n x n;  3: symmetric n x n;
    4: span of n anticommuting self-adjoint unitaries.
    """
    if kind == 1:
        p = p if p is not None else n
        q = q if q is not None else p
        if not p or not q:
            raise ValueError("type 1 needs p (and optionally q)")
        return make_space(f"cartan1_{p}x{q}", p, q, matrix_units(p, q))
    if kind in (2, 3):
        if n is None or n < 2:
            raise ValueError(f"type {kind} needs n >= 2")
        units = matrix_units(n)
        basis = []
        if kind == 3:
            basis += [units[i * n + i] for i in range(n)]
        sign = -1.0 if kind == 2 else 1.0
        basis += [units[i * n + j] + sign * units[j * n + i] for i in range(n) for j in range(i + 1, n)]
        return make_space(f"cartan{kind}_{n}", n, n, basis)
    if kind == 4:
        if n is None or not 2 <= n <= 6:
            raise ValueError("type 4 supported for 2 <= n <= 6 generators")
        gens = spin_generators(n)
        _check_spin(gens)
        dim = gens[0].shape[0]
        return make_space(f"cartan4_{n}", dim, dim, gens)
    raise ValueError(f"unknown Cartan type {kind}")
