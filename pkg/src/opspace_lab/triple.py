"""Ternary products {x,y,z} = (x y* z + z y* x)/2 and the Jordan main identity."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cmatrix import ShapeError, opnorm, tolerances
from .opspace import OperatorSpace, random_member

__all__ = [
    "AssumedRestrictionWarning",
    "TripleContext",
    "triple_context",
    "triple",
    "main_identity_residual",
    "norm_inequality_gap",
    "quadratic",
    "polarized_Q",
    "projected_gap_search",
]


class AssumedRestrictionWarning(UserWarning):
    pass


def _adj(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def _check_shapes(*mats) -> None:
    shape = np.shape(mats[0])[-2:]
    for m in mats[1:]:
        if np.shape(m)[-2:] != shape:
            raise ShapeError(f"triple arguments must share a shape, got {[np.shape(x) for x in mats]}")


def triple(x, y, z) -> np.ndarray:
    """{x,y,z} = (x y* z + z y* x) / 2.

    Broadcasts over leading axes, so stacks of matrices are fine.
    """
    x, y, z = (np.asarray(t, dtype=np.complex128) for t in (x, y, z))
    _check_shapes(x, y, z)
    ys = _adj(y)
    return 0.5 * (x @ ys @ z + z @ ys @ x)


def main_identity_residual(a, b, x, y, z) -> float:
    """Operator norm of {a,b,{x,y,z}} - {{a,b,x},y,z} + {x,{b,a,y},z} - {x,y,{a,b,z}}."""
    _check_shapes(a, b, x, y, z)
    lhs = triple(a, b, triple(x, y, z))
    rhs = triple(triple(a, b, x), y, z) - triple(x, triple(b, a, y), z) + triple(x, y, triple(a, b, z))
    return opnorm(lhs - rhs)


def norm_inequality_gap(x, a, y) -> float:
    """||{x,a,y}|| - ||x|| ||a|| ||y||; nonpositive for the ambient product."""
    _check_shapes(x, a, y)
    return opnorm(triple(x, a, y)) - opnorm(x) * opnorm(a) * opnorm(y)


def quadratic(a, z) -> np.ndarray:
    """Q_a(z) = {z, a, z}."""
    return triple(z, a, z)


def polarized_Q(a, x, y) -> np.ndarray:
    """Q_a(x, y) = (Q_a(x+y) - Q_a(x) - Q_a(y)) / 2."""
    x, y = np.asarray(x, dtype=np.complex128), np.asarray(y, dtype=np.complex128)
    _check_shapes(a, x, y)
    return 0.5 * (quadratic(a, x + y) - quadratic(a, x) - quadratic(a, y))


@dataclass(frozen=True)
class TripleContext:
    """Records whether the partial triple product on ``space`` may be taken
    as the restriction of the ambient one.

    ``basis`` is "tro" (space is TRO-closed), "adjoint_intersection" (every
    middle argument lies in A and A*), or "assumed" (user assertion).
    """

    space: OperatorSpace
    restriction_valid: bool
    basis: str
    middle: tuple = ()

    @property
    def assumed(self) -> bool:
        return self.basis == "assumed"


def triple_context(space: OperatorSpace, middle=(), assume: bool = False,
                   tol: float | None = None) -> TripleContext:
    """Decide whether ambient triple products are justified on ``space``.

    ``middle`` lists the elements that will occupy the middle slot.
    """
    from .discover import tro_closure  # local import, discover depends on this module

    tol = tolerances.equality if tol is None else tol
    middle = tuple(np.asarray(m, dtype=np.complex128) for m in middle)
    if tro_closure(space, tol=tol).is_tro:
        return TripleContext(space, True, "tro", middle)
    if middle and space.p == space.q:
        ok = all(space.residual(m) <= tol and space.residual(_adj(m)) <= tol for m in middle)
        if ok:
            return TripleContext(space, True, "adjoint_intersection", middle)
    if assume:
        warnings.warn(
            f"partial triple product on {space.name} taken as the ambient restriction without justification",
            AssumedRestrictionWarning,
            stacklevel=2,
        )
        return TripleContext(space, True, "assumed", middle)
    return TripleContext(space, False, "none", middle)


def projected_gap_search(space: OperatorSpace, project: Callable[[np.ndarray], np.ndarray],
                         samples: int, rng: np.random.Generator) -> tuple[float, tuple]:
    """Largest ||P{x,a,y}|| - ||x|| ||a|| ||y|| seen over random unit members.

    ``project`` should be a contractive projection onto ``space``. A positive
    return value is a finding, not an error.
    """
    best, witness = -np.inf, ()
    for _ in range(samples):
        x, a, y = (random_member(space, rng) for _ in range(3))
        gap = opnorm(project(triple(x, a, y))) - opnorm(x) * opnorm(a) * opnorm(y)
        if gap > best:
            best, witness = gap, (x, a, y)
    return float(best), witness
