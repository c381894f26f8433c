"""The binary product built from amplified triple products.

For a distinguished element v, y.x is read off the (1,1) block of

    2 {[[x, 0], [0, 0]], [[0, v], [0, 0]], [[0, y], [0, 0]]}

Expanding the ambient product, only ``C B* A`` survives, so y.x = y v* x;
that closed form is kept alongside as an independent oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .cmatrix import ShapeError, as_matrix, opnorm, tolerances
from .opspace import AmpElement, OperatorSpace
from .triple import triple

__all__ = [
    "ClosureWarning",
    "ProductContext",
    "product_context",
    "condition_i_residuals",
    "embed2",
    "dot",
    "dot_oracle",
    "matrix_dot",
    "matrix_dot_oracle",
    "amplified_dot",
    "unit_law_residual",
    "symmetrization_residual",
    "associativity_residual",
    "closure_residual",
]


class ClosureWarning(UserWarning):
    """A product left the space; the result is returned anyway."""


@dataclass(frozen=True, eq=False)
class ProductContext:
    space: OperatorSpace
    v: np.ndarray
    norm_v: float
    cond_i_residual: float

    @property
    def V(self):
        return self.v


def condition_i_residuals(space: OperatorSpace, v) -> np.ndarray:
    """||{b, v, v} - b|| for each user basis member b."""
    v = np.asarray(v, dtype=np.complex128)
    return np.array([opnorm(triple(b, v, v) - b) for b in space.basis])


def product_context(space: OperatorSpace, v, tol: float | None = None) -> ProductContext:
    v = as_matrix(v)
    if v.shape != space.shape:
        raise ShapeError(f"v has shape {v.shape}, space is {space.shape}")
    tol = tolerances.membership if tol is None else tol
    r = space.residual(v)
    if r > tol:
        from .opspace import MembershipError

        raise MembershipError(f"v is not in {space.name} (residual {r:.3e})", None, r)
    v = v.copy()
    v.setflags(write=False)
    return ProductContext(space, v, opnorm(v), float(np.max(condition_i_residuals(space, v))))


def embed2(x, i: int, j: int) -> np.ndarray:
    """x placed in block (i, j) of a 2 x 2 block matrix, zeros elsewhere."""
    x = np.asarray(x, dtype=np.complex128)
    p, q = x.shape[-2:]
    out = np.zeros(x.shape[:-2] + (2 * p, 2 * q), dtype=np.complex128)
    out[..., i * p:(i + 1) * p, j * q:(j + 1) * q] = x
    return out


def _block(m: np.ndarray, i: int, j: int, p: int, q: int) -> np.ndarray:
    return m[..., i * p:(i + 1) * p, j * q:(j + 1) * q]


def closure_residual(ctx: ProductContext, z) -> float:
    return ctx.space.residual(z)


def _warn_if_outside(ctx: ProductContext, z: np.ndarray, what: str) -> None:
    r = ctx.space.residual(z)
    if r > tolerances.membership:
        warnings.warn(f"{what} is not in {ctx.space.name} (residual {r:.3e})", ClosureWarning, stacklevel=3)


def dot(ctx: ProductContext, y, x, check: bool = True) -> np.ndarray:
    """y.x through the level-2 amplified triple product."""
    p, q = ctx.space.shape
    y, x = np.asarray(y, dtype=np.complex128), np.asarray(x, dtype=np.complex128)
    if y.shape[-2:] != (p, q) or x.shape[-2:] != (p, q):
        raise ShapeError(f"dot arguments must have shape {(p, q)}")
    big = 2.0 * triple(embed2(x, 0, 0), embed2(ctx.v, 0, 1), embed2(y, 0, 1))
    z = _block(big, 0, 0, p, q).copy()
    if check and z.ndim == 2:
        _warn_if_outside(ctx, z, "product")
    return z


def dot_oracle(ctx: ProductContext, y, x) -> np.ndarray:
    """Closed form y v* x."""
    return np.asarray(y) @ ctx.v.conj().T @ np.asarray(x)


def _blocks_to_real(blocks: np.ndarray) -> np.ndarray:
    n, _, p, q = blocks.shape
    return blocks.transpose(0, 2, 1, 3).reshape(n * p, n * q)


def matrix_dot(ctx: ProductContext, X: AmpElement, Y: AmpElement) -> AmpElement:
    """Entrywise X.Y with z_ij = sum_k x_ik . y_kj."""
    if X.n != Y.n:
        raise ShapeError(f"levels differ: {X.n} vs {Y.n}")
    n = X.n
    # all n^3 entry products in one batched call
    xs = np.broadcast_to(X.blocks[:, :, None], (n, n, n) + X.blocks.shape[2:])  # x_ik at [i,k,j]
    ys = np.broadcast_to(Y.blocks[None, :, :], (n, n, n) + Y.blocks.shape[2:])  # y_kj at [i,k,j]
    z = dot(ctx, xs, ys, check=False).sum(axis=1)
    out = AmpElement(X.space, z)
    if out.membership_residual > tolerances.membership:
        warnings.warn(
            f"matrix product is not in M_{n}({ctx.space.name}) (residual {out.membership_residual:.3e})",
            ClosureWarning,
            stacklevel=2,
        )
    return out


def matrix_dot_oracle(ctx: ProductContext, X: AmpElement, Y: AmpElement) -> np.ndarray:
    """Realization-level X (V*) Y with V = diag(v, ..., v)."""
    V = np.kron(np.eye(X.n), ctx.v)
    return X.realization @ V.conj().T @ Y.realization


def amplified_dot(ctx: ProductContext, Y, X) -> np.ndarray:
    """Y.X for realizations at level n, via 2 {[[Y,0],[0,0]], [[V,0],[0,0]], [[0,X],[0,0]]}.

    ``Y`` and ``X`` are np x nq realizations (or stacks of them); returns the
    (1,2) block of the doubled level-2n triple product.
    """
    Y, X = np.asarray(Y, dtype=np.complex128), np.asarray(X, dtype=np.complex128)
    P, Q = X.shape[-2:]
    n = P // ctx.space.p
    V = np.kron(np.eye(n), ctx.v)
    big = 2.0 * triple(embed2(Y, 0, 0), embed2(V, 0, 0), embed2(X, 0, 1))
    return _block(big, 0, 1, P, Q)


def unit_law_residual(ctx: ProductContext, x) -> float:
    """max(||x.v - x||, ||v.x - x||)."""
    x = np.asarray(x, dtype=np.complex128)
    return max(opnorm(dot(ctx, x, ctx.v, check=False) - x), opnorm(dot(ctx, ctx.v, x, check=False) - x))


def symmetrization_residual(ctx: ProductContext, x, y) -> float:
    """||{x, v, y} - (x.y + y.x)/2||."""
    lhs = triple(x, ctx.v, y)
    rhs = 0.5 * (dot(ctx, x, y, check=False) + dot(ctx, y, x, check=False))
    return opnorm(lhs - rhs)


def associativity_residual(ctx: ProductContext, x, y, z) -> float:
    left = dot(ctx, dot(ctx, x, y, check=False), z, check=False)
    right = dot(ctx, x, dot(ctx, y, z, check=False), check=False)
    return opnorm(left - right)
