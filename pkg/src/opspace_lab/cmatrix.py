"""Dense complex matrix kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; every other
module in the package is written over the helpers here.
"""

from __future__ import annotations

import hashlib
from contextlib import contextmanager
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "ShapeError",
    "DegenerateBasisError",
    "NumericalError",
    "tolerances",
    "as_matrix",
    "matmul",
    "adjoint",
    "opnorm",
    "frobenius_inner",
    "project_onto_span",
    "block_embed",
    "matrix_units",
    "matrix_to_json",
    "matrix_from_json",
    "fingerprint",
]


class ShapeError(ValueError):
    pass


class DegenerateBasisError(ValueError):
    """Raised when a list of matrices is linearly dependent."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class NumericalError(ArithmeticError):
    pass


class _Tolerances:
    """Global absolute tolerances for unit-scale data."""

    def __init__(self) -> None:
        self.equality = 1e-9
        self.membership = 1e-9

    @contextmanager
    def override(self, equality: float | None = None, membership: float | None = None) -> Iterator[None]:
        saved = (self.equality, self.membership)
        if equality is not None:
            self.equality = float(equality)
        if membership is not None:
            self.membership = float(membership)
        try:
            yield
        finally:
            self.equality, self.membership = saved


tolerances = _Tolerances()


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or 0 in m.shape:
        raise ShapeError(f"expected a nonempty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericalError("matrix has non-finite entries")
    return m


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def fingerprint(a) -> str:
    m = np.ascontiguousarray(np.asarray(a, dtype=np.complex128))
    h = hashlib.sha256(repr(m.shape).encode() + m.tobytes()).hexdigest()
    return h[:16]


def opnorm(a) -> float:
    """Operator (spectral) norm: the largest singular value.

    Full SVD on purpose; inputs are small and the tolerances downstream are
    tight.
    """
    m = np.asarray(a, dtype=np.complex128)
    try:
        s = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge for input {fingerprint(m)}") from exc
    return float(s[0]) if s.size else 0.0


def opnorm_batch(stack: np.ndarray) -> np.ndarray:
    """Operator norms of a stack of matrices with shape (..., p, q)."""
    try:
        return np.linalg.svd(stack, compute_uv=False)[..., 0]
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"batched SVD did not converge ({fingerprint(stack)})") from exc


def frobenius_inner(a, b) -> complex:
    """<a, b> = trace(b* a)."""
    return complex(np.vdot(np.asarray(b), np.asarray(a)))


def _gram(basis: Sequence[np.ndarray]) -> np.ndarray:
    flat = np.array([np.asarray(b, dtype=np.complex128).ravel() for b in basis])
    return flat.conj() @ flat.T


def check_independent(basis: Sequence[np.ndarray], rtol: float = 1e-10) -> None:
    """Raise DegenerateBasisError naming the first dependent member."""
    flat = np.array([np.asarray(b, dtype=np.complex128).ravel() for b in basis])
    scale = max(float(np.max(np.linalg.norm(flat, axis=1))), 1e-300)
    for k in range(1, len(basis) + 1):
        s = np.linalg.svd(flat[:k], compute_uv=False)
        if s[-1] <= rtol * scale:
            raise DegenerateBasisError(
                f"basis member {k - 1} is linearly dependent on members 0..{k - 2}", k - 1
            )


def project_onto_span(x, basis: Sequence) -> tuple[np.ndarray, float]:
    """Least-squares coefficients of ``x`` against ``basis`` (Frobenius).

    Returns ``(coefficients, residual)`` where the residual is the Frobenius
    distance from ``x`` to the span.
    """
    x = as_matrix(x)
    mats = [as_matrix(b) for b in basis]
    if not mats:
        return np.zeros(0, dtype=np.complex128), float(np.linalg.norm(x))
    for i, b in enumerate(mats):
        if b.shape != x.shape:
            raise ShapeError(f"basis member {i} has shape {b.shape}, expected {x.shape}")
    check_independent(mats)
    a = np.array([b.ravel() for b in mats]).T
    coeffs, *_ = np.linalg.lstsq(a, x.ravel(), rcond=None)
    residual = float(np.linalg.norm(x.ravel() - a @ coeffs))
    return coeffs, residual


def block_embed(blocks) -> np.ndarray:
    """Assemble an n x n grid of p x q blocks into one np x nq matrix."""
    rows = list(blocks)
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise ShapeError("block grid must be square and nonempty")
    first = as_matrix(rows[0][0])
    for i, r in enumerate(rows):
        for j, b in enumerate(r):
            if np.shape(b) != first.shape:
                raise ShapeError(f"block ({i},{j}) has shape {np.shape(b)}, expected {first.shape}")
    return np.block([[as_matrix(b) for b in r] for r in rows])


def matrix_units(p: int, q: int | None = None) -> list[np.ndarray]:
    """E_ij for all (i, j), row-major."""
    q = p if q is None else q
    units = []
    for i in range(p):
        for j in range(q):
            e = np.zeros((p, q), dtype=np.complex128)
            e[i, j] = 1.0
            units.append(e)
    return units


def matrix_to_json(a) -> list:
    m = np.asarray(a, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    try:
        arr = np.array(data, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ShapeError(f"matrix payload is not a rectangular grid of [re, im] pairs: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ShapeError(f"matrix payload must have shape rows x cols x 2, got {arr.shape}")
    return as_matrix(arr[..., 0] + 1j * arr[..., 1])
