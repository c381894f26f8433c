"""Concrete operator spaces A inside p x q matrices and their amplifications M_n(A)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .cmatrix import (
    ShapeError,
    as_matrix,
    check_independent,
    matrix_from_json,
    matrix_to_json,
    matrix_units,
    opnorm,
    opnorm_batch,
    tolerances,
)

__all__ = [
    "MembershipError",
    "OperatorSpace",
    "AmpElement",
    "make_space",
    "member",
    "amplify",
    "amp_norm",
    "from_coeffs",
    "random_element",
    "random_member",
    "space_to_json",
    "space_from_json",
    "load_space",
    "full_matrices",
    "upper_triangular",
    "diagonal",
    "column_space",
]


class MembershipError(ValueError):
    def __init__(self, message: str, position=None, residual: float = float("nan")):
        super().__init__(message)
        self.position = position
        self.residual = residual


@dataclass(frozen=True, eq=False)
class OperatorSpace:
    """A subspace of p x q complex matrices given by a basis.

    ``onb`` holds a Frobenius-orthonormal basis of the same span, shape
    (d, p, q); it is what all projections and coefficient views use.
    """

    name: str
    p: int
    q: int
    basis: tuple
    onb: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.p, self.q)

    @cached_property
    def _onb_flat(self) -> np.ndarray:
        # columns are the orthonormal basis vectors
        return self.onb.reshape(self.dim, -1).T

    def coefficients(self, x) -> np.ndarray:
        """Coefficients of the orthogonal projection of x on the onb."""
        x = np.asarray(x, dtype=np.complex128)
        return self._onb_flat.conj().T @ x.reshape(-1)

    def from_coefficients(self, c) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=np.complex128), self.onb, axes=(-1, 0))

    def residual(self, x) -> float:
        x = np.asarray(x, dtype=np.complex128)
        return float(np.linalg.norm(x - self.from_coefficients(self.coefficients(x))))

    def __str__(self) -> str:
        return f"{self.name} (dim {self.dim} in {self.p}x{self.q})"


def make_space(name: str, p: int, q: int, basis) -> OperatorSpace:
    mats = [as_matrix(b) for b in basis]
    if not mats:
        raise ValueError("basis must be nonempty")
    for i, b in enumerate(mats):
        if b.shape != (p, q):
            raise ShapeError(f"basis member {i} has shape {b.shape}, expected ({p}, {q})")
    check_independent(mats)
    flat = np.array([b.ravel() for b in mats]).T
    qmat, _ = np.linalg.qr(flat)
    onb = qmat.T.reshape(len(mats), p, q)
    for m in mats:
        m.setflags(write=False)
    onb.setflags(write=False)
    return OperatorSpace(name=name, p=int(p), q=int(q), basis=tuple(mats), onb=onb)


def member(space: OperatorSpace, x, tol: float | None = None) -> tuple[bool, float]:
    x = as_matrix(x)
    if x.shape != space.shape:
        raise ShapeError(f"expected shape {space.shape}, got {x.shape}")
    tol = tolerances.membership if tol is None else tol
    r = space.residual(x)
    return r <= tol, r


@dataclass(frozen=True, eq=False)
class AmpElement:
    """An element of M_n(A): an n x n grid of p x q blocks.

    ``blocks`` has shape (n, n, p, q). Elements built by :func:`amplify`
    have every block in A; results of a non-closed product may not, and
    ``membership_residual`` reports how far they are.
    """

    space: OperatorSpace
    blocks: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    @cached_property
    def realization(self) -> np.ndarray:
        n, _, p, q = self.blocks.shape
        return self.blocks.transpose(0, 2, 1, 3).reshape(n * p, n * q)

    @cached_property
    def coeffs(self) -> np.ndarray:
        n = self.n
        flat = self.blocks.reshape(n, n, -1)
        return flat @ self.space._onb_flat.conj()

    @cached_property
    def membership_residual(self) -> float:
        back = self.space.from_coefficients(self.coeffs)
        return float(np.max(np.linalg.norm((self.blocks - back).reshape(self.n, self.n, -1), axis=-1)))

    @cached_property
    def norm(self) -> float:
        return opnorm(self.realization)

    def entry(self, i: int, j: int) -> np.ndarray:
        return self.blocks[i, j]

    def pad(self, n: int) -> "AmpElement":
        """Embed into level n >= self.n by adding zeros."""
        if n < self.n:
            raise ValueError(f"cannot pad level {self.n} element down to {n}")
        out = np.zeros((n, n) + self.blocks.shape[2:], dtype=np.complex128)
        out[: self.n, : self.n] = self.blocks
        return AmpElement(self.space, out)

    def with_blocks(self, blocks) -> "AmpElement":
        return AmpElement(self.space, np.asarray(blocks, dtype=np.complex128))


def amplify(space: OperatorSpace, grid, tol: float | None = None) -> AmpElement:
    """Build an element of M_n(A) from an n x n grid of matrices in A."""
    arr = np.asarray(grid, dtype=np.complex128)
    if arr.ndim != 4 or arr.shape[0] != arr.shape[1] or arr.shape[2:] != space.shape:
        raise ShapeError(f"grid must have shape (n, n, {space.p}, {space.q}), got {arr.shape}")
    tol = tolerances.membership if tol is None else tol
    n = arr.shape[0]
    for i in range(n):
        for j in range(n):
            r = space.residual(arr[i, j])
            if r > tol:
                raise MembershipError(f"grid entry ({i},{j}) is not in {space.name} (residual {r:.3e})", (i, j), r)
    return AmpElement(space, arr)


def from_coeffs(space: OperatorSpace, coeffs) -> AmpElement:
    """Element of M_n(A) from coefficients of shape (n, n, d) against the onb."""
    c = np.asarray(coeffs, dtype=np.complex128)
    return AmpElement(space, space.from_coefficients(c))


def amp_norm(e: AmpElement) -> float:
    return e.norm


def amp_norm_batch(space: OperatorSpace, coeffs: np.ndarray) -> np.ndarray:
    """Norms for a stack of coefficient grids of shape (..., n, n, d)."""
    blocks = space.from_coefficients(coeffs)
    *lead, n, _, p, q = blocks.shape
    real = np.swapaxes(blocks, -3, -2).reshape(*lead, n * p, n * q)
    return opnorm_batch(real)


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_element(space: OperatorSpace, n: int, rng: np.random.Generator) -> AmpElement:
    """Complex Gaussian coefficients on the onb, scaled to unit amp_norm."""
    e = from_coeffs(space, _complex_gaussian(rng, (n, n, space.dim)))
    return e.with_blocks(e.blocks / e.norm)


def random_member(space: OperatorSpace, rng: np.random.Generator) -> np.ndarray:
    """A random unit-operator-norm element of A."""
    x = space.from_coefficients(_complex_gaussian(rng, space.dim))
    return x / opnorm(x)


def space_to_json(space: OperatorSpace) -> dict:
    return {
        "name": space.name,
        "ambient": {"rows": space.p, "cols": space.q},
        "basis": [matrix_to_json(b) for b in space.basis],
    }


def space_from_json(data: dict) -> OperatorSpace:
    try:
        name = str(data["name"])
        p = int(data["ambient"]["rows"])
        q = int(data["ambient"]["cols"])
        basis = [matrix_from_json(b) for b in data["basis"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"space payload missing or malformed field: {exc}") from exc
    return make_space(name, p, q, basis)


def load_space(path) -> OperatorSpace:
    return space_from_json(json.loads(Path(path).read_text()))


# Corpus constructors.

def full_matrices(p: int, q: int | None = None) -> OperatorSpace:
    q = p if q is None else q
    return make_space(f"M_{p}x{q}", p, q, matrix_units(p, q))


def upper_triangular(n: int) -> OperatorSpace:
    units = matrix_units(n)
    basis = [units[i * n + j] for i in range(n) for j in range(i, n)]
    return make_space(f"upper_triangular_{n}", n, n, basis)


def diagonal(n: int) -> OperatorSpace:
    units = matrix_units(n)
    return make_space(f"diagonal_{n}", n, n, [units[i * n + i] for i in range(n)])


def column_space(p: int = 2) -> OperatorSpace:
    return make_space(f"column_{p}x1", p, 1, matrix_units(p, 1))
