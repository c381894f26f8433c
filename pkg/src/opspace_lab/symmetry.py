"""Elementary isometries of M_n(A), the averaged projections P_m, and the
corner maps R and S.

Every map here acts on the block grid by scalar matrices,
``X -> sum_k c_k U_k X W_k``; isometries are the single-term maps with
U, W unitary (sign changes, phases, permutations of block rows/columns).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .opspace import AmpElement

__all__ = [
    "ISOMETRY_KINDS",
    "AVERAGING_KINDS",
    "BLOCK_SIGN_PATTERNS",
    "IsometrySpec",
    "AveragedProjection",
    "apply_isometry",
    "apply_dense",
    "project_Pm",
    "corner_compression",
    "corner_map",
    "corner_maps_RS",
    "q2_projection",
    "isometry_catalogue",
]

ISOMETRY_KINDS = (
    "row_sign", "col_sign", "row_swap", "col_swap", "row_phase", "col_phase",
    "block_sign", "block_sign_psi1", "block_sign_psi2",
)
AVERAGING_KINDS = ("corner_average_R", "corner_restrict_S")

# Signs (a, b, c, d) applied to the blocks [[a, b], [c, d]] split at m.
BLOCK_SIGN_PATTERNS = {
    "psi1": (1, -1, -1, 1),
    "psi2": (1, -1, 1, -1),
    "lower_rows": (1, 1, -1, -1),
    "upper_rows": (-1, -1, 1, 1),
    "anti_psi1": (-1, 1, 1, -1),
}


def _perm(n: int, i: int, j: int) -> np.ndarray:
    p = np.eye(n, dtype=np.complex128)
    p[[i, j]] = p[[j, i]]
    return p


def _diag_phase(n: int, i: int, phase: complex) -> np.ndarray:
    d = np.eye(n, dtype=np.complex128)
    d[i, i] = phase
    return d


def _block_sign_factors(n: int, m: int, pattern: str) -> tuple[np.ndarray, np.ndarray, float]:
    # (sa, sb, sc, sd) = s * (r1 c1, r1 c2, r2 c1, r2 c2) with r, c = +-1 row/col signs
    sa, sb, sc, sd = BLOCK_SIGN_PATTERNS[pattern]
    r2 = sa * sc
    c2 = sa * sb
    if sd != sa * r2 * c2:
        raise AssertionError(f"pattern {pattern} is not a rank-one sign pattern")
    left = np.diag([1.0] * m + [float(r2)] * (n - m)).astype(np.complex128)
    right = np.diag([1.0] * m + [float(c2)] * (n - m)).astype(np.complex128)
    return left, right, float(sa)


@dataclass(frozen=True)
class IsometrySpec:
    """One map from the closed catalogue, acting on level ``level``.

    Indices in ``params`` are 0-based block indices. ``m`` for the block
    sign maps is the size of the fixed top-left corner (1 <= m < level).
    """

    kind: str
    params: dict = field(default_factory=dict)
    level: int = 2

    def __post_init__(self):
        if self.kind not in ISOMETRY_KINDS + AVERAGING_KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}")
        self.terms()  # validates indices

    @property
    def is_isometry(self) -> bool:
        return self.kind in ISOMETRY_KINDS

    @property
    def is_involution(self) -> bool:
        return self.kind in ("row_sign", "col_sign", "row_swap", "col_swap",
                             "block_sign", "block_sign_psi1", "block_sign_psi2")

    def _index(self, key: str) -> int:
        i = int(self.params[key])
        if not 0 <= i < self.level:
            raise IndexError(f"{self.kind}: index {key}={i} outside level {self.level}")
        return i

    def terms(self) -> list[tuple[float, np.ndarray, np.ndarray]]:
        """The map as a list of (coefficient, left, right) scalar n x n factors."""
        n, k = self.level, self.kind
        eye = np.eye(n, dtype=np.complex128)
        if k == "row_sign":
            return [(1.0, _diag_phase(n, self._index("i"), -1), eye)]
        if k == "col_sign":
            return [(1.0, eye, _diag_phase(n, self._index("j"), -1))]
        if k == "row_phase":
            return [(1.0, _diag_phase(n, self._index("i"), np.exp(1j * float(self.params["theta"]))), eye)]
        if k == "col_phase":
            return [(1.0, eye, _diag_phase(n, self._index("j"), np.exp(1j * float(self.params["theta"]))))]
        if k == "row_swap":
            return [(1.0, _perm(n, self._index("i"), self._index("j")), eye)]
        if k == "col_swap":
            return [(1.0, eye, _perm(n, self._index("i"), self._index("j")))]
        if k in ("block_sign", "block_sign_psi1", "block_sign_psi2"):
            m = int(self.params["m"])
            if not 1 <= m < n:
                raise IndexError(f"{k}: need 1 <= m < {n}, got m={m}")
            pattern = {"block_sign_psi1": "psi1", "block_sign_psi2": "psi2"}.get(k, self.params.get("pattern"))
            if pattern not in BLOCK_SIGN_PATTERNS:
                raise ValueError(f"unknown block sign pattern {pattern!r}")
            left, right, s = _block_sign_factors(n, m, pattern)
            return [(s, left, right)]
        # averaging maps at level 2
        if n != 2:
            raise ValueError(f"{k} acts on level 2 only, got level {n}")
        sign = {"plus": 1.0, "minus": -1.0}[self.params.get("variant", "plus")]
        layout = self.params.get("layout", "row")
        swap = _perm(2, 0, 1)
        flip = np.diag([1.0, -1.0]).astype(np.complex128)
        if k == "corner_average_R":
            if layout == "row":
                return [(0.5, eye, eye), (0.5 * sign, eye, swap)]
            return [(0.5, eye, eye), (0.5 * sign, swap, swap)]
        if layout == "row":
            return [(0.5, eye, eye), (0.5, flip, eye)]
        return [(0.5, eye, eye), (0.5, flip, flip)]

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "level": self.level}

    @classmethod
    def from_json(cls, data: dict) -> "IsometrySpec":
        return cls(data["kind"], dict(data.get("params", {})), int(data["level"]))


def _apply_terms(terms, blocks: np.ndarray) -> np.ndarray:
    out = np.zeros_like(blocks)
    for c, left, right in terms:
        out += c * np.einsum("ik,kl...,lj->ij...", left, blocks, right)
    return out


def apply_isometry(spec: IsometrySpec, e: AmpElement) -> AmpElement:
    if spec.level != e.n:
        raise ValueError(f"map acts on level {spec.level}, element has level {e.n}")
    return e.with_blocks(_apply_terms(spec.terms(), e.blocks))


def apply_dense(spec: IsometrySpec, realization: np.ndarray, p: int, q: int) -> np.ndarray:
    """Same map on an np x nq realization, through Kronecker factors."""
    out = np.zeros_like(realization, dtype=np.complex128)
    for c, left, right in spec.terms():
        out += c * np.kron(left, np.eye(p)) @ realization @ np.kron(right, np.eye(q))
    return out


@dataclass(frozen=True)
class AveragedProjection:
    """P_m = (psi2 psi1 + psi2 + psi1 + Id) / 4 on level ``level``."""

    m: int
    level: int

    def __call__(self, e: AmpElement) -> AmpElement:
        return project_Pm(self.m, e)


def project_Pm(m: int, e: AmpElement) -> AmpElement:
    """Four-term average of the block sign isometries; keeps the top-left m x m corner."""
    n = e.n
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= {n}, got m={m}")
    if m == n:
        return e
    psi1 = IsometrySpec("block_sign_psi1", {"m": m}, n)
    psi2 = IsometrySpec("block_sign_psi2", {"m": m}, n)
    a = apply_isometry(psi1, e).blocks
    b = apply_isometry(psi2, e).blocks
    ba = apply_isometry(psi2, e.with_blocks(a)).blocks
    return e.with_blocks(0.25 * (ba + b + a + e.blocks))


def corner_compression(m: int, e: AmpElement) -> AmpElement:
    out = np.zeros_like(e.blocks)
    out[:m, :m] = e.blocks[:m, :m]
    return e.with_blocks(out)


def corner_map(which: str, e: AmpElement, variant: str = "plus", layout: str = "row") -> AmpElement:
    kind = {"R": "corner_average_R", "S": "corner_restrict_S"}[which]
    return apply_isometry(IsometrySpec(kind, {"variant": variant, "layout": layout}, 2), e)


def corner_maps_RS(variant: str, e: AmpElement, layout: str = "row") -> tuple[AmpElement, AmpElement]:
    """(R(e), S(e)) for the level-2 corner maps.

    Row layout: R averages the two block columns (plus) or takes their
    antisymmetric part (minus); S keeps the first block row. Diagonal
    layout: R averages with the simultaneous row/column swap; S keeps the
    diagonal blocks.
    """
    if e.n != 2:
        raise ValueError(f"corner maps act on level 2, got level {e.n}")
    return corner_map("R", e, variant, layout), corner_map("S", e, variant, layout)


def q2_projection(e: AmpElement, variant: str = "plus", layout: str = "row") -> AmpElement:
    """S R P_2 applied to e (level >= 2), returned at level 2."""
    base = e if e.n == 2 else e.with_blocks(project_Pm(2, e).blocks[:2, :2])
    return corner_map("S", corner_map("R", base, variant, layout), variant, layout)


def isometry_catalogue(n: int, thetas=(np.pi / 2, np.pi / 3)) -> list[IsometrySpec]:
    out: list[IsometrySpec] = []
    for i in range(n):
        out.append(IsometrySpec("row_sign", {"i": i}, n))
        out.append(IsometrySpec("col_sign", {"j": i}, n))
        for t in thetas:
            out.append(IsometrySpec("row_phase", {"i": i, "theta": float(t)}, n))
            out.append(IsometrySpec("col_phase", {"j": i, "theta": float(t)}, n))
        for j in range(i + 1, n):
            out.append(IsometrySpec("row_swap", {"i": i, "j": j}, n))
            out.append(IsometrySpec("col_swap", {"i": i, "j": j}, n))
    for m in range(1, n):
        for pattern in BLOCK_SIGN_PATTERNS:
            out.append(IsometrySpec("block_sign", {"m": m, "pattern": pattern}, n))
    return out
