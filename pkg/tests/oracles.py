"""Independent reference computations used by the tests.

Nothing here imports the package; each oracle takes a different route to the
same number (power iteration, explicit loops, Gram-Schmidt, grid search).
"""

import itertools

import numpy as np


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def power_norm(a, iters=500):
    """Largest singular value by power iteration on a* a."""
    a = np.asarray(a, dtype=complex)
    x = np.ones(a.shape[1], dtype=complex)
    lam = 0.0
    for _ in range(iters):
        y = a.conj().T @ (a @ x)
        lam = np.linalg.norm(y)
        x = y / lam
    return float(np.sqrt(lam))


def loop_matmul(a, b):
    n, k = len(a), len(b)
    m = len(b[0])
    return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def gram_schmidt(vectors):
    out = []
    for v in vectors:
        w = np.array(v, dtype=complex).ravel()
        for q in out:
            w = w - np.vdot(q, w) * q
        nw = np.linalg.norm(w)
        if nw > 1e-12:
            out.append(w / nw)
    return out


def dist_to_span(x, basis):
    """Frobenius distance from x to span(basis), via Gram-Schmidt."""
    qs = gram_schmidt(basis)
    w = np.array(x, dtype=complex).ravel()
    for q in qs:
        w = w - np.vdot(q, w) * q
    return float(np.linalg.norm(w))


def tro_residual_bruteforce(basis):
    """max over ordered triples of the least-squares distance of a b* c to the span."""
    a = np.array([np.ravel(b) for b in basis]).T
    best = 0.0
    for x, y, z in itertools.product(basis, repeat=3):
        t = (x @ y.conj().T @ z).ravel()
        c, *_ = np.linalg.lstsq(a, t, rcond=None)
        best = max(best, float(np.linalg.norm(t - a @ c)))
    return best


def triple_ref(x, y, z):
    return 0.5 * (x @ y.conj().T @ z + z @ y.conj().T @ x)


def column_unit_objective_grid(points=201):
    """min over v in the unit ball of C^2 of sum_i ||{e_i, v, v} - e_i||^2 for
    the column space spanned by e_1, e_2; grid over radius, angle and phase."""
    e = np.eye(2)[:, :, None]
    best = np.inf
    for r in np.linspace(0, 1, 21):
        for a in np.linspace(0, np.pi / 2, points // 4):
            for ph in np.linspace(0, 2 * np.pi, 9):
                v = r * np.array([[np.cos(a)], [np.exp(1j * ph) * np.sin(a)]])
                f = sum(np.linalg.norm(triple_ref(e[i], v, v) - e[i]) ** 2 for i in range(2))
                best = min(best, f)
    return best


def block(grid):
    return np.vstack([np.hstack(row) for row in grid])
