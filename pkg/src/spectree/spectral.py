"""Largest Laplacian eigenpair of a tree.

The Laplacian ``L = D - A`` is applied matrix-free from the edge arrays. The
iterative solver is an explicitly restarted Lanczos method with full
reorthogonalization; a dense ``eigh`` on the assembled matrix serves as the
independent reference for small trees.

Lanczos converges slowly when the top of the spectrum is tightly clustered
(long paths, for instance). In that case the solver switches to a
tree-structured route: a tree has a perfect elimination order (leaves first),
so ``L - xI`` can be factored in ``O(n)`` without fill-in. The signs of the
pivots count the eigenvalues above ``x``, which brackets the top eigenvalue by
bisection, and the same factorization drives inverse iteration for the vector.

Trees are bipartite, so ``L`` and the signless Laplacian ``Q = D + A`` are
similar through the diagonal sign matrix of the bipartition, and the top
eigenvector of ``L`` is that sign pattern times the (strictly positive)
Perron vector of ``Q``. Converged eigenvectors are finished with a few power
steps on ``Q`` applied to ``|f|``; those steps only add non-negative numbers, so
the returned vector carries the exact sign pattern even on entries far below
the noise level of the Lanczos iterate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .exceptions import ConvergenceError, InvalidTreeError
from .tree import Tree

__all__ = [
    "SpectralResult",
    "laplacian_apply",
    "laplacian_matrix",
    "rayleigh_quotient",
    "max_laplacian_eigenpair",
    "dense_max_eigenvalue",
    "dense_max_eigenpair",
    "eigen_residual",
    "check_sign_structure",
    "ritz_lower_bound",
    "DEFAULT_TOL",
    "DENSE_CAP",
]

DEFAULT_TOL = 1e-10
DENSE_CAP = 500
DENSE_BELOW = 64


@dataclass(frozen=True)
class SpectralResult:
    """Largest Laplacian eigenvalue with a unit eigenvector."""

    lam: float
    eigenvector: np.ndarray = field(repr=False)
    residual: float
    iterations: int
    method: str  # "iterative" or "dense"
    converged: bool = True
    solver: str = ""

    def to_dict(self, eigenvector: bool = False) -> dict:
        out = {
            "lambda": float(self.lam),
            "residual": float(self.residual),
            "iterations": int(self.iterations),
            "method": self.method,
            "solver": self.solver,
        }
        if eigenvector:
            out["eigenvector"] = [float(x) for x in self.eigenvector]
        return out

    def to_json(self, eigenvector: bool = False) -> str:
        return json.dumps(self.to_dict(eigenvector), default=_float17)


def _float17(x):
    return float(f"{x:.17g}")


def _as_function(t: Tree, f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (t.n,):
        raise ValueError(f"vertex function has shape {f.shape}, tree has {t.n} vertices")
    return f


def _adjacency_apply(t: Tree, f: np.ndarray) -> np.ndarray:
    if t.n == 1:
        return np.zeros(1)
    u, v = t.edges[:, 0], t.edges[:, 1]
    return (np.bincount(u, weights=f[v], minlength=t.n)
            + np.bincount(v, weights=f[u], minlength=t.n))


def laplacian_apply(t: Tree, f) -> np.ndarray:
    """``(Lf)(x) = d(x) f(x) - sum of f over the neighbors of x``."""
    f = _as_function(t, f)
    return t.degrees * f - _adjacency_apply(t, f)


def _signless_apply(t: Tree, g: np.ndarray) -> np.ndarray:
    return t.degrees * g + _adjacency_apply(t, g)


def laplacian_matrix(t: Tree) -> np.ndarray:
    """Dense ``D - A``."""
    L = np.diag(t.degrees.astype(np.float64))
    if t.n > 1:
        u, v = t.edges[:, 0], t.edges[:, 1]
        L[u, v] = -1.0
        L[v, u] = -1.0
    return L


def rayleigh_quotient(t: Tree, f) -> float:
    """Sum over edges of ``(f(u) - f(v))**2`` divided by ``<f, f>``."""
    f = _as_function(t, f)
    denom = float(f @ f)
    if denom == 0.0:
        raise ValueError("Rayleigh quotient of the zero function")
    if t.n == 1:
        return 0.0
    diff = f[t.edges[:, 0]] - f[t.edges[:, 1]]
    return float(diff @ diff) / denom


def ritz_lower_bound(t: Tree, f) -> float:
    """Largest Ritz value of ``L(t)`` on ``span{f, L f}``; never exceeds ``lambda(t)``.

    Starting from an eigenvector of a neighbouring tree this certifies how far
    the top eigenvalue of ``t`` has moved at least, using two matvecs.
    """
    f = _as_function(t, f)
    f = f / np.linalg.norm(f)
    g = laplacian_apply(t, f)
    alpha = float(f @ g)
    w = g - alpha * f
    w -= (f @ w) * f
    beta = float(np.linalg.norm(w))
    if beta <= 1e-300:
        return alpha
    q = w / beta
    gamma = float(q @ laplacian_apply(t, q))
    half = 0.5 * (alpha - gamma)
    return 0.5 * (alpha + gamma) + math.hypot(half, beta)


def eigen_residual(t: Tree, lam: float, f) -> float:
    """``||Lf - lam f||_2``."""
    f = _as_function(t, f)
    return float(np.linalg.norm(laplacian_apply(t, f) - lam * f))


def dense_max_eigenpair(t: Tree, cap: int = DENSE_CAP) -> tuple[float, np.ndarray]:
    if t.n > cap:
        raise InvalidTreeError(f"n={t.n} exceeds the dense cap {cap}")
    w, V = np.linalg.eigh(laplacian_matrix(t))
    return float(w[-1]), V[:, -1]


def dense_max_eigenvalue(t: Tree, cap: int = DENSE_CAP) -> float:
    """Largest eigenvalue from a full symmetric eigendecomposition (reference path)."""
    if t.n > cap:
        raise InvalidTreeError(f"n={t.n} exceeds the dense cap {cap}")
    return float(np.linalg.eigvalsh(laplacian_matrix(t))[-1])


def check_sign_structure(t: Tree, f, tol: float = 1e-8) -> bool:
    """Is ``f`` positive on one side of the bipartition and negative on the other?

    ``f`` is first flipped so that its largest-magnitude entry is positive.
    An entry fails when it is exactly zero or when it carries the wrong sign
    with magnitude above ``tol * max|f|``; wrong-signed entries smaller than
    that are treated as rounding noise.
    """
    f = _as_function(t, f)
    if t.n == 1:
        return bool(f[0] != 0)
    f = f if f[np.argmax(np.abs(f))] > 0 else -f
    side = t.bipartition()
    side = side if side[np.argmax(np.abs(f))] > 0 else -side
    signed = side * f
    if np.any(signed == 0.0):
        return False
    return not np.any(signed < -tol * np.max(np.abs(f)))


def _start_vector(t: Tree, side: np.ndarray) -> np.ndarray:
    # bipartition sign times degree: already close to the top eigenvector
    v = side * (t.degrees + 1e-3 * (np.arange(t.n) % 3))
    return v / np.linalg.norm(v)


def _lanczos(t: Tree, v0: np.ndarray, tol: float, max_matvec: int, m: int):
    n = t.n
    m = min(m, n)
    V = np.empty((m, n))
    v = v0
    matvecs = 0
    best = None
    while True:
        alpha = np.zeros(m)
        beta = np.zeros(m)
        V[0] = v
        k = m
        for j in range(m):
            w = laplacian_apply(t, V[j])
            matvecs += 1
            alpha[j] = V[j] @ w
            for _ in range(2):
                w -= V[: j + 1].T @ (V[: j + 1] @ w)
            b = np.linalg.norm(w)
            if j + 1 == m:
                break
            if b <= 1e-14 * max(1.0, abs(alpha[j])):
                k = j + 1
                break
            beta[j] = b
            V[j + 1] = w / b
        if k == 1:
            theta, s = np.array([alpha[0]]), np.ones((1, 1))
        else:
            theta, s = eigh_tridiagonal(alpha[:k], beta[: k - 1],
                                        select="i", select_range=(k - 1, k - 1))
        y = V[:k].T @ s[:, -1]
        y /= np.linalg.norm(y)
        lam = float(theta[-1])
        res = float(np.linalg.norm(laplacian_apply(t, y) - lam * y))
        if best is None or res < best[2]:
            best = (lam, y, res)
        if res <= tol * max(lam, 1.0) or k < m:
            return lam, y, res, matvecs, True
        if matvecs >= max_matvec:
            return best[0], best[1], best[2], matvecs, False
        v = y


def _sign_polish(t: Tree, f: np.ndarray, side: np.ndarray, extra: int = 3):
    g = np.abs(f)
    steps = 0
    while steps < t.n and not np.all(g > 0):
        g = _signless_apply(t, g)
        g /= np.linalg.norm(g)
        steps += 1
    for _ in range(extra):
        g = _signless_apply(t, g)
        g /= np.linalg.norm(g)
    steps += extra
    anchor = int(np.argmax(g))
    s = side if side[anchor] > 0 else -side
    return s * g, steps


def _finish(t: Tree, f: np.ndarray, side: np.ndarray, iterations: int, method: str,
            converged: bool, solver: str) -> SpectralResult:
    f, steps = _sign_polish(t, f, side)
    lam = rayleigh_quotient(t, f)
    res = eigen_residual(t, lam, f)
    return SpectralResult(lam, f, res, iterations + steps, method, converged, solver)


class _Elimination:
    """Leaf-to-root factorization of ``L - xI`` for a fixed rooting."""

    def __init__(self, t: Tree):
        order, parent = t.bfs_parents(0)
        self.n = t.n
        self.order = order
        self.parent = parent
        self.deg = t.degrees.astype(np.float64)
        depth = np.zeros(t.n, dtype=np.int64)
        for v in order[1:]:
            depth[v] = depth[parent[v]] + 1
        self.nlayers = int(depth.max()) + 1
        # vectorize by layer unless the tree is deep and narrow
        self.vector = self.nlayers * 64 <= t.n
        if self.vector:
            by_depth = np.argsort(depth, kind="stable")
            bounds = np.searchsorted(depth[by_depth], np.arange(self.nlayers + 1))
            self.layers = [by_depth[bounds[i]:bounds[i + 1]] for i in range(self.nlayers)]
            self.parr = np.asarray(parent, dtype=np.int64)

    def pivots(self, x: float) -> np.ndarray:
        tiny = 1e-300
        if self.vector:
            a = self.deg - x
            acc = np.zeros(self.n)
            for idx in reversed(self.layers):
                piv = a[idx] - acc[idx]
                piv[piv == 0.0] = tiny
                a[idx] = piv
                kids = idx[self.parr[idx] >= 0]
                if len(kids):
                    np.add.at(acc, self.parr[kids], 1.0 / a[kids])
            return a
        a = (self.deg - x).tolist()
        parent = self.parent
        for v in reversed(self.order):
            piv = a[v]
            if piv == 0.0:
                piv = a[v] = tiny
            p = parent[v]
            if p >= 0:
                a[p] -= 1.0 / piv
        return np.asarray(a)

    def count_above(self, x: float) -> int:
        """Number of eigenvalues of ``L`` strictly greater than ``x``."""
        return int(np.count_nonzero(self.pivots(x) > 0))

    def solve(self, x: float, b: np.ndarray) -> np.ndarray:
        """Solve ``(L - xI) y = b``."""
        a = self.pivots(x)
        parent = self.parent
        rhs = b.astype(np.float64).tolist()
        for v in reversed(self.order):
            p = parent[v]
            if p >= 0:
                rhs[p] += rhs[v] / a[v]
        y = [0.0] * self.n
        for v in self.order:
            p = parent[v]
            y[v] = (rhs[v] + (y[p] if p >= 0 else 0.0)) / a[v]
        return np.asarray(y)


def _bisection_eigenpair(t: Tree, side: np.ndarray):
    elim = _Elimination(t)
    deg = t.degrees
    # Delta + 1 <= lambda <= max over edges of d(u) + d(v)
    lo = float(deg.max())
    hi = float((deg[t.edges[:, 0]] + deg[t.edges[:, 1]]).max()) + 1.0
    steps = 0
    while hi - lo > 4 * np.finfo(float).eps * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if elim.count_above(mid) >= 1:
            lo = mid
        else:
            hi = mid
        steps += 1
    y = side * (deg + 1.0)
    y /= np.linalg.norm(y)
    for _ in range(3):
        y = elim.solve(hi, y)
        y /= np.linalg.norm(y)
        steps += 1
    return y, steps


def max_laplacian_eigenpair(t: Tree, tol: float = DEFAULT_TOL, *, method: str = "auto",
                            dense_below: int = DENSE_BELOW, dense_cap: int = DENSE_CAP,
                            max_iter: int | None = None, krylov_dim: int = 40,
                            lanczos_budget: int = 400) -> SpectralResult:
    """Largest eigenvalue of ``L(t)`` and a unit eigenvector.

    Parameters
    ----------
    t : Tree
    tol : float
        Convergence target ``||Lf - lam f|| <= tol * lam``.
    method : {"auto", "iterative", "dense", "lanczos", "bisection"}
        ``"auto"`` uses the dense solver for ``n <= dense_below`` and the
        iterative route otherwise. ``"iterative"`` runs Lanczos and, after
        ``lanczos_budget`` operator applications without convergence, switches
        to the tree bisection solver. ``"lanczos"`` and ``"bisection"`` pin
        one of the two.
    max_iter : int, optional
        Hard cap on Lanczos operator applications; defaults to ``50 n + 10**4``.

    Raises
    ------
    ConvergenceError
        No route reached the tolerance. The best iterate is attached as
        ``err.result``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if method not in ("auto", "iterative", "dense", "lanczos", "bisection"):
        raise ValueError(f"unknown method {method!r}")
    n = t.n
    if n == 1:
        return SpectralResult(0.0, np.ones(1), 0.0, 0, "dense", True, "trivial")
    side = t.bipartition()
    if method == "dense" or (method == "auto" and n <= dense_below):
        _, f = dense_max_eigenpair(t, cap=max(dense_cap, n) if method == "dense" else dense_cap)
        return _finish(t, f, side, 0, "dense", True, "eigh")

    def ok(r):
        return r.residual <= tol * max(r.lam, 1.0)

    if max_iter is None:
        max_iter = 50 * n + 10**4
    its = 0
    result = None
    if method != "bisection":
        budget = max_iter if method == "lanczos" else min(max_iter, lanczos_budget)
        _, f, _, its, _ = _lanczos(t, _start_vector(t, side), tol, budget, krylov_dim)
        result = _finish(t, f, side, its, "iterative", True, "lanczos")
        if ok(result) or method == "lanczos":
            if not ok(result):
                raise ConvergenceError(
                    f"Lanczos did not converge in {its} operator applications "
                    f"(residual {result.residual:.3e})", _unconverged(result))
            return result
    f, steps = _bisection_eigenpair(t, side)
    result = _finish(t, f, side, its + steps, "iterative", True, "bisection")
    if ok(result):
        return result
    if method == "auto" and n <= dense_cap:
        _, f = dense_max_eigenpair(t, cap=dense_cap)
        return _finish(t, f, side, result.iterations, "dense", True, "eigh")
    raise ConvergenceError(f"no convergence (residual {result.residual:.3e})",
                           _unconverged(result))


def _unconverged(r: SpectralResult) -> SpectralResult:
    return SpectralResult(r.lam, r.eigenvector, r.residual, r.iterations, r.method,
                          False, r.solver)
