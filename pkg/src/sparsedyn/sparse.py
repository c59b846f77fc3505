"""Solvers for the underdetermined system ``G a = y`` with complex unknowns.

``solve_l1`` is FISTA on ``lam*||a||_1 + 0.5*||G a - y||^2`` where ``|a_i|`` is
the complex modulus, so the proximal map is a complex soft threshold.
``solve_l1_continuation`` runs it along a decreasing lambda path, which
approximates equality-constrained basis pursuit while staying well posed for
noisy data. ``solve_omp`` and ``solve_least_squares`` are the greedy and
minimum-norm baselines.

Every solver accepts one right-hand side ``y`` of shape (m,) or a batch of
shape (m, T); a batch returns a list of solutions, one per column, identical
to solving the columns separately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SparseSolution",
    "soft_threshold_complex",
    "operator_norm_sq",
    "l1_objective",
    "solve_l1",
    "solve_l1_continuation",
    "solve_omp",
    "solve_least_squares",
    "solve",
    "SOLVERS",
]

SOLVERS = ("l1", "omp", "least_squares")


@dataclass
class SparseSolution:
    coeffs: np.ndarray
    residual_norm: float
    iterations: int
    solver_id: str
    lam: float = 0.0
    converged: bool = True


def soft_threshold_complex(z, t):
    """Shrink the modulus of ``z`` by ``t``, keeping its phase; zero stays zero."""
    z = np.asarray(z, dtype=complex)
    mag = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > t, 1.0 - t / np.where(mag > 0, mag, 1.0), 0.0)
    out = z * scale
    return out[()] if out.ndim == 0 else out


def operator_norm_sq(G, iters: int = 500, tol: float = 1e-12) -> float:
    """Largest eigenvalue of ``G^H G`` by power iteration from a fixed start."""
    G = np.asarray(G, dtype=complex)
    v = np.ones(G.shape[1], dtype=complex) / np.sqrt(G.shape[1])
    lam = 0.0
    for _ in range(iters):
        w = G.conj().T @ (G @ v)
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
        if abs(nrm - lam) <= tol * nrm:
            lam = nrm
            break
        lam = nrm
    return float(lam)


def l1_objective(G, a, y, lam):
    r = G @ a - y
    return lam * np.abs(a).sum(axis=0) + 0.5 * np.sum(np.abs(r) ** 2, axis=0)


def _fista(G, Y, lam, A0, L, tol, max_iter):
    """Batched FISTA with function-value restart.

    Columns of ``Y`` are independent problems; each stops on its own when the
    relative objective change drops below ``tol``.
    """
    p, T = G.shape[1], Y.shape[1]
    GH = G.conj().T
    A = A0.copy()
    Z = A.copy()
    t = np.ones(T)
    f_prev = l1_objective(G, A, Y, lam)
    its = np.zeros(T, dtype=int)
    change = np.full(T, np.inf)
    active = np.arange(T)
    step = 1.0 / L
    for _ in range(max_iter):
        if active.size == 0:
            break
        Za = Z[:, active]
        Aa_old = A[:, active]
        grad = GH @ (G @ Za - Y[:, active])
        Aa = soft_threshold_complex(Za - step * grad, lam[active] * step)
        f = l1_objective(G, Aa, Y[:, active], lam[active])
        ta = t[active]
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * ta * ta))
        Za_new = Aa + ((ta - 1.0) / t_new) * (Aa - Aa_old)
        # restart momentum wherever the objective went up
        up = f > f_prev[active]
        Za_new[:, up] = Aa[:, up]
        t_new[up] = 1.0
        A[:, active] = Aa
        Z[:, active] = Za_new
        t[active] = t_new
        its[active] += 1
        rel = np.abs(f_prev[active] - f) / np.maximum(np.abs(f), np.finfo(float).tiny)
        change[active] = rel
        f_prev[active] = f
        active = active[rel >= tol]
    return A, its, change


def _prepare(G, y):
    G = np.asarray(G, dtype=complex)
    y = np.asarray(y, dtype=complex)
    single = y.ndim == 1
    Y = y[:, None] if single else y
    if Y.shape[0] != G.shape[0]:
        raise ValueError(f"G has {G.shape[0]} rows but y has {Y.shape[0]}")
    return G, Y, single


def _normalized(G):
    norms = np.linalg.norm(G, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    return G / safe, safe, norms > 0


def _package(G, Y, A, its, lams, solver_id, converged, single):
    res = np.linalg.norm(G @ A - Y, axis=0)
    out = [SparseSolution(A[:, j].copy(), float(res[j]), int(its[j]), solver_id,
                          float(lams[j]), bool(converged[j]))
           for j in range(Y.shape[1])]
    return out[0] if single else out


def solve_l1(G, y, lam: float, tol: float = 1e-8, max_iter: int = 5000, a0=None):
    """Minimize ``lam*||a||_1 + 0.5*||G a - y||^2`` by FISTA.

    Columns of ``G`` are scaled to unit norm internally, so ``lam`` acts on
    the normalized problem; the returned coefficients are in the original
    scaling. ``converged`` is False when ``max_iter`` was hit while the
    relative objective change still exceeded ``100*tol``.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    G, Y, single = _prepare(G, y)
    Gn, norms, live = _normalized(G)
    L = operator_norm_sq(Gn) * (1.0 + 1e-9)
    if L == 0:
        raise ValueError("G is identically zero")
    A0 = np.zeros((G.shape[1], Y.shape[1]), dtype=complex)
    if a0 is not None:
        A0 = np.asarray(a0, dtype=complex).reshape(G.shape[1], -1) * norms[:, None]
    lams = np.full(Y.shape[1], float(lam))
    B, its, change = _fista(Gn, Y, lams, A0, L, tol, max_iter)
    B[~live] = 0
    converged = ~((its >= max_iter) & (change > 100 * tol))
    return _package(G, Y, B / norms[:, None], its, lams, "l1", converged, single)


def solve_l1_continuation(G, y, tol: float = 1e-8, max_iter: int = 5000,
                          start: float = 0.1, stop: float = 1e-4, factor: float = 0.5):
    """Basis-pursuit-like solve by warm-started FISTA along a lambda path.

    For each right-hand side the path runs from ``start*||G_n^H y||_inf``
    down to ``stop*||G_n^H y||_inf``, multiplying by ``factor`` per stage
    (``G_n`` is ``G`` with unit-norm columns). ``max_iter`` applies per stage.
    """
    G, Y, single = _prepare(G, y)
    Gn, norms, live = _normalized(G)
    L = operator_norm_sq(Gn) * (1.0 + 1e-9)
    if L == 0:
        raise ValueError("G is identically zero")
    lam_max = np.abs(Gn.conj().T @ Y).max(axis=0)
    B = np.zeros((G.shape[1], Y.shape[1]), dtype=complex)
    its = np.zeros(Y.shape[1], dtype=int)
    converged = np.ones(Y.shape[1], dtype=bool)
    nz = lam_max > 0
    frac = start
    while True:
        frac_here = max(frac, stop)
        if nz.any():
            lams = frac_here * lam_max[nz]
            Bn, k, change = _fista(Gn, Y[:, nz], lams, B[:, nz], L, tol, max_iter)
            B[:, nz] = Bn
            its[nz] += k
            converged[nz] &= ~((k >= max_iter) & (change > 100 * tol))
        if frac_here <= stop:
            break
        frac *= factor
    B[~live] = 0
    return _package(G, Y, B / norms[:, None], its, stop * lam_max, "l1", converged, single)


def solve_omp(G, y, k_max: int | None = None, tol: float = 1e-10):
    """Orthogonal matching pursuit with a least-squares refit on the active set."""
    G, Y, single = _prepare(G, y)
    m, p = G.shape
    k_max = min(m, p) if k_max is None else int(k_max)
    if not 1 <= k_max <= min(m, p):
        raise ValueError(f"k_max must lie in [1, {min(m, p)}]")
    Gn, _, live = _normalized(G)
    out = []
    for j in range(Y.shape[1]):
        yj = Y[:, j]
        a = np.zeros(p, dtype=complex)
        support: list[int] = []
        r = yj.copy()
        coef = np.zeros(0, dtype=complex)
        while len(support) < k_max and np.linalg.norm(r) >= tol:
            corr = np.abs(Gn.conj().T @ r)
            corr[~live] = -1.0
            corr[support] = -1.0
            support.append(int(np.argmax(corr)))
            coef = np.linalg.lstsq(G[:, support], yj, rcond=None)[0]
            r = yj - G[:, support] @ coef
        a[support] = coef
        out.append(SparseSolution(a, float(np.linalg.norm(r)), len(support), "omp"))
    return out[0] if single else out


def solve_least_squares(G, y, rcond: float = 1e-10):
    """Minimum-norm least-squares coefficients via an SVD pseudo-inverse."""
    G, Y, single = _prepare(G, y)
    A = np.linalg.pinv(G, rcond=rcond) @ Y
    res = np.linalg.norm(G @ A - Y, axis=0)
    out = [SparseSolution(A[:, j].copy(), float(res[j]), 1, "least_squares")
           for j in range(Y.shape[1])]
    return out[0] if single else out


def solve(G, y, solver: str = "l1", **kwargs):
    """Dispatch by solver name: ``l1`` (continuation), ``omp``, ``least_squares``/``ls``."""
    if solver == "l1":
        return solve_l1_continuation(G, y, **kwargs)
    if solver == "omp":
        return solve_omp(G, y, **kwargs)
    if solver in ("least_squares", "ls"):
        return solve_least_squares(G, y, **kwargs)
    raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")
