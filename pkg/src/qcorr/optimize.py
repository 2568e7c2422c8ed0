"""Derivative-free minimization: Nelder-Mead and a grid-seeded multi-start driver."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable

import numpy as np

FTOL = 1e-10
MAX_EVALS = 200_000
N_STARTS = 5
RESTART_SHRINK = (3 - 5 ** 0.5) / 2


@dataclass
class OptResult:
    x: np.ndarray
    fun: float
    nfev: int
    converged: bool


def nelder_mead(func: Callable[[np.ndarray], float], x0, step, ftol: float = FTOL,
                max_evals: int = 10_000, restarts: int = 0, alpha: float = 1.0,
                gamma: float = 2.0, rho: float = 0.5, sigma: float = 0.5) -> OptResult:
    """Minimize ``func`` with the Nelder-Mead simplex method.

    The initial simplex is ``x0`` plus one vertex per axis displaced by
    ``step`` (scalar or per-axis). Iteration stops once the spread of the
    objective over the simplex falls below ``ftol`` or the evaluation budget
    is spent; in the latter case ``converged`` is False.

    A converged run is restarted from its best vertex with a fresh, smaller
    simplex up to ``restarts`` times, stopping early once a restart gains
    less than ``ftol``. This guards against collapsed simplices and against
    initial simplices whose vertices tie by symmetry around a minimum.
    """
    res = _nm_run(func, x0, step, ftol, max_evals, alpha, gamma, rho, sigma)
    nfev = res.nfev
    for k in range(1, restarts + 1):
        if not res.converged or nfev >= max_evals:
            break
        # an irrational shrink factor avoids re-creating a symmetric simplex
        scaled = np.asarray(step, dtype=float) * RESTART_SHRINK ** k
        again = _nm_run(func, res.x, scaled, ftol, max_evals - nfev, alpha, gamma, rho, sigma)
        nfev += again.nfev
        gain = res.fun - again.fun
        if again.fun < res.fun:
            res = again
        else:
            res = OptResult(res.x, res.fun, 0, again.converged)
        if gain < ftol:
            break
    return OptResult(res.x, res.fun, nfev, res.converged)


def _nm_run(func, x0, step, ftol, max_evals, alpha, gamma, rho, sigma) -> OptResult:
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    steps = np.broadcast_to(np.asarray(step, dtype=float), (n,))
    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        simplex[i + 1, i] += steps[i]
    fvals = np.array([func(x) for x in simplex])
    nfev = n + 1

    while True:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        if fvals[-1] - fvals[0] < ftol:
            return OptResult(simplex[0].copy(), float(fvals[0]), nfev, True)
        if nfev >= max_evals:
            return OptResult(simplex[0].copy(), float(fvals[0]), nfev, False)

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + alpha * (centroid - worst)
        fr = func(xr)
        nfev += 1
        if fvals[0] <= fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = func(xe)
            nfev += 1
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = centroid + rho * (xr - centroid)
        else:
            xc = centroid + rho * (worst - centroid)
        fc = func(xc)
        nfev += 1
        if fc < min(fr, fvals[-1]):
            simplex[-1], fvals[-1] = xc, fc
            continue
        # shrink toward the best vertex
        for i in range(1, n + 1):
            simplex[i] = simplex[0] + sigma * (simplex[i] - simplex[0])
            fvals[i] = func(simplex[i])
        nfev += n


def grid_then_refine(func: Callable[[np.ndarray], float], grid_points: np.ndarray,
                     grid_values: np.ndarray, step, n_starts: int = N_STARTS,
                     ftol: float = FTOL, max_evals: int = MAX_EVALS,
                     key: Callable[[np.ndarray], Hashable] | None = None,
                     restarts: int = 3) -> OptResult:
    """Refine the ``n_starts`` best grid points with Nelder-Mead and keep the best.

    ``grid_values`` are the objective values already computed at
    ``grid_points`` (they count against ``max_evals``). The remaining budget is
    shared by the refinement runs. When ``key`` is given, grid points with
    equal keys are treated as the same start and only the first is refined.
    """
    grid_values = np.asarray(grid_values, dtype=float)
    used = grid_values.size
    order = np.argsort(grid_values, kind="stable")
    if key is None:
        best_idx = order[:n_starts]
    else:
        best_idx, seen = [], set()
        for idx in order:
            k = key(grid_points[idx])
            if k not in seen:
                seen.add(k)
                best_idx.append(idx)
                if len(best_idx) == n_starts:
                    break
    best = OptResult(np.asarray(grid_points[best_idx[0]], dtype=float).copy(),
                     float(grid_values[best_idx[0]]), used, True)
    converged = True
    for k, idx in enumerate(best_idx):
        remaining = max_evals - used
        if remaining <= 0:
            converged = False
            break
        share = remaining // (len(best_idx) - k)
        res = nelder_mead(func, grid_points[idx], step, ftol=ftol, max_evals=max(share, 1),
                          restarts=restarts)
        used += res.nfev
        converged &= res.converged
        if res.fun < best.fun:
            best = OptResult(res.x, res.fun, 0, True)
    return OptResult(best.x, best.fun, used, converged)
