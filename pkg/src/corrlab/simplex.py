"""Dense two-phase simplex for small standard-form linear programs.

    minimize c @ x  subject to  A @ x = b,  x >= 0

Bland's rule is used for entering and leaving variables, so the method
terminates on degenerate problems (the vertex polytopes here are highly
degenerate).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-10


class LPError(RuntimeError):
    """The simplex iteration did not reach a verdict."""


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None
    # sum of artificial variables at the end of phase 1; zero iff feasible
    infeasibility: float
    iterations: int


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int):
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _run(T: np.ndarray, basis: list[int], allowed: np.ndarray, tol: float, max_iter: int) -> tuple[str, int]:
    """Iterate on tableau T whose last row holds reduced costs (minimisation)."""
    m = T.shape[0] - 1
    for it in range(max_iter):
        cost = T[-1, :-1]
        candidates = np.flatnonzero((cost < -tol) & allowed)
        if candidates.size == 0:
            return "optimal", it
        col = int(candidates[0])
        column = T[:m, col]
        positive = column > tol
        if not np.any(positive):
            return "unbounded", it
        ratios = np.full(m, np.inf)
        ratios[positive] = T[:m, -1][positive] / column[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol * max(1.0, abs(best)))
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, basis, row, col)
    raise LPError(f"simplex did not converge in {max_iter} iterations")


def solve(c, A_eq, b_eq, tol: float = PIVOT_TOL, max_iter: int = 10_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.array(A_eq, dtype=float)
    b = np.array(b_eq, dtype=float)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("inconsistent LP dimensions")
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # phase 1: artificials n..n+m-1
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    allowed = np.ones(n + m, dtype=bool)
    status, it1 = _run(T, basis, allowed, tol, max_iter)
    if status != "optimal":
        raise LPError(f"phase 1 ended with status {status}")
    infeas = float(-T[-1, -1])
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if infeas > tol * scale * max(m, 1):
        return LPResult("infeasible", None, None, infeas, it1)

    # drive remaining artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= n:
            row = T[r, :n]
            cols = np.flatnonzero(np.abs(row) > tol)
            if cols.size:
                _pivot(T, basis, r, int(cols[0]))
                keep.append(r)
        else:
            keep.append(r)
    T = np.vstack([T[keep], T[-1:]])
    basis = [basis[r] for r in keep]
    T = np.delete(T, np.s_[n:n + m], axis=1)

    # phase 2
    T[-1, :] = 0.0
    T[-1, :n] = c
    for r, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1] -= T[-1, j] * T[r]
    status, it2 = _run(T, basis, np.ones(n, dtype=bool), tol, max_iter)
    if status == "unbounded":
        return LPResult("unbounded", None, None, infeas, it1 + it2)
    x = np.zeros(n)
    for r, j in enumerate(basis):
        x[j] = T[r, -1]
    x[np.abs(x) < tol] = 0.0
    return LPResult("optimal", x, float(c @ x), infeas, it1 + it2)
