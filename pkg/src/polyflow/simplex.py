"""Dense two-phase tableau simplex for small linear programs.

Solves::

    minimize    c @ x
    subject to  A_ub @ x <= b_ub,   x >= 0

Phase one adds a single auxiliary column (``x0``) to every row and drives it
to zero, so negative right-hand sides need no per-row artificials.
Pricing is Dantzig's rule, switching to Bland's rule after a run of
degenerate pivots to rule out cycling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class LPError(RuntimeError):
    """Raised when a linear program is infeasible, unbounded or does not converge."""

    def __init__(self, message: str, status: str):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    fun: float
    nit: int


_DEGENERATE_RUN = 50


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factor = T[:, col].copy()
    factor[row] = 0.0
    T -= np.outer(factor, T[row])


def _iterate(T, basis, banned, max_iter, tol, nit):
    m = T.shape[0] - 1
    bland = False
    degenerate_run = 0
    while True:
        if nit >= max_iter:
            raise LPError(f"simplex did not converge within {max_iter} iterations", "iteration_limit")
        d = T[m, :-1].copy()
        d[banned] = 0.0
        if bland:
            candidates = np.flatnonzero(d < -tol)
            if candidates.size == 0:
                return nit
            col = int(candidates[0])
        else:
            col = int(np.argmin(d))
            if d[col] >= -tol:
                return nit
        column = T[:m, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            raise LPError("linear program is unbounded", "unbounded")
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        if bland:
            row = int(min(ties, key=lambda r: basis[r]))
        else:
            row = int(ties[np.argmax(column[ties])])
        if best <= tol:
            degenerate_run += 1
            if degenerate_run > _DEGENERATE_RUN:
                bland = True
        else:
            degenerate_run = 0
            bland = False
        _pivot(T, row, col)
        basis[row] = col
        nit += 1


def solve_lp(c, A_ub, b_ub, *, max_iter: int = 50_000, tol: float = 1e-9) -> LPResult:
    """Minimize ``c @ x`` subject to ``A_ub @ x <= b_ub`` and ``x >= 0``.

    Raises
    ------
    LPError
        If the problem is infeasible, unbounded, or the iteration cap is hit.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A_ub, dtype=float))
    b = np.asarray(b_ub, dtype=float).reshape(-1)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("inconsistent LP dimensions")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise ValueError("LP data must be finite")

    aux = n + m
    T = np.zeros((m + 1, n + m + 2))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, aux] = -1.0
    T[:m, -1] = b
    basis = list(range(n, n + m))
    banned = np.zeros(n + m + 1, dtype=bool)
    nit = 0

    if m and b.min() < 0.0:
        T[m, aux] = 1.0
        _pivot(T, int(np.argmin(b)), aux)
        basis[int(np.argmin(b))] = aux
        nit = _iterate(T, basis, banned, max_iter, tol, nit)
        scale = max(1.0, float(np.abs(b).max()))
        if -T[m, -1] > tol * scale:
            raise LPError("linear program is infeasible", "infeasible")
        if aux in basis:
            r = basis.index(aux)
            cand = np.flatnonzero(np.abs(T[r, :aux]) > tol)
            if cand.size:
                col = int(cand[np.argmax(np.abs(T[r, cand]))])
                _pivot(T, r, col)
                basis[r] = col
    banned[aux] = True

    T[m, :] = 0.0
    T[m, :n] = c
    for r, j in enumerate(basis):
        if T[m, j] != 0.0:
            T[m] -= T[m, j] * T[r]
    nit = _iterate(T, basis, banned, max_iter, tol, nit)

    x_full = np.zeros(n + m + 1)
    for r, j in enumerate(basis):
        x_full[j] = T[r, -1]

    # Recompute the basic solution from the original data; the tableau
    # accumulates rounding over many pivots.
    if aux not in basis and m:
        full = np.hstack([A, np.eye(m)])
        try:
            xb = np.linalg.solve(full[:, basis], b)
        except np.linalg.LinAlgError:
            xb = None
        if xb is not None and np.all(np.isfinite(xb)):
            scale = max(1.0, float(np.abs(xb).max()))
            if xb.min() >= -1e-9 * scale:
                x_full[:] = 0.0
                x_full[basis] = np.maximum(xb, 0.0)
    x = x_full[:n]
    return LPResult(x=x, fun=float(c @ x), nit=nit)
