"""Projection of the N-th Lie derivative onto the span of the lower ones.

The compact set is a box sampled on a uniform grid; each coordinate's fit
is a discrete L1 or L-infinity approximation problem solved as a linear
program, followed by a second LP that picks the minimum 1-norm coefficient
row among the optimal ones.
"""
from __future__ import annotations

import enum
import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .lie import LieSequence
from .simplex import LPError, solve_lp

log = logging.getLogger(__name__)

TIE_BREAK_RTOL = 1e-9
TIE_BREAK_ATOL = 1e-12


class Norm(str, enum.Enum):
    L1 = "l1"
    LINF = "linf"

    @classmethod
    def parse(cls, value) -> "Norm":
        if isinstance(value, Norm):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown norm {value!r}; expected 'l1' or 'linf'") from None


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lower, upper]`` sampled with a uniform ``step``."""

    lower: tuple
    upper: tuple
    step: float

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "step", float(self.step))
        if len(lo) != len(hi) or not lo:
            raise ValueError("lower and upper must have the same positive length")
        if not all(math.isfinite(v) for v in lo + hi):
            raise ValueError("box bounds must be finite")
        if not self.step > 0 or not math.isfinite(self.step):
            raise ValueError("step must be positive")
        for a, b in zip(lo, hi):
            if not a < b:
                raise ValueError(f"empty box axis [{a}, {b}]")
            ratio = (b - a) / self.step
            if ratio < 1 - 1e-9:
                raise ValueError(f"step {self.step} larger than box extent {b - a}")
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
                raise ValueError(f"step {self.step} does not divide extent {b - a}")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def counts(self) -> tuple:
        return tuple(int(round((b - a) / self.step)) + 1 for a, b in zip(self.lower, self.upper))


@dataclass(frozen=True)
class Grid:
    box: Box
    points: np.ndarray  # (count, n), lexicographic, last axis fastest

    def __len__(self) -> int:
        return self.points.shape[0]


def make_grid(box: Box, dimension: int | None = None) -> Grid:
    if dimension is not None and dimension != box.dimension:
        raise ValueError(f"box has {box.dimension} axes, expected {dimension}")
    axes = [np.linspace(a, b, k) for a, b, k in zip(box.lower, box.upper, box.counts())]
    pts = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, box.dimension)
    return Grid(box=box, points=pts)


@dataclass(frozen=True)
class LambdaSet:
    """Coefficient matrices ``lambdas[i]`` (n x n) of the companion system.

    ``residual_per_coordinate`` holds the optimal approximation error of each
    coordinate in ``norm_used``; NaN when the matrices were not fitted.
    """

    order: int
    dimension: int
    lambdas: tuple
    residual_per_coordinate: np.ndarray
    norm_used: Norm | None

    def __post_init__(self):
        if len(self.lambdas) != self.order:
            raise ValueError("need exactly `order` coefficient matrices")
        for lam in self.lambdas:
            if lam.shape != (self.dimension, self.dimension) or not np.all(np.isfinite(lam)):
                raise ValueError("coefficient matrices must be finite n x n")

    @property
    def residual(self) -> float:
        return float(np.max(self.residual_per_coordinate))


def _derivative_values(seq: LieSequence, grid: Grid) -> np.ndarray:
    """Values of every Lie derivative on the grid, shape (N + 1, points, n)."""
    if len(grid) == 0:
        raise ValueError("empty grid")
    if grid.points.shape[1] != seq.dimension:
        raise ValueError("grid and vector field dimensions differ")
    vals = np.stack([d.evaluate_many(grid.points) for d in seq.derivatives])
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite Lie derivative values on the grid")
    return vals


def _regressors(vals: np.ndarray, coord: int):
    order = vals.shape[0] - 1
    # column i * n + j holds (L^i)_j
    M = vals[:order].transpose(1, 0, 2).reshape(vals.shape[1], -1)
    return M, vals[order, :, coord].copy()


def regressor_matrix(seq: LieSequence, grid: Grid, coord: int):
    """Regressor matrix and target for coordinate ``coord``.

    Columns are ordered i-major, j-minor: column ``i * n + j`` samples
    ``(L^i)_j`` for ``i < N``; the target samples ``(L^N)_coord``.
    """
    if not 0 <= coord < seq.dimension:
        raise IndexError(f"coordinate {coord} out of range")
    return _regressors(_derivative_values(seq, grid), coord)


def approximation_error(M: np.ndarray, b: np.ndarray, c: np.ndarray, norm) -> float:
    r = M @ c - b
    return float(np.abs(r).sum() if Norm.parse(norm) is Norm.L1 else np.abs(r).max())


def _epigraph(Ms, bs, norm):
    """LP data for min ||Ms c - bs|| with c = c_plus - c_minus."""
    R, p = Ms.shape
    if norm is Norm.LINF:
        slack = -np.ones((R, 1))
        obj = np.r_[np.zeros(2 * p), 1.0]
    else:
        slack = -np.eye(R)
        obj = np.r_[np.zeros(2 * p), np.ones(R)]
    A = np.block([[Ms, -Ms, slack], [-Ms, Ms, slack]])
    return obj, A, np.r_[bs, -bs]


def _resolve_on_support(Ms, bs, cs, norm, opt, bound):
    """Re-fit using only the columns the tie-break kept.

    The tie-break LP spends its objective slack to shrink coefficients; an
    exact re-solve on the same support removes that perturbation.
    """
    support = np.flatnonzero(np.abs(cs) > 1e-8 * np.abs(cs).max(initial=0.0))
    if support.size == 0 or support.size == cs.size:
        return cs
    sub = Ms[:, support]
    obj, A, rhs = _epigraph(sub, bs, norm)
    try:
        res = solve_lp(obj, A, rhs)
    except LPError:
        return cs
    k = support.size
    refit = np.zeros_like(cs)
    refit[support] = res.x[:k] - res.x[k:2 * k]
    err = approximation_error(Ms, bs, refit, norm)
    if err <= min(bound, approximation_error(Ms, bs, cs, norm)):
        return refit
    return cs


def fit_coefficients(M, b, norm=Norm.LINF, tie_break: bool = True):
    """Best approximation of ``b`` by ``M @ c`` in the discrete L1 / L-inf norm.

    Returns ``(c, error)`` with the error in the chosen norm. With
    ``tie_break`` a second LP selects the minimum 1-norm ``c`` among
    solutions within ``opt * (1 + 1e-9) + 1e-12`` of the optimum; the
    tolerance applies to the normalized problem (unit max-abs columns and
    target).
    """
    norm = Norm.parse(norm)
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    if M.ndim != 2 or M.shape[0] == 0 or M.shape[0] != b.shape[0]:
        raise ValueError("regressor matrix and target have inconsistent shapes")
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite regressor values")
    R, p = M.shape
    col_scale = np.abs(M).max(axis=0)
    col_scale[col_scale == 0.0] = 1.0
    b_scale = float(np.abs(b).max()) or 1.0
    Ms = M / col_scale
    bs = b / b_scale

    obj, A, rhs = _epigraph(Ms, bs, norm)
    res = solve_lp(obj, A, rhs)
    cs = res.x[:p] - res.x[p:2 * p]
    opt = approximation_error(Ms, bs, cs, norm)

    if tie_break and p > 0:
        weights = 1.0 / col_scale
        weights /= weights.max()
        bound = opt * (1 + TIE_BREAK_RTOL) + TIE_BREAK_ATOL
        obj2 = np.r_[weights, weights, np.zeros(A.shape[1] - 2 * p)]
        cap = np.r_[np.zeros(2 * p), obj[2 * p:]][None, :]
        try:
            res2 = solve_lp(obj2, np.vstack([A, cap]), np.r_[rhs, bound])
        except LPError as exc:
            log.warning("tie-break LP failed (%s); keeping the first optimal solution", exc)
        else:
            cs2 = res2.x[:p] - res2.x[p:2 * p]
            if approximation_error(Ms, bs, cs2, norm) <= bound * (1 + 1e-6):
                cs2 = _resolve_on_support(Ms, bs, cs2, norm, opt, bound)
                # the first optimum wins when it is already minimal
                w1, w2 = weights @ np.abs(cs), weights @ np.abs(cs2)
                if not (w1 <= w2 * (1 + TIE_BREAK_RTOL) + TIE_BREAK_ATOL
                        and opt <= approximation_error(Ms, bs, cs2, norm)):
                    cs = cs2
    c = cs * b_scale / col_scale
    return c, approximation_error(M, b, c, norm)


def project(seq: LieSequence, grid: Grid, norm=Norm.LINF, tie_break: bool = True) -> LambdaSet:
    """Fit the coefficient matrices of the N-th polyflow approximation on ``grid``.

    Row k of the stacked ``[Lambda_0 ... Lambda_{N-1}]`` is the coefficient
    vector fitted for coordinate k; coordinates are solved independently.
    """
    norm = Norm.parse(norm)
    vals = _derivative_values(seq, grid)
    n, N = seq.dimension, seq.order
    rows = np.zeros((n, N * n))
    residuals = np.zeros(n)
    for k in range(n):
        M, b = _regressors(vals, k)
        rows[k], residuals[k] = fit_coefficients(M, b, norm, tie_break=tie_break)
    lambdas = tuple(rows[:, i * n:(i + 1) * n].copy() for i in range(N))
    return LambdaSet(order=N, dimension=n, lambdas=lambdas,
                     residual_per_coordinate=residuals, norm_used=norm)


def binomial_lambdas(order: int, eps: float, dimension: int) -> LambdaSet:
    """``Lambda_i = -C(N, i) eps^(N-i) I``: every companion eigenvalue sits at ``-eps``."""
    if int(order) != order or order < 1:
        raise ValueError("order must be an integer >= 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    N = int(order)
    eye = np.eye(dimension)
    lambdas = tuple(-math.comb(N, i) * eps ** (N - i) * eye for i in range(N))
    return LambdaSet(order=N, dimension=dimension, lambdas=lambdas,
                     residual_per_coordinate=np.full(dimension, np.nan), norm_used=None)


def exactness_residual(seq: LieSequence, grid: Grid) -> float:
    """Largest L-infinity residual over coordinates; ~0 certifies a numerical N-polyflow on the grid."""
    return project(seq, grid, Norm.LINF, tie_break=False).residual
