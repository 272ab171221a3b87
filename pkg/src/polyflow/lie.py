"""Lie derivatives of the identity map, Taylor polynomials of the flow and
the Hadamard estimate of their radius of convergence."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .polyalg import Polynomial, PolyVector, add, evaluate, mul, partial


def lie_step(f: PolyVector, g: PolyVector) -> PolyVector:
    """Directional derivative of ``g`` along ``f``: component k is
    ``sum_j dg_k/dx_j * f_j``."""
    if f.dimension != g.dimension:
        raise ValueError(f"dimension mismatch: field {f.dimension}, observable {g.dimension}")
    n = f.dimension
    out = []
    for gk in g:
        acc = Polynomial.zero(n)
        for j in range(n):
            d = partial(gk, j)
            if not d.is_zero() and not f[j].is_zero():
                acc = add(acc, mul(d, f[j]))
        out.append(acc)
    return PolyVector(out)


@dataclass(frozen=True)
class LieSequence:
    """``derivatives[i]`` is the i-th Lie derivative of the identity along ``field``."""

    field: PolyVector
    order: int
    derivatives: tuple

    @property
    def dimension(self) -> int:
        return self.field.dimension

    def evaluate(self, point, upto: int | None = None) -> np.ndarray:
        """Stack of ``L^i(point)`` for ``i < upto`` (default: all), shape ``(upto, n)``."""
        upto = self.order + 1 if upto is None else upto
        return np.array([d.evaluate(point) for d in self.derivatives[:upto]])


def lie_sequence(f: PolyVector, order: int) -> LieSequence:
    if int(order) != order or order < 1:
        raise ValueError("order must be an integer >= 1")
    derivs = [PolyVector.identity(f.dimension)]
    for _ in range(int(order)):
        derivs.append(lie_step(f, derivs[-1]))
    return LieSequence(field=f, order=int(order), derivatives=tuple(derivs))


@dataclass(frozen=True)
class TaylorPoly:
    """Taylor polynomial of the flow in time around ``t = 0``.

    ``coefficients[i]`` already holds ``L^i(x0) / i!``.
    """

    center_state: np.ndarray
    order: int
    coefficients: np.ndarray  # shape (order + 1, n)


def taylor(f: PolyVector, x0, order: int) -> TaylorPoly:
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape[0] != f.dimension:
        raise ValueError(f"x0 has length {x0.shape[0]}, expected {f.dimension}")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 has non-finite entries")
    if int(order) != order or order < 0:
        raise ValueError("order must be a non-negative integer")
    order = int(order)
    coeffs = np.empty((order + 1, f.dimension))
    coeffs[0] = x0
    if order:
        seq = lie_sequence(f, order)
        for i in range(1, order + 1):
            vals = np.array([evaluate(c, x0) for c in seq.derivatives[i]])
            if i <= 170:
                coeffs[i] = vals / float(math.factorial(i))
            else:  # i! overflows a double
                coeffs[i] = vals * math.exp(-math.lgamma(i + 1))
    return TaylorPoly(center_state=x0.copy(), order=order, coefficients=coeffs)


def taylor_eval(tp: TaylorPoly, t: float) -> np.ndarray:
    """Horner evaluation of the Taylor polynomial at time ``t``."""
    t = float(t)
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    acc = tp.coefficients[-1].copy()
    for c in tp.coefficients[-2::-1]:
        acc = acc * t + c
    return acc


def hadamard_radius(tp: TaylorPoly, tail_window: int = 5) -> float:
    """Finite-order estimate of the radius of convergence.

    Uses ``1 / max_i |c_i|_1^(1/i)`` over the last ``tail_window`` indices as
    a surrogate for the limsup; this is an estimator, not the exact radius.
    Returns ``inf`` when the whole tail vanishes.
    """
    if int(tail_window) != tail_window or tail_window < 2 or tail_window > tp.order:
        raise ValueError(f"tail_window must lie in [2, order={tp.order}]")
    start = tp.order - int(tail_window) + 1
    best = 0.0
    for i in range(start, tp.order + 1):
        mag = float(np.abs(tp.coefficients[i]).sum())
        if mag > 0.0:
            best = max(best, math.exp(math.log(mag) / i))
    return math.inf if best == 0.0 else 1.0 / best
