"""Reference integration of the nonlinear flow, trajectory comparison and
checks of the recurrence bound and derivative identities behind the
convergence theorem."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .approx import binomial_lambdas
from .lie import hadamard_radius, lie_sequence, taylor, taylor_eval
from .linsys import (CompanionSystem, Trajectory, TrajectoryLabel, build_companion,
                     expm)
from .polyalg import PolyVector, field_evaluator


class IntegrationError(RuntimeError):
    pass


def time_grid(t_max: float, dt: float) -> np.ndarray:
    if not dt > 0 or not t_max >= dt:
        raise ValueError("need dt > 0 and t_max >= dt")
    steps = int(round(t_max / dt))
    if abs(steps * dt - t_max) > 1e-9 * t_max:
        raise ValueError(f"t_max={t_max} is not a multiple of dt={dt}")
    return np.arange(steps + 1) * dt


def _rk4_states(rhs, x0, dt, steps):
    out = np.empty((steps + 1, x0.size))
    x = x0.copy()
    out[0] = x
    h2 = 0.5 * dt
    for k in range(1, steps + 1):
        k1 = rhs(x)
        k2 = rhs(x + h2 * k1)
        k3 = rhs(x + h2 * k2)
        k4 = rhs(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise IntegrationError(f"non-finite state at t={k * dt:g}")
        out[k] = x
    return out


def rk4(f: PolyVector, x0, t_max: float, dt: float, *, rtol: float = 1e-6) -> Trajectory:
    """Fixed-step classical Runge-Kutta on ``x' = f(x)``.

    The run is repeated with ``dt / 2`` and the two terminal states must agree
    to ``rtol`` (1-norm, relative), otherwise :class:`IntegrationError`.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.size != f.dimension:
        raise ValueError(f"x0 has length {x0.size}, expected {f.dimension}")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 has non-finite entries")
    times = time_grid(t_max, dt)
    steps = times.size - 1
    rhs = field_evaluator(f)
    with np.errstate(over="raise", invalid="raise"):
        try:
            coarse = _rk4_states(rhs, x0, dt, steps)
            fine_end = _rk4_states(rhs, x0, dt / 2, 2 * steps)[-1]
        except FloatingPointError as exc:
            raise IntegrationError(f"overflow during integration: {exc}") from None
    diff = np.abs(coarse[-1] - fine_end).sum()
    if diff > rtol * np.abs(fine_end).sum() + 1e-12:
        raise IntegrationError(
            f"step-halving check failed: terminal states differ by {diff:.3e}; "
            "reduce dt or shorten the horizon"
        )
    return Trajectory.from_samples(times, coarse, TrajectoryLabel.TRUE_FLOW)


def taylor_trajectory(f: PolyVector, x0, order: int, times) -> Trajectory:
    tp = taylor(f, x0, order)
    states = np.array([taylor_eval(tp, t) for t in times])
    return Trajectory.from_samples(times, states, TrajectoryLabel.TAYLOR)


@dataclass(frozen=True)
class ErrorReport:
    sup_error: float
    terminal_error: float
    blow_up: bool
    horizon: float


def compare(a: Trajectory, b: Trajectory) -> ErrorReport:
    """1-norm state differences over the time range both trajectories cover."""
    k = min(len(a), len(b))
    ta, tb = a.times[:k], b.times[:k]
    if a.dimension != b.dimension:
        raise ValueError("trajectories have different dimensions")
    if not np.allclose(ta, tb, rtol=1e-12, atol=1e-12):
        raise ValueError("trajectories are sampled on different time grids")
    blow_up = a.blow_up or b.blow_up
    if k == 0:
        return ErrorReport(math.nan, math.nan, blow_up, 0.0)
    err = np.abs(a.states[:k] - b.states[:k]).sum(axis=1)
    return ErrorReport(sup_error=float(err.max()), terminal_error=float(err[-1]),
                       blow_up=blow_up, horizon=float(ta[-1]))


@dataclass(frozen=True)
class RecurrenceSpec:
    """``X_n = sum_i k[i] @ X_{n-N+i}`` with ``N = len(k)`` and initial values ``X_init``."""

    k: tuple
    X_init: tuple

    def __post_init__(self):
        ks = tuple(np.atleast_2d(np.asarray(m, dtype=float)) for m in self.k)
        xs = tuple(np.atleast_1d(np.asarray(x, dtype=float)) for x in self.X_init)
        if not ks or len(ks) != len(xs):
            raise ValueError("need N coefficient matrices and N initial vectors")
        m = ks[0].shape[0]
        if any(a.shape != (m, m) for a in ks) or any(x.shape != (m,) for x in xs):
            raise ValueError("inconsistent recurrence dimensions")
        if not all(np.all(np.isfinite(a)) for a in ks + xs):
            raise ValueError("recurrence data must be finite")
        object.__setattr__(self, "k", ks)
        object.__setattr__(self, "X_init", xs)

    @property
    def m(self) -> int:
        return self.k[0].shape[0]

    @property
    def N(self) -> int:
        return len(self.k)

    @property
    def K_bound(self) -> float:
        return max(float(np.abs(a).max()) for a in self.k)


def recurrence_run(spec: RecurrenceSpec, n_max: int) -> list:
    """``[X_0, ..., X_{n_max}]``."""
    if n_max < spec.N:
        raise ValueError("n_max must be at least N")
    xs = list(spec.X_init)
    N = spec.N
    for n in range(N, n_max + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            x = sum(spec.k[i] @ xs[n - N + i] for i in range(N))
        if not np.all(np.isfinite(x)):
            raise OverflowError(f"recurrence overflowed at index {n}")
        xs.append(x)
    return xs


def prop1_bound(spec: RecurrenceSpec, n: int) -> float:
    """``(m K + 1)^(n - N + 1) * sum_{i<N} |X_i|_1``."""
    base = spec.m * spec.K_bound + 1.0
    return base ** (n - spec.N + 1) * sum(float(np.abs(x).sum()) for x in spec.X_init)


def prop1_bound_check(spec: RecurrenceSpec, n_max: int, slack: float = 1e-9) -> bool:
    xs = recurrence_run(spec, n_max)
    for n in range(spec.N - 1, n_max + 1):
        bound = prop1_bound(spec, n)
        if np.abs(xs[n]).sum() > bound + slack * max(1.0, bound):
            return False
    return True


def solution_derivative(sys: CompanionSystem, i: int, t: float = 0.0) -> np.ndarray:
    """i-th time derivative of the first block of ``expm(A t) z0``."""
    z = expm(sys.A * t) @ sys.z0 if t else sys.z0.copy()
    for _ in range(i):
        z = sys.A @ z
    return z[:sys.dimension]


def prop2_residual(sys: CompanionSystem, i: int, t: float = 0.0) -> float:
    """Relative mismatch of ``phi^(i) = sum_j Lambda_j phi^(i-N+j)`` for ``i >= N``."""
    N = sys.order
    if i < N:
        raise ValueError("the identity holds for i >= N")
    lhs = solution_derivative(sys, i, t)
    rhs = sum(lam @ solution_derivative(sys, i - N + j, t) for j, lam in enumerate(sys.lambdas()))
    scale = max(np.abs(lhs).sum(), np.abs(rhs).sum(), 1e-300)
    return float(np.abs(lhs - rhs).sum() / scale)


def convergence_study(f: PolyVector, x0, eps: float = 0.1, orders=(2, 4, 6, 8),
                      t_probe: float = 1.0, dt: float = 1e-3) -> list:
    """``[(N, |pi_N(x0, t_probe) - psi(x0, t_probe)|_1), ...]`` using the binomial coefficients.

    ``psi`` is the RK4 reference. Probing at or beyond the estimated Taylor
    radius only warns.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if not eps > 0:
        raise ValueError("eps must be positive")
    orders = sorted(int(N) for N in orders)
    radius = hadamard_radius(taylor(f, x0, 20), 5)
    if abs(t_probe) >= radius:
        warnings.warn(f"t_probe={t_probe} lies outside the estimated radius {radius:.4g}",
                      RuntimeWarning, stacklevel=2)
    if t_probe == 0.0:
        truth = x0
    else:
        steps = max(1, math.ceil(abs(t_probe) / dt))
        truth = rk4(f, x0, abs(t_probe), abs(t_probe) / steps).states[-1] if t_probe > 0 else None
        if truth is None:
            back = PolyVector([-c for c in f])
            truth = rk4(back, x0, -t_probe, -t_probe / steps).states[-1]
    seq = lie_sequence(f, max(1, orders[-1] - 1))
    out = []
    for N in orders:
        sys = build_companion(binomial_lambdas(N, eps, f.dimension), seq, x0)
        approx = (expm(sys.A * t_probe) @ sys.z0)[:sys.dimension]
        out.append((N, float(np.abs(approx - truth).sum())))
    return out
