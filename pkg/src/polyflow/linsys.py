"""Block-companion linear systems, their closed-form solution and the
Jacobian linearization baseline."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .approx import LambdaSet
from .eigen import eigvals
from .lie import LieSequence
from .polyalg import PolyVector

BLOWUP_NORM = 1e12


class TrajectoryLabel(str, enum.Enum):
    TRUE_FLOW = "truth"
    POLYFLOW = "polyflow"
    TAYLOR = "taylor"
    LINEARIZATION = "linearization"


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (len(times), n)
    label: TrajectoryLabel
    blow_up: bool = False

    @classmethod
    def from_samples(cls, times, states, label) -> "Trajectory":
        """Build a trajectory, cutting it at the first non-finite or huge sample."""
        times = np.asarray(times, dtype=float).reshape(-1)
        states = np.asarray(states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        if states.shape[0] != times.shape[0]:
            raise ValueError("times and states differ in length")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        with np.errstate(invalid="ignore", over="ignore"):
            bad = ~np.isfinite(states).all(axis=1) | (np.abs(states).sum(axis=1) > BLOWUP_NORM)
        blow_up = bool(bad.any())
        if blow_up:
            cut = int(np.argmax(bad))
            times, states = times[:cut], states[:cut]
        return cls(times=times, states=states, label=TrajectoryLabel(label), blow_up=blow_up)

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.times.shape[0]


@dataclass(frozen=True)
class CompanionSystem:
    """``z' = A z`` with ``z`` of length n*N; the state is ``z[:n] + offset``."""

    dimension: int
    order: int
    A: np.ndarray
    z0: np.ndarray
    offset: np.ndarray = field(default=None)

    def __post_init__(self):
        size = self.dimension * self.order
        A = np.asarray(self.A, dtype=float)
        z0 = np.asarray(self.z0, dtype=float).reshape(-1)
        if A.shape != (size, size) or z0.shape != (size,):
            raise ValueError(f"A must be {size}x{size} and z0 of length {size}")
        if not np.all(np.isfinite(z0)):
            raise ValueError("z0 has non-finite entries")
        off = np.zeros(self.dimension) if self.offset is None else np.asarray(self.offset, dtype=float)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "z0", z0)
        object.__setattr__(self, "offset", off)

    def lambdas(self) -> list:
        n = self.dimension
        return [self.A[-n:, i * n:(i + 1) * n] for i in range(self.order)]


def companion_matrix(lambdas) -> np.ndarray:
    """Identity blocks on the block super-diagonal, ``[L0 ... L_{N-1}]`` in the last block row."""
    N = len(lambdas)
    n = lambdas[0].shape[0]
    A = np.zeros((n * N, n * N))
    for i in range(N - 1):
        A[i * n:(i + 1) * n, (i + 1) * n:(i + 2) * n] = np.eye(n)
    A[(N - 1) * n:, :] = np.hstack(lambdas)
    return A


def build_companion(lambdas: LambdaSet, seq: LieSequence, x0) -> CompanionSystem:
    """Companion system with initial state ``(x0, L^1(x0), ..., L^{N-1}(x0))``.

    ``seq`` must reach order ``N - 1`` at least.
    """
    n, N = lambdas.dimension, lambdas.order
    if seq.dimension != n:
        raise ValueError(f"dimension mismatch: lambdas {n}, Lie sequence {seq.dimension}")
    if seq.order < N - 1:
        raise ValueError(f"Lie sequence of order {seq.order} too short for N={N}")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape[0] != n:
        raise ValueError(f"x0 has length {x0.shape[0]}, expected {n}")
    z0 = seq.evaluate(x0, upto=N).reshape(-1)
    return CompanionSystem(dimension=n, order=N, A=companion_matrix(lambdas.lambdas), z0=z0)


def expm(M, *, max_norm: float = 0.5, terms: int = 13) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a truncated Taylor series.

    ``M`` is scaled by ``2**-s`` until its 1-norm is at most ``max_norm``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expm needs a square matrix")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    n = M.shape[0]
    norm = np.abs(M).sum(axis=0).max() if n else 0.0
    s = max(0, math.ceil(math.log2(norm / max_norm))) if norm > max_norm else 0
    B = M / 2.0 ** s
    eye = np.eye(n)
    E = eye.copy()
    for k in range(terms, 0, -1):
        E = eye + (B @ E) / k
    for _ in range(s):
        E = E @ E
    return E


def simulate_linear(sys: CompanionSystem, times, z0=None,
                    label=TrajectoryLabel.POLYFLOW) -> Trajectory:
    """First block of ``expm(A t) z0`` (plus ``sys.offset``) at each time.

    Uniform grids reuse a single propagator ``expm(A dt)``.
    """
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size == 0 or times[0] != 0.0:
        raise ValueError("times must start at 0")
    z = sys.z0 if z0 is None else np.asarray(z0, dtype=float).reshape(-1)
    n = sys.dimension
    steps = np.diff(times)
    out = np.empty((times.size, n))
    out[0] = z[:n]
    if steps.size:
        uniform = np.allclose(steps, steps[0], rtol=1e-12, atol=0.0)
        P = expm(sys.A * steps[0]) if uniform else None
        for k, h in enumerate(steps, start=1):
            z = (P if uniform else expm(sys.A * h)) @ z
            out[k] = z[:n]
            if not np.all(np.isfinite(z)) or np.abs(z[:n]).sum() > BLOWUP_NORM:
                out[k + 1:] = np.nan
                break
    return Trajectory.from_samples(times, out + sys.offset, label)


def jacobian_linearization(f: PolyVector, xstar) -> CompanionSystem:
    """Order-1 system ``(x - x*)' = J(x*) (x - x*)``; pass ``z0 = x0 - x*`` when simulating."""
    xstar = np.asarray(xstar, dtype=float).reshape(-1)
    J = f.jacobian(xstar)
    return CompanionSystem(dimension=f.dimension, order=1, A=J,
                           z0=np.zeros(f.dimension), offset=xstar)


def spectral_report(sys: CompanionSystem, merge_multiple: bool = True) -> np.ndarray:
    """Eigenvalues of ``sys.A`` sorted by real part.

    Numerically split multiple eigenvalues are reported at their cluster
    mean unless ``merge_multiple`` is False (see :func:`polyflow.eigen.merge_multiple`).
    """
    return eigvals(sys.A, merge=merge_multiple)
