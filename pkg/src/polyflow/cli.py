"""Command-line experiment runner.

Example::

    polyflow --preset example2 --order 4 --out example2.csv
    polyflow --field "-1*x1^3 - 3*x1^2 - 2*x1" --box="-0.1,1;0.1" --x0 1 --order 3

Exit codes: 0 success, 1 error, 2 a trajectory blew up (CSV still written).
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .approx import Box, Norm, make_grid, project
from .lie import lie_sequence
from .linsys import (TrajectoryLabel, build_companion, jacobian_linearization,
                     simulate_linear, spectral_report)
from .polyalg import Polynomial, PolyVector, format_field, parse_field
from .sim import ErrorReport, compare, rk4, taylor_trajectory, time_grid


EXIT_OK, EXIT_ERROR, EXIT_BLOWUP = 0, 1, 2


@dataclass(frozen=True)
class ExperimentConfig:
    field_spec: str
    box: Box
    order: int
    norm: Norm
    x0: tuple
    t_max: float = 5.0
    dt: float = 0.01
    compare_taylor: bool = False
    output_path: str | None = None
    linearize_at: tuple | None = None
    name: str = "custom"

    def vector_field(self) -> PolyVector:
        return parse_field(self.field_spec)

    def validate(self) -> PolyVector:
        f = self.vector_field()
        n = f.dimension
        if self.box.dimension != n:
            raise ValueError(f"box has {self.box.dimension} axes but the field has dimension {n}")
        if len(self.x0) != n:
            raise ValueError(f"x0 has {len(self.x0)} entries but the field has dimension {n}")
        if self.linearize_at is not None and len(self.linearize_at) != n:
            raise ValueError("linearization point has the wrong dimension")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        return f


def lotka_volterra_field(alpha=2 / 3, beta=4 / 3, gamma=1.0, delta=1.0) -> PolyVector:
    """Lotka-Volterra shifted so that the equilibrium sits at the origin."""
    x = Polynomial.variable(2, 0) + 1.0
    y = Polynomial.variable(2, 1) + 0.5
    return PolyVector([alpha * x - beta * x * y, gamma * x * y - delta * y])


def presets() -> dict:
    return {
        "example2": ExperimentConfig(
            name="example2",
            field_spec="x1 + 2*x2^2 + x2^3 - 1*x2^4 ; -1*x2",
            box=Box((0.0, 0.0), (2.0, 2.0), 0.2),
            order=4, norm=Norm.L1, x0=(1.0, 1.0), t_max=5.0, dt=0.01,
        ),
        "cubic": ExperimentConfig(
            name="cubic",
            field_spec="-1*x1^3 - 3*x1^2 - 2*x1",
            box=Box((-0.1,), (1.0,), 0.1),
            order=3, norm=Norm.LINF, x0=(1.0,), t_max=5.0, dt=0.01,
        ),
        "lotka": ExperimentConfig(
            name="lotka",
            field_spec=format_field(lotka_volterra_field()),
            box=Box((-1.0, -0.5), (1.5, 1.0), 0.1),
            order=6, norm=Norm.LINF, x0=(0.3, 0.3), t_max=15.0, dt=0.01,
        ),
    }


@dataclass
class RunResult:
    config: ExperimentConfig
    report: ErrorReport
    lambdas: object
    eigenvalues: np.ndarray
    trajectories: list = field(default_factory=list)

    @property
    def blow_up(self) -> bool:
        return any(tr.blow_up for tr in self.trajectories)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(trajectories, stream) -> None:
    """``t,label,x1..xn`` rows grouped by label."""
    n = trajectories[0].dimension
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["t", "label"] + [f"x{k + 1}" for k in range(n)])
    for tr in sorted(trajectories, key=lambda tr: list(TrajectoryLabel).index(tr.label)):
        for t, state in zip(tr.times, tr.states):
            w.writerow([_fmt(t), tr.label.value] + [_fmt(v) for v in state])


def read_csv(stream) -> dict:
    """Inverse of :func:`write_csv`: ``{label: (times, states)}``."""
    rows = list(csv.reader(stream))
    out: dict[str, tuple[list, list]] = {}
    for row in rows[1:]:
        ts, states = out.setdefault(row[1], ([], []))
        ts.append(float(row[0]))
        states.append([float(v) for v in row[2:]])
    return {k: (np.array(t), np.array(s)) for k, (t, s) in out.items()}


def run_experiment(cfg: ExperimentConfig, out=None) -> RunResult:
    """Project, build the companion system, simulate it and compare against RK4."""
    out = out or sys.stdout
    f = cfg.validate()
    seq = lie_sequence(f, cfg.order)
    grid = make_grid(cfg.box, f.dimension)
    lambdas = project(seq, grid, cfg.norm)
    system = build_companion(lambdas, seq, cfg.x0)
    eigs = spectral_report(system)

    truth = rk4(f, cfg.x0, cfg.t_max, cfg.dt)
    times = time_grid(cfg.t_max, cfg.dt)
    trajectories = [truth, simulate_linear(system, times)]
    if cfg.compare_taylor:
        trajectories.append(taylor_trajectory(f, cfg.x0, cfg.order, times))
    if cfg.linearize_at is not None:
        lin = jacobian_linearization(f, cfg.linearize_at)
        z0 = np.asarray(cfg.x0) - np.asarray(cfg.linearize_at)
        trajectories.append(simulate_linear(lin, times, z0=z0, label=TrajectoryLabel.LINEARIZATION))
    report = compare(truth, trajectories[1])

    with np.printoptions(precision=6, suppress=False, linewidth=120):
        print(f"# {cfg.name}: N={cfg.order}, norm={cfg.norm.value}, grid points={len(grid)}", file=out)
        for i, lam in enumerate(lambdas.lambdas):
            print(f"Lambda_{i} =\n{lam}", file=out)
        print(f"residual per coordinate: {lambdas.residual_per_coordinate}", file=out)
        print("eigenvalues:", file=out)
        for ev in eigs:
            print(f"  {ev.real: .8e} {ev.imag:+.8e}i", file=out)
    print(f"sup_error={report.sup_error:.6e} terminal_error={report.terminal_error:.6e} "
          f"blow_up={report.blow_up} horizon={report.horizon:g}", file=out)

    if cfg.output_path:
        path = Path(cfg.output_path)
        with path.open("w", newline="") as fh:
            write_csv(trajectories, fh)
        print(f"wrote {path}", file=out)
    return RunResult(cfg, report, lambdas, eigs, trajectories)


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def parse_box(text: str) -> Box:
    """``lo1,hi1,lo2,hi2,...;step``."""
    try:
        bounds, step = text.split(";")
        vals = _floats(bounds)
        if len(vals) % 2 or not vals:
            raise ValueError
        return Box(vals[0::2], vals[1::2], float(step))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid box {text!r}: {exc or 'expected lo1,hi1,...;step'}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polyflow", description=__doc__.split("\n\n")[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--field", help="vector field, one component per line or ';'-separated; "
                                     "a path to a file is also accepted")
    src.add_argument("--preset", choices=sorted(presets()), help="built-in experiment")
    p.add_argument("--order", type=int, help="polyflow order N")
    p.add_argument("--box", type=parse_box, help="compact set as 'lo1,hi1,...;step'")
    p.add_argument("--norm", choices=[n.value for n in Norm])
    p.add_argument("--x0", type=_floats, help="initial state, comma-separated")
    p.add_argument("--tmax", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--taylor", action="store_true", help="also emit the Taylor approximation")
    p.add_argument("--linearize", type=_floats, metavar="POINT",
                   help="also emit the Jacobian linearization at POINT")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--list-presets", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> ExperimentConfig:
    if args.preset:
        cfg = presets()[args.preset]
    else:
        if not args.field:
            raise ValueError("either --field or --preset is required")
        text = args.field
        if "\n" not in text and Path(text).is_file():
            text = Path(text).read_text()
        if args.box is None or args.x0 is None:
            raise ValueError("--box and --x0 are required with --field")
        cfg = ExperimentConfig(field_spec=text, box=args.box, order=1, norm=Norm.LINF, x0=args.x0)
    overrides = {
        "order": args.order, "box": args.box, "x0": args.x0, "t_max": args.tmax, "dt": args.dt,
        "output_path": args.out, "linearize_at": args.linearize,
        "norm": Norm.parse(args.norm) if args.norm else None,
    }
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return replace(cfg, compare_taylor=cfg.compare_taylor or args.taylor)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; 2 is reserved for blow-up here
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.list_presets:
        for name, cfg in presets().items():
            print(f"{name}: N={cfg.order} norm={cfg.norm.value} box={cfg.box} x0={cfg.x0}")
        return EXIT_OK
    try:
        result = run_experiment(config_from_args(args))
    except Exception as exc:  # every failure maps to exit code 1
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if result.blow_up:
        print("warning: trajectory blew up; comparison truncated", file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
