"""Command-line front end.

    ceisim run A --out runs/ --plot
    ceisim run --config my_scenario.ini
    ceisim sweep --velocities 6..14:2 --out sweep/
    ceisim verify posterior
    ceisim list-scenarios
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verify as _verify
from .engine import SimOutcome, replans_csv, run as run_scenario, steady_state_gap, trace_csv, Simulation
from .scenario import PRESET_DESCRIPTIONS, PRESETS, ConfigError, gap_sweep_protocol, load_config, preset

log = logging.getLogger("ceisim")


@dataclass
class RunReport:
    outcome: SimOutcome
    trace_path: Path
    plot_paths: list[Path] = field(default_factory=list)
    timing: float = 0.0


@dataclass
class SweepReport:
    rows: list  # (velocity, gap or None, collided)
    slope: float | None = None
    intercept: float | None = None
    r_squared: float | None = None


# --------------------------------------------------------------------------
# run


def resolve_scenario(name: str | None, config_path: str | None):
    if config_path is not None:
        return load_config(config_path)
    if name is None:
        raise ConfigError("give a scenario name or --config")
    if name in PRESETS:
        return preset(name)
    return load_config(name)


def cmd_run(scenario, out_dir, plot: bool = False) -> RunReport:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    sim = Simulation(scenario)
    trace, outcome = sim.run()
    elapsed = time.perf_counter() - t0
    stem = scenario.name
    trace_path = out_dir / f"{stem}_trace.csv"
    trace_path.write_text(trace_csv(trace), encoding="utf-8")
    (out_dir / f"{stem}_replans.csv").write_text(replans_csv(sim.replans), encoding="utf-8")
    (out_dir / f"{stem}_outcome.json").write_text(outcome.to_json(), encoding="utf-8")
    plots = []
    if plot:
        from .plots import run_figures

        plots = run_figures(trace, scenario, out_dir, stem)
    return RunReport(outcome, trace_path, plots, elapsed)


# --------------------------------------------------------------------------
# sweep


def parse_range(text: str) -> list[float]:
    """``start..end[:step]`` inclusive of ``end``; step defaults to 1."""
    try:
        body, _, step = text.partition(":")
        start, end = body.split("..")
        start, end = float(start), float(end)
        step = float(step) if step else 1.0
    except ValueError:
        raise ConfigError(f"velocities: expected start..end[:step], got {text!r}") from None
    if step <= 0 or end < start:
        raise ConfigError(f"velocities: empty range {text!r}")
    n = int(np.floor((end - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(n)]


def _sweep_one(config):
    trace, outcome = run_scenario(config)
    if outcome.collided:
        return None, True
    return steady_state_gap(trace, config.track.vehicle_length), False


def worker_count(jobs: int) -> int:
    raw = os.environ.get("CEI_SIM_THREADS")
    cap = os.cpu_count() or 1
    if raw:
        try:
            cap = max(1, int(raw))
        except ValueError:
            raise ConfigError(f"CEI_SIM_THREADS: not an integer: {raw!r}") from None
    return max(1, min(cap, jobs))


def ols(x, y):
    """Slope, intercept and R^2 of a least-squares line; ``None`` if under-determined."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if x.size < 2 or np.ptp(x) == 0:
        return None
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (intercept + slope * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def cmd_sweep(velocities, out_dir=None) -> SweepReport:
    configs = gap_sweep_protocol(velocities)
    workers = worker_count(len(configs))
    if workers == 1:
        results = [_sweep_one(c) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, configs))
    rows = [(float(v), gap, collided) for v, (gap, collided) in zip(velocities, results)]
    ok = [(v, g) for v, g, c in rows if not c]
    fit = ols([v for v, _ in ok], [g for _, g in ok])
    report = SweepReport(rows)
    if fit is not None:
        report.slope, report.intercept, report.r_squared = fit
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("velocity", "steady_state_gap", "collided"))
            for v, g, c in rows:
                w.writerow((repr(v), "" if g is None else repr(g), c))
        from .plots import sweep_figure

        sweep_figure([v for v, _ in ok], [g for _, g in ok], fit, out_dir / "sweep.svg")
    return report


# --------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ceisim", description="Two-driver merge interaction simulator.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scenario")
    r.add_argument("scenario", nargs="?", help="preset name or config file")
    r.add_argument("--config", help="scenario config file")
    r.add_argument("--out", default=".", help="output directory")
    r.add_argument("--plot", action="store_true", help="write SVG panels")

    s = sub.add_parser("sweep", help="car-following gap sweep")
    s.add_argument("--velocities", default="6..14:2", help="start..end[:step] in m/s")
    s.add_argument("--out", default=".", help="output directory")

    v = sub.add_parser("verify", help="compare closed forms against brute-force oracles")
    v.add_argument("suite", choices=[*_verify.SUITES, "all"])

    sub.add_parser("list-scenarios", help="show built-in presets")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            report = cmd_run(resolve_scenario(args.scenario, args.config), args.out, args.plot)
            sys.stdout.write(report.outcome.to_json())
            print(f"trace: {report.trace_path}")
            for path in report.plot_paths:
                print(f"plot: {path}")
            print(f"wall time: {report.timing:.2f} s")
            return 0
        if args.command == "sweep":
            report = cmd_sweep(parse_range(args.velocities), args.out)
            print("velocity,steady_state_gap,collided")
            for v, g, c in report.rows:
                print(f"{v:g},{'' if g is None else f'{g:.4f}'},{c}")
            if report.slope is None:
                print("fit: undefined (fewer than two usable runs)")
            else:
                print(f"slope={report.slope:.5f} intercept={report.intercept:.5f} "
                      f"r_squared={report.r_squared:.4f}")
            return 0
        if args.command == "verify":
            names = list(_verify.SUITES) if args.suite == "all" else [args.suite]
            ok = True
            for name in names:
                result = _verify.SUITES[name]()
                print("\n".join(result.lines()))
                ok &= result.passed
            return 0 if ok else 1
        if args.command == "list-scenarios":
            for name in PRESETS:
                print(f"{name:14s} {PRESET_DESCRIPTIONS.get(name, '')}")
            return 0
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1


if __name__ == "__main__":
    sys.exit(main())
