"""Command-line entry points.

Subcommands: ``calibrate``, ``verify``, ``solve``, ``norms``,
``scaling``, ``coincidence``.  Configuration is a flat ``key = value``
file (``#`` starts a comment); command-line ``--set key=value`` flags
override file values, duplicates resolve last-one-wins with a warning.
Exit codes: 0 pass, 1 threshold failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path

from . import experiments, io, norms, solver
from .norms import INF, BesovIndex, besov_norm
from .spectral import Grid


class ConfigError(ValueError):
    """Malformed configuration: unknown key, bad type, or bad value."""


def _parse_float(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return INF
    return float(text)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(_parse_float(tok) for tok in text.split(",") if tok.strip())


def _parse_tuples(text: str) -> tuple[tuple[float, float, float], ...]:
    out = []
    for group in text.split(","):
        group = group.strip()
        if not group:
            continue
        parts = group.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected alpha:ell:eps, got {group!r}")
        out.append(tuple(_parse_float(p) for p in parts))
    return tuple(out)


@dataclass
class RunConfig:
    n: int = 2
    N: int = 64
    eps: float = 0.5
    s: float = 0.0
    p: float = INF
    q: float = INF
    T: float = 0.25
    M: int = 16
    tol: float = 1e-10
    max_iter: int = 100
    seed: int = 0
    outdir: str = "out"
    calibration: str = ""
    data_kind: str = "taylor_green_2d"
    data_amplitude: float = 1.0
    data_sigma: float = 0.5
    divergence_free: bool = True
    snapshot_stride: int = 0
    override_smallness: bool = False
    lambdas: tuple[float, ...] = (1.0, 2.0, 4.0)
    tuples: tuple[tuple[float, float, float], ...] = (
        (4.0, INF, 0.5),
        (8.0, INF, 0.75),
        (8.0, 4.0, 0.5),
    )
    eta: float = 0.75
    input: str = ""

    def validate(self) -> "RunConfig":
        if not (0.0 < self.eps < 1.0):
            raise ConfigError("eps must lie in (0,1)")
        if self.s <= -1.0:
            raise ConfigError("s must exceed -1")
        if self.p < 1 or self.q < 1:
            raise ConfigError("p and q must lie in [1, inf]")
        if self.T <= 0:
            raise ConfigError("T must be positive")
        if self.M < 2:
            raise ConfigError("M must be at least 2")
        if self.n not in (2, 3):
            raise ConfigError("n must be 2 or 3")
        if self.N < 8 or (self.N & (self.N - 1)) != 0:
            raise ConfigError("N must be a power of two >= 8")
        if self.data_kind not in experiments.DATA_KINDS:
            raise ConfigError(f"unknown data_kind {self.data_kind!r}")
        return self


_PARSERS = {
    "n": int, "N": int, "M": int, "max_iter": int, "seed": int, "snapshot_stride": int,
    "eps": _parse_float, "s": _parse_float, "p": _parse_float, "q": _parse_float,
    "T": _parse_float, "tol": _parse_float, "data_amplitude": _parse_float,
    "data_sigma": _parse_float, "eta": _parse_float,
    "divergence_free": _parse_bool, "override_smallness": _parse_bool,
    "lambdas": _parse_floats, "tuples": _parse_tuples,
    "outdir": str, "calibration": str, "data_kind": str, "input": str,
}
_KNOWN_KEYS = {f.name for f in dc_fields(RunConfig)}


def parse_config(path: str | None, overrides: list[str] | None = None) -> RunConfig:
    """Build a run configuration from an optional file plus override flags.

    The file holds ``key = value`` lines; blank lines and ``#`` comments
    are ignored.  Unknown keys and malformed values are rejected with the
    offending line in the message; a duplicated key keeps the last value
    and prints a warning.  Flags (``key=value`` strings) override the file.
    """
    items: list[tuple[str, str, str]] = []
    if path:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"configuration file {path} does not exist")
        for lineno, line in enumerate(p.read_text().splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, value = (part.strip() for part in stripped.split("=", 1))
            items.append((key, value, f"{path}:{lineno}"))
    for ov in overrides or []:
        if "=" not in ov:
            raise ConfigError(f"override flag {ov!r} is not of the form key=value")
        key, value = (part.strip() for part in ov.split("=", 1))
        items.append((key, value, f"flag {ov!r}"))

    seen: dict[str, str] = {}
    cfg = RunConfig()
    for key, value, where in items:
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in seen:
            print(f"warning: duplicate key {key!r} ({where} overrides {seen[key]})",
                  file=sys.stderr)
        seen[key] = where
        try:
            setattr(cfg, key, _PARSERS[key](value))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from exc
    return cfg.validate()


def _solver_config(cfg: RunConfig, calib: solver.CalibrationTable) -> solver.SolverConfig:
    return solver.SolverConfig(
        eps=cfg.eps, T=cfg.T, M=cfg.M, s=cfg.s, p=cfg.p, q=cfg.q,
        tol=cfg.tol, max_iter=cfg.max_iter, calibration=calib,
        override_smallness=cfg.override_smallness,
    )


def _load_calibration(cfg: RunConfig) -> solver.CalibrationTable:
    if not cfg.calibration:
        raise ConfigError(
            "no calibration file configured; run the calibrate subcommand first "
            "and point 'calibration' at its output"
        )
    path = Path(cfg.calibration)
    if not path.exists():
        raise ConfigError(
            f"calibration file {path} not found; run the calibrate subcommand first"
        )
    return solver.CalibrationTable.from_json(path.read_text())


def _make_datum(cfg: RunConfig):
    grid = Grid(cfg.n, cfg.N)
    return experiments.make_initial_data(
        cfg.data_kind,
        grid,
        seed=cfg.seed,
        amplitude=cfg.data_amplitude,
        sigma=cfg.data_sigma,
        divergence_free=cfg.divergence_free,
    )


def dispatch(command: str, cfg: RunConfig) -> int:
    """Run one subcommand; returns the process exit code."""
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    if command == "calibrate":
        table = experiments.calibrate_constants(seed=cfg.seed)
        io.write_json(outdir / "calibration.json", table.to_json())
        print(f"calibration written to {outdir / 'calibration.json'}")
        return 0

    if command == "verify":
        report = experiments.run_property_suites(seed=cfg.seed)
        io.write_json(outdir / "verify_report.json", report.to_json())
        io.write_json(outdir / "verify_report.txt", report.summary())
        print(report.summary())
        return 0 if report.passed else 1

    if command == "solve":
        calib = _load_calibration(cfg)
        f = _make_datum(cfg)
        record, trace = solver.picard_solve(f, _solver_config(cfg, calib))
        io.write_norm_csv(outdir / "norms.csv", record)
        io.write_json(outdir / "picard_trace.json", trace.to_json())
        if trace.initial is not None:
            lam = solver.admissible_lambda(cfg.s, cfg.eps)
            ptrace = solver.persistence_check(trace, cfg.s, cfg.p, cfg.q, lam)
            io.write_json(outdir / "persistence_trace.json", ptrace.to_json())
        if cfg.snapshot_stride > 0:
            for mi in range(0, cfg.M + 1, cfg.snapshot_stride):
                io.write_snapshot(outdir / f"u_{mi:04d}.bsnf", record.u.node(mi))
        print(
            f"solve: verdict={trace.verdict} iterations={trace.iterations} "
            f"residual={trace.residual_z:.3e}"
        )
        return 0 if trace.verdict == "converged" else 1

    if command == "norms":
        if not cfg.input:
            raise ConfigError("norms needs input=<snapshot path>")
        field = io.read_snapshot(cfg.input)
        report = besov_norm(field, BesovIndex(cfg.s, cfg.p, cfg.q))
        io.write_json(outdir / "norms.json", report.to_json())
        print(report.to_json())
        return 0

    if command == "scaling":
        calib = _load_calibration(cfg)
        f = _make_datum(cfg)
        report = experiments.scaling_experiment(f, cfg.lambdas, cfg.eps, calib, M=cfg.M)
        io.write_json(outdir / "scaling_report.json", report.to_json())
        print(report.summary())
        return 0 if report.passed else 1

    if command == "coincidence":
        calib = _load_calibration(cfg)
        f = _make_datum(cfg)
        report = experiments.class_coincidence(
            f, list(cfg.tuples), cfg.eta, _solver_config(cfg, calib)
        )
        io.write_json(outdir / "coincidence_report.json", report.to_json())
        print(report.summary())
        return 0 if report.passed else 1

    raise ConfigError(f"unknown subcommand {command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="besovns",
        description="Dyadic-shell calculus and mild-solution solver on the periodic torus",
    )
    parser.add_argument("command", choices=(
        "calibrate", "verify", "solve", "norms", "scaling", "coincidence"))
    parser.add_argument("--config", default=None, help="path to a key = value file")
    parser.add_argument(
        "--set", dest="overrides", action="append", default=[],
        metavar="KEY=VALUE", help="override a configuration key (repeatable)",
    )
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config, args.overrides)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        return dispatch(args.command, cfg)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (io.SnapshotError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except solver.SmallnessError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
