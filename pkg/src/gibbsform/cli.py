"""``gibbsform <command> --config FILE [--format text|csv] [--tol T]``.

Exit status: 0 when every check passes, 1 when a residual exceeds its
tolerance (or a solve/quadrature fails), 2 for usage and parse errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import process as proc
from .calculus import DomainError, QuadratureError, QuadratureSpec, RootError
from .config import COMMANDS, FORMATS, ConfigError, RunConfig, parse_config
from .geometry import PhaseSpace
from .lattice import associated_variables, enumerate_lattice
from .systems import Embedding, build_embedding, euler_gap, gibbs_duhem_residual, maxwell_residual, solve_eos
from .tables import emit_tables

DEFAULT_TOL = 1e-9
DEFAULT_QUAD_TOL = 1e-6
DEFAULT_RANGE = (0.1, 10.0)
TOL_ENV = "GIBBSFORM_TOL"


class UsageError(Exception):
    pass


@dataclass
class Report:
    """Ordered ``(quantity, value, limit)`` lines plus free-form notes."""

    rows: list[tuple[str, object, float | None]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    failed: bool = False

    def add(self, name: str, value, limit: float | None = None) -> None:
        self.rows.append((name, value, limit))
        if limit is not None and not abs(value) <= limit:
            self.failed = True

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\r\n")
            w.writerow(["quantity", "value", "limit", "status"])
            for name, value, limit in self.rows:
                w.writerow([name, _num(value), "" if limit is None else _num(limit), _status(value, limit)])
            for note in self.notes:
                w.writerow(["note", note, "", ""])
            w.writerow(["overall", "", "", "FAIL" if self.failed else "pass"])
            return buf.getvalue()
        width = max((len(r[0]) for r in self.rows), default=0)
        lines = []
        for name, value, limit in self.rows:
            line = f"{name.ljust(width)}  {_num(value)}"
            if limit is not None:
                line += f"  (limit {_num(limit)}: {_status(value, limit)})"
            lines.append(line)
        lines.extend(self.notes)
        lines.append(f"overall: {'FAIL' if self.failed else 'pass'}")
        return "\n".join(lines) + "\n"


def _num(v) -> str:
    if isinstance(v, bool) or isinstance(v, str):
        return str(v).lower() if isinstance(v, bool) else v
    return f"{float(v):.12g}"


def _status(value, limit) -> str:
    if limit is None:
        return ""
    return "pass" if abs(value) <= limit else "FAIL"


def resolve_tolerance(cli_tol: float | None, cfg: RunConfig) -> float:
    if cli_tol is not None:
        return cli_tol
    if cfg.tol is not None:
        return cfg.tol
    env = os.environ.get(TOL_ENV)
    if env:
        try:
            v = float(env)
        except ValueError:
            raise UsageError(f"{TOL_ENV}={env!r} is not a number") from None
        if not v > 0 or not math.isfinite(v):
            raise UsageError(f"{TOL_ENV} must be a positive number")
        return v
    return DEFAULT_TOL


# ---------------------------------------------------------------- commands


def run_lattice(cfg: RunConfig, fmt: str) -> tuple[str, int]:
    space = cfg.phase_space()
    lat = enumerate_lattice(space)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["kind", "name", "index_set", "formula_or_lower", "associated"])
        for node in lat.nodes:
            assoc = " ".join(space.display_name(v) for v in associated_variables(space, node.J))
            w.writerow(["potential", node.name, str(node.J), node.formula, assoc])
        for hi, lo in lat.covers():
            w.writerow(["cover", hi.name, str(hi.J), lo.name, ""])
        return buf.getvalue(), 0
    lines = [f"{len(lat.nodes)} potentials, {len(lat.edges)} covering edges"]
    for node in lat.nodes:
        assoc = ", ".join(space.display_name(v) for v in associated_variables(space, node.J))
        lines.append(f"{str(node.J).ljust(2 * space.n + 1)}  {node}    ({assoc})")
    lines.append("covers:")
    lines.extend(f"  {hi.name} > {lo.name}" for hi, lo in lat.covers())
    return "\n".join(lines) + "\n", 0


def run_tables(cfg: RunConfig, fmt: str) -> tuple[str, int]:
    return emit_tables(cfg.phase_space(), fmt), 0


def _embedding(cfg: RunConfig) -> Embedding:
    return build_embedding(cfg.phase_space(), cfg.defining_function())


def _parameter_label(space: PhaseSpace, name: str) -> str:
    kind, i, _ = space.locate(name)
    return space.pair_labels[i][0 if kind == "x" else 1]


def verification_grid(cfg: RunConfig, emb: Embedding) -> list[np.ndarray]:
    """Grid points in parameter order; fixed parameters take a single value."""
    space = emb.space
    ranges = {_parameter_label(space, k): v for k, v in cfg.ranges.items()}
    fixed = {}
    for k, v in cfg.fix.items():
        _, _, sign = space.locate(k)
        fixed[_parameter_label(space, k)] = sign * v
    axes = []
    for name in emb.parameters:
        if name in fixed:
            axes.append(np.array([fixed[name]]))
        else:
            lo, hi = ranges.get(name, DEFAULT_RANGE)
            axes.append(np.array([lo]) if lo == hi else np.linspace(lo, hi, cfg.grid))
    return [np.array(q) for q in itertools.product(*axes)]


def run_verify(cfg: RunConfig, fmt: str, tol: float) -> tuple[str, int]:
    emb = _embedding(cfg)
    space = emb.space
    eos = cfg.eos_constraint() if cfg.space == "standard" else None
    report = Report()
    # the literal laws other than the ideal gas are written per mole
    if eos is not None and eos.name != "ideal_gas" and cfg.fix.get("N") != 1.0:
        report.notes.append(f"{eos.name} law not checked: it is written per mole, add 'fix N=1' to test it")
        eos = None
    params = emb.parameters
    pairs = list(itertools.combinations(range(len(params)), 2))
    gd = 0.0
    euler = 0.0
    eos_max = 0.0
    maxwell = {pair: 0.0 for pair in pairs}
    grid = verification_grid(cfg, emb)
    bad = 0
    for q in grid:
        try:
            gd = max(gd, float(np.max(np.abs(gibbs_duhem_residual(emb, q)))))
            euler = max(euler, abs(euler_gap(emb, q)))
            for pair in pairs:
                maxwell[pair] = max(maxwell[pair], abs(maxwell_residual(emb, q, *pair)))
            if eos is not None:
                eos_max = max(eos_max, abs(eos.residual(emb.point(q))))
        except DomainError as exc:
            bad += 1
            shown = ", ".join(f"{n}={v:g}" for n, v in zip(params, q))
            report.notes.append(f"domain violation at ({shown}): {exc}")
    report.add("system", emb.source.label or emb.potential)
    report.add("parameters", " ".join(space.display_name(p) for p in params))
    report.add("grid_points", float(len(grid)))
    report.add("gibbs_duhem_max", gd, tol)
    for (i, j), v in maxwell.items():
        report.add(f"maxwell_{params[i]}_{params[j]}_max", v, tol)
    report.add("euler_gap_max", euler, tol)
    if eos is not None:
        report.add("eos_residual_max", eos_max, tol)
    if bad:
        report.add("domain_violations", float(bad), 0.0)
    return report.render(fmt), 1 if report.failed else 0


def build_process(cfg: RunConfig) -> proc.ProcessCurve:
    space = cfg.phase_space()
    base = dict(cfg.base)
    if cfg.process == "polyline":
        states = [space.state_from({**base, **pt}) for pt in cfg.points]
        return proc.polyline(space, states, closed=cfg.closed)
    if cfg.process == "ts_square":
        # unit square in the first conjugate plane, counter-clockwise in stored coordinates
        a, b = space.pair_labels[0]
        corners = [{a: 0.0, b: 0.0}, {a: 1.0, b: 0.0}, {a: 1.0, b: 1.0}, {a: 0.0, b: 1.0}]
        return proc.polyline(space, [space.state_from({**base, **c}) for c in corners], closed=True)
    if cfg.process == "constant":
        return proc.constant_curve(space, space.state_from(base))
    if cfg.process == "embedded":
        emb = _embedding(cfg)
        base_q = {_parameter_label(space, k): space.locate(k)[2] * v for k, v in base.items()}
        waypoints = []
        for pt in cfg.points:
            q = dict(base_q)
            q.update({_parameter_label(space, k): space.locate(k)[2] * v for k, v in pt.items()})
            missing = [p for p in emb.parameters if p not in q]
            if missing:
                raise UsageError(f"embedded waypoint lacks {', '.join(missing)} (give them on the point or base line)")
            waypoints.append([q[p] for p in emb.parameters])
        return proc.embedded_polyline(emb, waypoints, closed=cfg.closed)
    raise UsageError(f"unknown process {cfg.process!r}")


def run_process(cfg: RunConfig, fmt: str, tol: float, quad_tol: float, loop_only: bool) -> tuple[str, int]:
    space = cfg.phase_space()
    c = build_process(cfg)
    if loop_only and not c.closed:
        raise UsageError("holonomy needs a closed process (set closed = true)")
    spec = QuadratureSpec(abs_tol=quad_tol)
    report = Report()
    W = proc.work(space, c, spec)
    adm = proc.is_admissible(space, c, tol=tol)
    report.add("work", W)
    report.add("admissible", adm.admissible)
    report.add("max_violation", adm.max_violation)
    if c.closed:
        report.add("holonomy", proc.holonomy(space, c, spec))
    budget = proc.energy_budget(space, c, spec)
    exact = proc.energy_change(space, c)
    report.add("heat_part", budget.heat)
    report.add("work_part", budget.work)
    report.add("energy_part", budget.energy)
    report.add("recomposition_gap", budget.recompose() - W, quad_tol)
    report.add("energy_part_minus_U_change", budget.energy - exact, quad_tol)
    return report.render(fmt), 1 if report.failed else 0


def run_solve_eos(cfg: RunConfig, fmt: str, tol: float) -> tuple[str, int]:
    c = cfg.eos_constraint()
    name, lo, hi = cfg.solve
    report = Report()
    try:
        value = solve_eos(c, cfg.fix, name, (lo, hi), tol=tol)
    except RootError as exc:
        report.notes.append(f"no solution: {exc}")
        report.failed = True
        return report.render(fmt), 1
    space = cfg.phase_space()
    known = dict(cfg.fix)
    known[name] = value
    state = space.state_from(known)
    report.add(name, value)
    report.add("eos_residual", c.residual(state), tol)
    return report.render(fmt), 1 if report.failed else 0


def run(cfg: RunConfig, fmt: str | None = None, tol: float | None = None) -> tuple[str, int]:
    fmt = fmt or cfg.format
    itol = resolve_tolerance(tol, cfg)
    qtol = cfg.quad_tol if cfg.quad_tol is not None else DEFAULT_QUAD_TOL
    if cfg.command == "lattice":
        return run_lattice(cfg, fmt)
    if cfg.command == "tables":
        return run_tables(cfg, fmt)
    if cfg.command == "verify":
        return run_verify(cfg, fmt, itol)
    if cfg.command in ("work", "holonomy"):
        return run_process(cfg, fmt, itol, qtol, cfg.command == "holonomy")
    if cfg.command == "solve-eos":
        return run_solve_eos(cfg, fmt, itol)
    raise UsageError(f"unknown command {cfg.command!r}")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gibbsform", description="Thermodynamic potentials, identities and processes.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="run description file (optional for lattice and tables)")
    ap.add_argument("--format", choices=FORMATS)
    ap.add_argument("--tol", type=float, help=f"identity tolerance (default {DEFAULT_TOL:g}, or ${TOL_ENV})")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.tol is not None and not (args.tol > 0 and math.isfinite(args.tol)):
            raise UsageError("--tol must be a positive number")
        if args.config is None:
            if args.command not in ("lattice", "tables"):
                raise UsageError(f"{args.command} needs --config")
            cfg = RunConfig(args.command)
        else:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise UsageError(f"cannot read {args.config}: {exc.strerror}") from None
            cfg = parse_config(text, default_command=args.command)
        out, status = run(cfg, args.format, args.tol)
    except ConfigError as exc:
        where = f"{args.config}:" if args.config else ""
        print(f"gibbsform: {where}{exc}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"gibbsform: {exc}", file=sys.stderr)
        return 2
    except (DomainError, QuadratureError, RootError) as exc:
        print(f"gibbsform: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
