"""Flat ``key = value`` run descriptions for the command-line driver.

One entry per line, ``#`` starts a comment.  Besides plain keys there are
clause lines::

    fix P=2 T=1 N=1          # pinned values
    solve V in [0.1, 10]     # unknown and bracket
    range T in [0.1, 10]     # sampling interval for verify grids
    point T=0 S=0            # one polyline waypoint (repeatable)
    base T=1 N=1             # values for coordinates a process leaves alone

Parsing validates every name against the phase space and the catalog, so a
:class:`RunConfig` that comes back is ready to run.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .expr import ExpressionError, compile_expression, compile_univariate
from .geometry import PhaseSpace, canonical_name, make_standard_model
from .lattice import IndexSet, associated_variables, resolve_potential
from .systems import (
    CATALOG_FUNDAMENTALS,
    EOS_NAMES,
    DefiningFunction,
    EosConstraint,
    catalog_fundamental,
)

COMMANDS = ("lattice", "tables", "verify", "work", "holonomy", "solve-eos")
FORMATS = ("text", "csv")
PROCESSES = ("polyline", "ts_square", "constant", "embedded")
NUMERIC_PARAMS = ("R", "a", "b", "c")
VIRIAL_PARAMS = ("B", "C")
PLAIN_KEYS = (
    ("command", "space", "flip", "eos")
    + NUMERIC_PARAMS
    + VIRIAL_PARAMS
    + ("potential", "J", "g", "grid", "process", "closed", "tol", "quad_tol", "format")
)
CLAUSES = ("fix", "solve", "range", "point", "base")
EOS_VARIABLES = ("P", "V", "T", "N")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column
        self.reason = message


@dataclass
class RunConfig:
    command: str
    space: str | tuple[tuple[str, str], ...] = "standard"
    flip: tuple[str, ...] = ()
    eos: str | None = None
    params: dict[str, float] = field(default_factory=dict)
    virial: dict[str, str] = field(default_factory=dict)
    J: str | None = None
    g: str | None = None
    grid: int = 5
    ranges: dict[str, tuple[float, float]] = field(default_factory=dict)
    fix: dict[str, float] = field(default_factory=dict)
    solve: tuple[str, float, float] | None = None
    process: str | None = None
    closed: bool = False
    points: tuple[dict[str, float], ...] = ()
    base: dict[str, float] = field(default_factory=dict)
    tol: float | None = None
    quad_tol: float | None = None
    format: str = "text"

    def phase_space(self) -> PhaseSpace:
        if self.space == "standard":
            return make_standard_model()
        flags = tuple(a in self.flip for a, _ in self.space)
        return PhaseSpace(self.space, flags)

    def index_set(self) -> IndexSet | None:
        if self.J is None:
            return None
        return _parse_index_set(self.J, self.phase_space().n)

    def defining_function(self) -> DefiningFunction | None:
        """The system to embed: an explicit ``g`` or a catalog fundamental relation."""
        if self.g is not None:
            space = self.phase_space()
            J = self.index_set()
            names = associated_variables(space, J)
            return DefiningFunction(J, compile_expression(self.g, names), label=self.g)
        if self.eos is not None:
            return catalog_fundamental(self.eos, **self.params, **self._virial_callables())
        return None

    def eos_constraint(self) -> EosConstraint | None:
        if self.eos is None:
            return None
        kw = {k: v for k, v in self.params.items() if k in ("R", "a", "b")}
        return EosConstraint(self.eos, **kw, **self._virial_callables())

    def _virial_callables(self) -> dict:
        return {k: compile_univariate(v, "T") for k, v in self.virial.items()}


# ---------------------------------------------------------------- parsing

_PAIR_RE = re.compile(r"([^\s=]+)\s*=\s*([^\s=]+)")
_INTERVAL_RE = re.compile(r"(\S+)\s+in\s*\[\s*([^,\]]+?)\s*,\s*([^,\]]+?)\s*\]\s*$")


@dataclass
class _Entry:
    key: str
    value: str
    line: int
    column: int  # column where the value starts


def _number(text: str, line: int, column: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"malformed number {text!r}", line, column) from None
    if not math.isfinite(v):
        raise ConfigError(f"number must be finite, got {text!r}", line, column)
    return v


def _assignments(e: _Entry) -> list[tuple[str, float, int]]:
    out = []
    pos = 0
    text = e.value
    for m in _PAIR_RE.finditer(text):
        gap = text[pos : m.start()]
        if gap.strip():
            raise ConfigError(f"expected name=value, found {gap.strip()!r}", e.line, e.column + pos)
        out.append((canonical_name(m.group(1)), _number(m.group(2), e.line, e.column + m.start(2)), e.column + m.start()))
        pos = m.end()
    if text[pos:].strip():
        raise ConfigError(f"expected name=value, found {text[pos:].strip()!r}", e.line, e.column + pos)
    if not out:
        raise ConfigError(f"{e.key} needs at least one name=value", e.line, e.column)
    return out


def _interval(e: _Entry) -> tuple[str, float, float]:
    m = _INTERVAL_RE.match(e.value)
    if not m:
        raise ConfigError(f"expected '{e.key} NAME in [lo, hi]'", e.line, e.column)
    lo = _number(m.group(2), e.line, e.column + m.start(2))
    hi = _number(m.group(3), e.line, e.column + m.start(3))
    if lo > hi:
        raise ConfigError(f"empty interval [{lo}, {hi}]", e.line, e.column + m.start(2))
    return canonical_name(m.group(1)), lo, hi


def _parse_index_set(text: str, n: int) -> IndexSet:
    body = text.strip()
    if body.startswith("{") and body.endswith("}"):
        body = body[1:-1]
    parts = [s.strip() for s in body.split(",") if s.strip()]
    try:
        J = IndexSet(int(s) for s in parts)
    except ValueError:
        raise ValueError(f"index set must list integers, got {text!r}") from None
    return J.check(n)


def _tokenize_lines(text: str) -> list[_Entry]:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        indent = len(line) - len(stripped)
        word = re.match(r"[A-Za-z_\-]+", stripped)
        if word and word.group(0) in CLAUSES and stripped[word.end() : word.end() + 1].isspace():
            key = word.group(0)
            rest = stripped[word.end() :]
            offset = indent + word.end() + (len(rest) - len(rest.lstrip()))
            entries.append(_Entry(key, rest.strip(), lineno, offset + 1))
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value' or a clause line", lineno, indent + 1)
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError("missing key before '='", lineno, indent + 1)
        if key not in PLAIN_KEYS:
            if key in CLAUSES:
                raise ConfigError(f"{key} is a clause: write '{key} NAME=...' without '='", lineno, indent + 1)
            raise ConfigError(f"unknown key {key!r}", lineno, indent + 1)
        vcol = indent + len(stripped) - len(value.lstrip()) + 1
        entries.append(_Entry(key, value.strip(), lineno, vcol))
    return entries


def parse_config(text: str, default_command: str | None = None) -> RunConfig:
    """Parse and validate a run description.

    ``default_command`` supplies the command when the text has none; if both
    are present they must agree.
    """
    entries = _tokenize_lines(text)
    single: dict[str, _Entry] = {}
    repeated: dict[str, list[_Entry]] = {k: [] for k in CLAUSES}
    for e in entries:
        if e.key in ("point", "range", "fix", "base"):
            repeated[e.key].append(e)
            continue
        if e.key in single:
            raise ConfigError(f"duplicate key {e.key!r} (first on line {single[e.key].line})", e.line, 1)
        single[e.key] = e
    if "potential" in single and "J" in single:
        raise ConfigError("give either 'potential' or 'J', not both", single["J"].line, 1)

    def get(key):
        return single.get(key)

    # command
    e = get("command")
    if e is not None:
        command = e.value
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}", e.line, e.column)
        if default_command is not None and default_command != command:
            raise ConfigError(f"config says command = {command} but {default_command} was requested", e.line, e.column)
    elif default_command is not None:
        if default_command not in COMMANDS:
            raise ConfigError(f"unknown command {default_command!r}; expected one of {', '.join(COMMANDS)}")
        command = default_command
    else:
        raise ConfigError("no command given")
    cfg = RunConfig(command)

    # phase space
    e = get("space")
    if e is not None and e.value != "standard":
        pairs = []
        for chunk in e.value.split(","):
            a, sep, b = chunk.partition(":")
            if not sep or not a.strip() or not b.strip():
                raise ConfigError(f"expected 'intensive:extensive' pairs, found {chunk.strip()!r}", e.line, e.column)
            pairs.append((canonical_name(a), canonical_name(b)))
        cfg.space = tuple(pairs)
    f = get("flip")
    if f is not None:
        if cfg.space == "standard":
            raise ConfigError("flip only applies to an explicit space", f.line, f.column)
        flips = tuple(canonical_name(s) for s in f.value.split(",") if s.strip())
        intensive = [a for a, _ in cfg.space]
        for name in flips:
            if name not in intensive:
                raise ConfigError(f"flip names an unknown intensive variable {name!r}", f.line, f.column)
        cfg.flip = tuple(a for a in intensive if a in flips)
    try:
        space = cfg.phase_space()
    except ValueError as exc:
        raise ConfigError(str(exc), e.line if e else None, e.column if e else None) from None

    def check_name(name: str, entry: _Entry, column: int):
        try:
            space.locate(name)
        except KeyError as exc:
            raise ConfigError(exc.args[0], entry.line, column) from None

    # system
    e = get("eos")
    if e is not None:
        if e.value not in EOS_NAMES:
            raise ConfigError(f"unknown equation of state {e.value!r}; choose from {', '.join(EOS_NAMES)}", e.line, e.column)
        cfg.eos = e.value
    for key in NUMERIC_PARAMS:
        e = get(key)
        if e is not None:
            cfg.params[key] = _number(e.value, e.line, e.column)
    for key in VIRIAL_PARAMS:
        e = get(key)
        if e is not None:
            try:
                compile_expression(e.value, ["T"])
            except ExpressionError as exc:
                raise ConfigError(f"{key}: {exc.reason}", e.line, e.column + exc.column - 1) from None
            cfg.virial[key] = e.value
    if (cfg.params or cfg.virial) and cfg.eos is None:
        first = min((single[k] for k in NUMERIC_PARAMS + VIRIAL_PARAMS if k in single), key=lambda x: x.line)
        raise ConfigError("equation-of-state parameters given without 'eos'", first.line, 1)
    if "R" in cfg.params and not cfg.params["R"] > 0:
        raise ConfigError("R must be positive", single["R"].line, single["R"].column)

    e = get("potential") or get("J")
    if e is not None:
        try:
            J = resolve_potential(space, e.value) if e.key == "potential" else _parse_index_set(e.value, space.n)
        except (KeyError, ValueError, IndexError) as exc:
            raise ConfigError(str(exc.args[0]), e.line, e.column) from None
        cfg.J = str(J)
    e = get("g")
    if e is not None:
        if cfg.J is None:
            raise ConfigError("g needs 'potential' or 'J' to fix its arguments", e.line, e.column)
        J = cfg.index_set()
        if not J.members:
            raise ConfigError("J must be nonempty to generate an embedding", e.line, e.column)
        try:
            compile_expression(e.value, associated_variables(space, J))
        except ExpressionError as exc:
            raise ConfigError(f"g: {exc.reason}", e.line, e.column + exc.column - 1) from None
        cfg.g = e.value
    elif cfg.J is not None:
        e = get("potential") or get("J")
        raise ConfigError("potential/J given without a defining function g", e.line, e.column)
    if cfg.g is not None and cfg.eos is not None:
        raise ConfigError("give either an explicit g or a catalog eos, not both", single["g"].line, 1)

    # sampling and pinned values
    e = get("grid")
    if e is not None:
        if not re.fullmatch(r"\d+", e.value) or int(e.value) < 1:
            raise ConfigError(f"grid must be a positive integer, got {e.value!r}", e.line, e.column)
        cfg.grid = int(e.value)
    for e in repeated["range"]:
        name, lo, hi = _interval(e)
        check_name(name, e, e.column)
        if name in cfg.ranges:
            raise ConfigError(f"duplicate range for {name}", e.line, e.column)
        cfg.ranges[name] = (lo, hi)
    for e in repeated["fix"]:
        for name, v, col in _assignments(e):
            check_name(name, e, col)
            if name in cfg.fix:
                raise ConfigError(f"{name} fixed twice", e.line, col)
            cfg.fix[name] = v
    e = get("solve")
    if e is not None:
        cfg.solve = _interval(e)
        check_name(cfg.solve[0], e, e.column)

    # process
    e = get("process")
    if e is not None:
        if e.value not in PROCESSES:
            raise ConfigError(f"unknown process {e.value!r}; choose from {', '.join(PROCESSES)}", e.line, e.column)
        cfg.process = e.value
    e = get("closed")
    if e is not None:
        if e.value.lower() not in ("true", "false", "yes", "no", "1", "0"):
            raise ConfigError(f"closed must be true or false, got {e.value!r}", e.line, e.column)
        cfg.closed = e.value.lower() in ("true", "yes", "1")
    points = []
    for e in repeated["point"]:
        pt = {}
        for name, v, col in _assignments(e):
            if cfg.process != "embedded":
                check_name(name, e, col)
            if name in pt:
                raise ConfigError(f"{name} given twice", e.line, col)
            pt[name] = v
        points.append(pt)
    cfg.points = tuple(points)
    for e in repeated["base"]:
        for name, v, col in _assignments(e):
            check_name(name, e, col)
            cfg.base[name] = v

    # tolerances and output
    for key in ("tol", "quad_tol"):
        e = get(key)
        if e is not None:
            v = _number(e.value, e.line, e.column)
            if not v > 0:
                raise ConfigError(f"{key} must be positive", e.line, e.column)
            setattr(cfg, key, v)
    e = get("format")
    if e is not None:
        if e.value not in FORMATS:
            raise ConfigError(f"format must be text or csv, got {e.value!r}", e.line, e.column)
        cfg.format = e.value

    _check_command(cfg, single, repeated)
    return cfg


def _check_command(cfg: RunConfig, single, repeated) -> None:
    cmd = cfg.command
    cmd_line = single["command"].line if "command" in single else None
    if cmd == "verify":
        if cfg.g is None and cfg.eos is None:
            raise ConfigError("verify needs a system: 'eos' or 'potential'/'J' with 'g'", cmd_line)
        if cfg.eos is not None and cfg.eos not in CATALOG_FUNDAMENTALS:
            raise ConfigError(f"{cfg.eos} has no closed-form fundamental relation to embed", single["eos"].line)
        _check_parameter_names(cfg, list(cfg.ranges) + list(cfg.fix), single, repeated)
    elif cmd == "solve-eos":
        if cfg.eos is None:
            raise ConfigError("solve-eos needs 'eos'", cmd_line)
        if cfg.solve is None:
            raise ConfigError("solve-eos needs a 'solve NAME in [lo, hi]' line", cmd_line)
        if cfg.space != "standard":
            raise ConfigError("solve-eos works on the standard model", single["space"].line)
        space = cfg.phase_space()
        wanted = {_eos_key(space, n) for n in list(cfg.fix) + [cfg.solve[0]]}
        unknown = _eos_key(space, cfg.solve[0])
        fixed = [_eos_key(space, n) for n in cfg.fix]
        line = single["solve"].line
        if None in wanted:
            raise ConfigError("solve-eos only involves P, V, T and N", line)
        if unknown in fixed or len(set(fixed)) != len(fixed) or wanted != set(EOS_VARIABLES):
            raise ConfigError("fix exactly the three of P, V, T, N that are not solved for", line)
    elif cmd in ("work", "holonomy"):
        if cfg.process is None:
            raise ConfigError(f"{cmd} needs a 'process'", cmd_line)
        if cfg.process in ("polyline", "embedded") and len(cfg.points) < 2:
            raise ConfigError(f"a {cfg.process} process needs at least two 'point' lines", single["process"].line)
        if cfg.process == "embedded":
            if cfg.g is None and cfg.eos is None:
                raise ConfigError("an embedded process needs a system", single["process"].line)
            _check_parameter_names(cfg, [n for pt in cfg.points for n in pt], single, repeated)


def _eos_key(space: PhaseSpace, name: str) -> str | None:
    kind, i, _ = space.locate(name)
    label = space.pair_labels[i][0 if kind == "x" else 1]
    return {"P̄": "P", "V": "V", "T": "T", "N": "N"}.get(label)


def _check_parameter_names(cfg: RunConfig, names, single, repeated) -> None:
    try:
        df = cfg.defining_function()
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc.args[0] if exc.args else exc)) from None
    space = cfg.phase_space()
    params = associated_variables(space, df.J)
    for name in names:
        kind, i, _ = space.locate(name)
        label = space.pair_labels[i][0 if kind == "x" else 1]
        if label not in params:
            line = None
            for key in ("range", "fix", "point"):
                for e in repeated[key]:
                    if re.search(rf"(^|\s){re.escape(name)}(\s|=|$)", e.value):
                        line = line or e.line
            raise ConfigError(f"{name} is not a parameter of the system ({', '.join(params)})", line)


# ---------------------------------------------------------------- rendering


def _fmt(v: float) -> str:
    return repr(float(v))


def _assign_list(values: dict[str, float]) -> str:
    return " ".join(f"{k}={_fmt(v)}" for k, v in values.items())


def render_config(cfg: RunConfig) -> str:
    """Text that :func:`parse_config` maps back to an equal config."""
    lines = [f"command = {cfg.command}"]
    if cfg.space == "standard":
        lines.append("space = standard")
    else:
        lines.append("space = " + ", ".join(f"{a}:{b}" for a, b in cfg.space))
        if cfg.flip:
            lines.append("flip = " + ", ".join(cfg.flip))
    if cfg.eos is not None:
        lines.append(f"eos = {cfg.eos}")
    for key in NUMERIC_PARAMS:
        if key in cfg.params:
            lines.append(f"{key} = {_fmt(cfg.params[key])}")
    for key in VIRIAL_PARAMS:
        if key in cfg.virial:
            lines.append(f"{key} = {cfg.virial[key]}")
    if cfg.J is not None:
        lines.append(f"J = {cfg.J}")
    if cfg.g is not None:
        lines.append(f"g = {cfg.g}")
    lines.append(f"grid = {cfg.grid}")
    for name, (lo, hi) in cfg.ranges.items():
        lines.append(f"range {name} in [{_fmt(lo)}, {_fmt(hi)}]")
    if cfg.fix:
        lines.append("fix " + _assign_list(cfg.fix))
    if cfg.solve is not None:
        name, lo, hi = cfg.solve
        lines.append(f"solve {name} in [{_fmt(lo)}, {_fmt(hi)}]")
    if cfg.process is not None:
        lines.append(f"process = {cfg.process}")
    lines.append(f"closed = {'true' if cfg.closed else 'false'}")
    for pt in cfg.points:
        lines.append("point " + _assign_list(pt))
    if cfg.base:
        lines.append("base " + _assign_list(cfg.base))
    if cfg.tol is not None:
        lines.append(f"tol = {_fmt(cfg.tol)}")
    if cfg.quad_tol is not None:
        lines.append(f"quad_tol = {_fmt(cfg.quad_tol)}")
    lines.append(f"format = {cfg.format}")
    return "\n".join(lines) + "\n"
