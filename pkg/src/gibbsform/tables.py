"""Plain-text and CSV renderings of the identity tables for any phase space."""

from __future__ import annotations

import csv
import io

from .geometry import PhaseSpace
from .lattice import (
    MINUS,
    all_subsets,
    associated_variables,
    differential_expansion,
    enumerate_lattice,
    format_terms,
    gibbs_relations,
    maxwell_identities,
    potential_name,
    product_symbol,
)

TITLES = (
    "Potentials",
    "Potential differences",
    "Associated variables",
    "Gibbs' relations",
    "Gibbs differential form",
    "Maxwell's identities",
)

Row = tuple[str, str, str]  # (key, left side, right side)


def potential_rows(space: PhaseSpace) -> list[Row]:
    lat = enumerate_lattice(space)
    return [(node.name, node.name, node.formula) for node in lat.nodes]


def difference_rows(space: PhaseSpace) -> list[Row]:
    """One row per lattice edge: the difference is a single conjugate product."""
    rows = []
    for hi, lo in enumerate_lattice(space).covers():
        (k,) = hi.J.members - lo.J.members
        a, b = space.pair_labels[k - 1]
        rows.append((f"{hi.name}/{lo.name}", f"{hi.name} {MINUS} {lo.name}", product_symbol(b, a)))
    return rows


def associated_rows(space: PhaseSpace) -> list[Row]:
    rows = []
    for J in all_subsets(space.n):
        name = potential_name(space, J)
        shown = ", ".join(space.display_name(v) for v in associated_variables(space, J))
        rows.append((name, name, f"({shown})"))
    return rows


def _derivative(space: PhaseSpace, sign: int, num: str, den: str) -> str:
    """``sign·∂num/∂den`` with a flipped coordinate shown under its display name."""
    shown = space.display_name(den)
    if shown != den:
        sign = -sign
    return f"{'' if sign > 0 else MINUS}∂{num}/∂{shown}"


def relation_rows(space: PhaseSpace) -> list[Row]:
    rows = []
    for variable, rels in gibbs_relations(space):
        shown = space.display_name(variable)
        left = shown if shown == variable else f"{MINUS}{shown}"
        parts = []
        for r in rels:
            held = ",".join(space.display_name(h) for h in r.held)
            parts.append(f"{_derivative(space, r.sign, r.potential, r.wrt)}|_{{{held}}}")
        rows.append((variable, left, " = ".join(parts)))
    return rows


def differential_rows(space: PhaseSpace) -> list[Row]:
    rows = []
    for J in all_subsets(space.n):
        name = potential_name(space, J)
        left = "0" if not J.members else f"d{name}"
        rows.append((name, left, format_terms(differential_expansion(space, J))))
    return rows


def maxwell_rows(space: PhaseSpace) -> list[Row]:
    rows = []
    for m in maxwell_identities(space):
        chart = [space.display_name(m.lhs_den), space.display_name(m.rhs_den)]
        chart += [f"({space.display_name(a)} or {b})" for a, b in m.others]
        left = f"{'' if m.sign > 0 else MINUS}∂{m.lhs_num}/∂{m.lhs_den}"
        right = f"∂{m.rhs_num}/∂{m.rhs_den} |_{{{','.join(chart)}}}"
        rows.append((f"{m.lhs_den},{m.rhs_den}", left, right))
    return rows


BUILDERS = (potential_rows, difference_rows, associated_rows, relation_rows, differential_rows, maxwell_rows)
ARROW = "⟶"


def table_rows(space: PhaseSpace) -> list[list[Row]]:
    return [build(space) for build in BUILDERS]


def emit_tables(space: PhaseSpace, format: str = "text") -> str:
    tables = table_rows(space)
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["table", "title", "key", "lhs", "rhs"])
        for k, (title, rows) in enumerate(zip(TITLES, tables), start=1):
            for key, lhs, rhs in rows:
                w.writerow([k, title, key, lhs, rhs])
        return buf.getvalue()
    if format != "text":
        raise ValueError(f"unknown format {format!r}")
    out = []
    for k, (title, rows) in enumerate(zip(TITLES, tables), start=1):
        out.append(f"TABLE {k}. {title}:")
        sep = f" {ARROW} " if k == 3 else " = "
        out.extend(f"{lhs}{sep}{rhs}" for _, lhs, rhs in rows)
        out.append("")
    return "\n".join(out)
