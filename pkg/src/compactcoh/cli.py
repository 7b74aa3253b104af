"""Command-line front end: problem files, subcommands and table output.

Problem files are JSON::

    {
      "root_system": {"series": "A", "rank": 2, "lattice": "adjoint"},
      "mode": "regular",
      "fan": [[[1, 0], [1, 1]], [[1, 1], [0, 1]]],
      "h": [[-5, 4], [4, -5]],
      "query": {"mu": [0, 0], "i": 3}
    }

``mode`` is ``regular`` (a subdivision of the dominant chamber), ``wonderful``
(no ``fan``; ``h`` is a single row, the weight lambda) or ``toric`` (no
``root_system``; give ``rank`` and a complete fan).  Cone generators are
integer rows in fundamental-coweight coordinates and are taken verbatim; weight
rows are in fundamental-weight coordinates and accept ``"p/q"`` strings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import engine
from .fan import (
    FanError,
    PLFunctionError,
    build_chamber_fan,
    build_complete_fan,
    build_pl_function,
    wonderful_fan,
)
from .linalg import as_rat
from .rootsys import RootDatum, build_root_datum

MODES = ("regular", "wonderful", "toric")
EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class ProblemError(ValueError):
    """A problem file that cannot be parsed or validated."""


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Problem:
    rd: RootDatum | None
    fan: Any
    h: Any
    mode: str
    query: dict

    def __iter__(self):
        return iter((self.rd, self.fan, self.h, self.mode))


# -- problem files -----------------------------------------------------------


def _fail(path: str, message: str) -> ProblemError:
    return ProblemError(f"{path}: {message}")


def _require(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise _fail(path, f"missing field {key!r}")
    return obj[key]


def _int(x: Any, path: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise _fail(path, f"expected an integer, got {json.dumps(x)}")
    return x


def _rational(x: Any, path: str) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise _fail(path, f"expected an integer or a 'p/q' string, got {json.dumps(x)}")
    try:
        return as_rat(x)
    except (ValueError, ZeroDivisionError):
        raise _fail(path, f"cannot read {x!r} as a rational number") from None


def _list(x: Any, path: str, length: int | None = None) -> list:
    if not isinstance(x, list):
        raise _fail(path, f"expected a list, got {json.dumps(x)}")
    if length is not None and len(x) != length:
        raise _fail(path, f"expected {length} entries, got {len(x)}")
    return x


def _weight_row(x: Any, path: str, rank: int) -> tuple[Fraction, ...]:
    return tuple(_rational(v, f"{path}[{k}]") for k, v in enumerate(_list(x, path, rank)))


def _cones(x: Any, path: str, rank: int) -> list[list[tuple[int, ...]]]:
    cones = []
    for c, cone in enumerate(_list(x, path)):
        gens = []
        for g, gen in enumerate(_list(cone, f"{path}[{c}]")):
            row = _list(gen, f"{path}[{c}][{g}]", rank)
            gens.append(tuple(_int(v, f"{path}[{c}][{g}][{k}]") for k, v in enumerate(row)))
        cones.append(gens)
    if not cones:
        raise _fail(path, "a fan needs at least one maximal cone")
    return cones


def _root_datum(spec: Any, path: str) -> RootDatum:
    if not isinstance(spec, dict):
        raise _fail(path, "expected an object with 'series' and 'rank'")
    series = _require(spec, "series", path)
    if not isinstance(series, str):
        raise _fail(f"{path}.series", "expected a string such as 'A' or 'A1xA1'")
    rank = spec.get("rank")
    if rank is not None:
        rank = _int(rank, f"{path}.rank")
    lattice = spec.get("lattice", "adjoint")
    try:
        if isinstance(lattice, list):
            n = rank if rank is not None else None
            rows = [
                [_rational(v, f"{path}.lattice[{r}][{k}]") for k, v in enumerate(_list(row, f"{path}.lattice[{r}]", n))]
                for r, row in enumerate(lattice)
            ]
            return build_root_datum(series, rank, rows)
        if lattice not in ("adjoint", "simply_connected"):
            raise _fail(f"{path}.lattice", "expected 'adjoint', 'simply_connected' or generator rows")
        return build_root_datum(series, rank, lattice)
    except ProblemError:
        raise
    except ValueError as exc:
        raise _fail(path, str(exc)) from None


def load_problem(data: Any) -> Problem:
    """Validate an already-decoded problem object."""
    if not isinstance(data, dict):
        raise _fail("$", "the problem must be a JSON object")
    mode = data.get("mode", "regular")
    if mode not in MODES:
        raise _fail("mode", f"expected one of {', '.join(MODES)}, got {json.dumps(mode)}")
    query = data.get("query", {})
    if not isinstance(query, dict):
        raise _fail("query", "expected an object")
    try:
        if mode == "toric":
            rank = _int(_require(data, "rank", "$"), "rank")
            if rank < 1:
                raise _fail("rank", "must be positive")
            cones = _cones(_require(data, "fan", "$"), "fan", rank)
            fan = build_complete_fan(rank, cones, canonicalize=False)
            rows = _list(_require(data, "h", "$"), "h", len(cones))
            h = build_pl_function(fan, [_weight_row(r, f"h[{k}]", rank) for k, r in enumerate(rows)])
            return Problem(None, fan, h, mode, query)
        rd = _root_datum(_require(data, "root_system", "$"), "root_system")
        if mode == "wonderful":
            if "fan" in data:
                raise _fail("fan", "wonderful problems use the trivial fan; omit this field")
            fan = wonderful_fan(rd)
            rows = _list(_require(data, "h", "$"), "h", 1)
        else:
            cones = _cones(_require(data, "fan", "$"), "fan", rd.rank)
            fan = build_chamber_fan(rd, cones, canonicalize=False)
            rows = _list(_require(data, "h", "$"), "h", len(cones))
        h = build_pl_function(fan, [_weight_row(r, f"h[{k}]", rd.rank) for k, r in enumerate(rows)])
        return Problem(rd, fan, h, mode, query)
    except FanError as exc:
        raise _fail("fan", str(exc)) from None
    except PLFunctionError as exc:
        raise _fail("h", str(exc)) from None


def parse_problem(path: str | Path) -> Problem:
    """Read and validate a problem file; errors carry a line number or a field path."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return load_problem(data)
    except ProblemError as exc:
        raise ProblemError(f"{path}: {exc}") from None


# -- output ------------------------------------------------------------------


@dataclass
class Table:
    header: list[str]
    rows: list[list[Any]]
    notes: list[str]
    meta: dict


def _fmt(x: Any) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, tuple):
        return ",".join(_fmt(v) for v in x)
    return str(x)


def _json_value(x: Any) -> Any:
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    if isinstance(x, (tuple, list)):
        return [_json_value(v) for v in x]
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    return x


def render(table: Table, fmt: str) -> str:
    if fmt == "json":
        body = {
            "meta": _json_value(table.meta),
            "columns": table.header,
            "rows": [dict(zip(table.header, (_json_value(v) for v in row))) for row in table.rows],
        }
        if table.notes:
            body["notes"] = table.notes
        return json.dumps(body, indent=2) + "\n"
    cells = [[_fmt(v) for v in row] for row in table.rows]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.header)
        w.writerows(cells)
        return buf.getvalue()
    widths = [max([len(h)] + [len(r[k]) for r in cells]) for k, h in enumerate(table.header)]
    lines = [f"{k}: {_fmt(v)}" for k, v in table.meta.items()]
    lines.append("  ".join(h.ljust(w) for h, w in zip(table.header, widths)).rstrip())
    lines.extend("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells)
    lines.extend(f"note: {n}" for n in table.notes)
    return "\n".join(lines) + "\n"


def _mu_columns(rank: int) -> list[str]:
    return [f"mu{k + 1}" for k in range(rank)]


def _breakdown_table(reports: Sequence[engine.MultiplicityReport], meta: dict) -> Table:
    rank = len(reports[0].mu)
    header = ["i", *_mu_columns(rank), "term", "degree", "value"]
    rows = []
    for rep in reports:
        for t in rep.breakdown:
            rows.append([rep.i, *rep.mu, t.label, t.degree, t.value])
        rows.append([rep.i, *rep.mu, "total", "", rep.value])
    return Table(header, rows, [], meta)


def _summary_table(reports: Sequence[engine.MultiplicityReport], meta: dict) -> Table:
    rank = len(reports[0].mu)
    header = ["i", *_mu_columns(rank), "m"]
    return Table(header, [[r.i, *r.mu, r.value] for r in reports], [], meta)


# -- argument handling -------------------------------------------------------


def _coords(text: str, what: str, rank: int | None = None) -> tuple[Fraction, ...]:
    try:
        out = tuple(as_rat(x) for x in text.split(",") if x.strip() != "")
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{what}: cannot parse {text!r} as comma-separated coordinates") from None
    if rank is not None and len(out) != rank:
        raise UsageError(f"{what}: expected {rank} coordinates, got {len(out)}")
    return out


_TARGET = re.compile(r"^\s*(\d+)\s*(==|=|>=|<=|!=|>|<)\s*(-?\d+)\s*$")
_OPS = {
    "=": lambda a, b: a == b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
}


def parse_target(text: str) -> list[tuple[int, str, int]]:
    """``"10>0,11>0"`` -> ``[(10, ">", 0), (11, ">", 0)]``; clauses are and-ed."""
    clauses = []
    for part in text.split(","):
        m = _TARGET.match(part)
        if not m:
            raise UsageError(f"--target: cannot parse clause {part!r}; expected DEGREE OP VALUE such as 5=3")
        clauses.append((int(m.group(1)), m.group(2), int(m.group(3))))
    return clauses


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


# flags whose values may start with '-' (negative coordinates)
_VALUE_FLAGS = {"--mu", "--lambda", "--center", "--target"}


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="compactcoh", description="Multiplicities in the cohomology of line bundles on regular compactifications.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_format(sp):
        sp.add_argument("--format", choices=("text", "csv", "json"), default="text")

    def add_workers(sp):
        sp.add_argument("--workers", type=int, default=None, help="worker processes (default: $COMPACTCOH_WORKERS or 1)")

    def add_type(sp, required: bool):
        sp.add_argument("--type", dest="series", required=required, help="Dynkin type, e.g. A, B, G or A1xA1")
        sp.add_argument("--rank", type=int)
        sp.add_argument("--lattice", choices=("adjoint", "simply_connected"), default="adjoint")

    sp = sub.add_parser("mult", help="m^i_h(mu) by the general formula, with its breakdown")
    sp.add_argument("problem")
    sp.add_argument("--mu")
    sp.add_argument("--i", type=int)
    sp.add_argument("--all-degrees", action="store_true", help="report every degree, ignoring a default i")
    add_format(sp)

    sp = sub.add_parser("table", help="decomposition of H^i over a box of weights")
    sp.add_argument("problem")
    sp.add_argument("--i-min", type=int)
    sp.add_argument("--i-max", type=int)
    sp.add_argument("--mu-box", type=int)
    add_format(sp)
    add_workers(sp)

    sp = sub.add_parser("wonderful", help="closed-form count on the wonderful compactification")
    sp.add_argument("problem", nargs="?")
    add_type(sp, required=False)
    sp.add_argument("--lambda", dest="lam")
    sp.add_argument("--mu")
    sp.add_argument("--i", type=int)
    sp.add_argument("--all-degrees", action="store_true", help="report every degree, ignoring a default i")
    add_format(sp)

    sp = sub.add_parser("toric", help="weight multiplicities for a complete toric fan")
    sp.add_argument("problem")
    sp.add_argument("--mu")
    sp.add_argument("--i", type=int)
    sp.add_argument("--all-degrees", action="store_true", help="report every degree, ignoring a default i")
    add_format(sp)

    sp = sub.add_parser("check-oracle", help="compare the general formula with the closed form")
    add_type(sp, required=True)
    sp.add_argument("--box", type=int, required=True, help="radius for lambda")
    sp.add_argument("--mu-box", type=int, help="radius for mu (default: --box)")
    sp.add_argument("--i-max", type=int)
    add_format(sp)
    add_workers(sp)

    sp = sub.add_parser("search", help="weights lambda whose closed-form multiplicities meet a target")
    add_type(sp, required=True)
    sp.add_argument("--mu")
    sp.add_argument("--target", required=True, help="clauses DEGREE OP VALUE joined by commas, e.g. 10>0,11>0")
    sp.add_argument("--radius", type=int, required=True)
    sp.add_argument("--center")
    sp.add_argument("--limit", type=int, default=None, help="print at most this many weights")
    add_format(sp)

    sp = sub.add_parser("validate", help="parse and validate a problem file")
    sp.add_argument("problem")
    add_format(sp)
    return p


def _degree(problem: Problem, args) -> int | None:
    if args.all_degrees:
        if args.i is not None:
            raise UsageError("--i and --all-degrees are mutually exclusive")
        return None
    i = _query(problem, args, "i")
    return None if i is None else int(i)


def _query(problem: Problem, args, key: str, default=None):
    val = getattr(args, key, None)
    if val is None:
        val = problem.query.get(key, default)
    return val


def _mu_arg(value, rank: int) -> tuple[Fraction, ...]:
    if value is None:
        raise UsageError("--mu is required (no default in the problem file)")
    if isinstance(value, list):
        return tuple(as_rat(x) for x in value)
    return _coords(str(value), "--mu", rank)


def _rd_from_args(args) -> RootDatum:
    if not args.series:
        raise UsageError("--type is required")
    try:
        return build_root_datum(args.series, args.rank, args.lattice)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cmd_mult(args) -> Table:
    problem = parse_problem(args.problem)
    if problem.mode == "toric":
        raise UsageError("mult needs a chamber problem; use the toric subcommand for complete fans")
    rd = problem.rd
    mu = _mu_arg(_query(problem, args, "mu"), rd.rank)
    i = _degree(problem, args)
    meta = {"problem": Path(args.problem).name, "group": rd.name, "mu": mu}
    if i is None:
        reports = engine.multiplicities(rd, problem.fan, problem.h, mu)
    else:
        reports = [engine.multiplicity(rd, problem.fan, problem.h, mu, int(i))]
        meta["m"] = reports[0].value
    return _breakdown_table(reports, meta)


def _cmd_table(args) -> Table:
    problem = parse_problem(args.problem)
    fan, h = problem.fan, problem.h
    top = problem.rd.dim_group if problem.rd else fan.rank
    i_min = int(_query(problem, args, "i_min", 0))
    i_max = int(_query(problem, args, "i_max", top))
    radius = _query(problem, args, "mu_box")
    if radius is None:
        raise UsageError("--mu-box is required (no default in the problem file)")
    if i_min > i_max:
        raise UsageError("--i-min exceeds --i-max")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        table = engine.decomposition_table(problem.rd, fan, h, range(i_min, i_max + 1), int(radius), args.workers)
    header = ["i", *_mu_columns(fan.rank), "m", "dim_end", "contribution"]
    rows = [[r.i, *r.mu, r.value, r.dim_endo, r.value * r.dim_endo] for r in table.rows]
    # one summary row per degree: the total dimension found inside the box
    rows += [[i, *([""] * fan.rank), "total", "", total] for i, total in table.totals.items()]
    meta = {"problem": Path(args.problem).name, "mu_box": int(radius)}
    return Table(header, rows, [table.warning], meta)


def _cmd_wonderful(args) -> Table:
    if args.problem:
        problem = parse_problem(args.problem)
        if problem.mode != "wonderful":
            raise UsageError("the problem file is not in wonderful mode")
        rd = problem.rd
        lam = args.lam and _coords(args.lam, "--lambda", rd.rank) or problem.h.values[0]
    else:
        rd = _rd_from_args(args)
        if args.lam is None:
            raise UsageError("--lambda is required")
        lam = _coords(args.lam, "--lambda", rd.rank)
        problem = Problem(rd, None, None, "wonderful", {})
    mu = _mu_arg(_query(problem, args, "mu"), rd.rank)
    i = _degree(problem, args)
    meta = {"group": rd.name, "lambda": lam, "mu": mu}
    if i is None:
        reports = [engine.wonderful_multiplicity(rd, lam, mu, d) for d in range(rd.dim_group + 1)]
        return _summary_table(reports, meta)
    rep = engine.wonderful_multiplicity(rd, lam, mu, int(i))
    meta["m"] = rep.value
    return _breakdown_table([rep], meta)


def _cmd_toric(args) -> Table:
    problem = parse_problem(args.problem)
    if problem.mode != "toric":
        raise UsageError("the problem file is not in toric mode")
    fan, h = problem.fan, problem.h
    mu = _mu_arg(_query(problem, args, "mu"), fan.rank)
    i = _degree(problem, args)
    degrees = range(fan.rank + 1) if i is None else [i]
    reports = [engine.toric_multiplicity(fan, h, mu, d) for d in degrees]
    return _summary_table(reports, {"problem": Path(args.problem).name, "mu": mu})


def _cmd_check_oracle(args) -> Table:
    rd = _rd_from_args(args)
    i_max = rd.dim_group if args.i_max is None else args.i_max
    mu_box = args.box if args.mu_box is None else args.mu_box
    mismatches = engine.check_wonderful_oracle(rd, args.box, mu_box, range(i_max + 1), args.workers)
    header = ["lambda", "mu", "i", "general", "closed_form"]
    rows = [[m.lam, m.mu, m.i, m.general, m.closed_form] for m in mismatches]
    meta = {"group": rd.name, "box": args.box, "mu_box": mu_box, "i_max": i_max, "result": f"{len(mismatches)} mismatches"}
    return Table(header, rows, [], meta)


def _cmd_search(args) -> Table:
    rd = _rd_from_args(args)
    mu = _coords(args.mu, "--mu", rd.rank) if args.mu else rd.zero
    center = _coords(args.center, "--center", rd.rank) if args.center else None
    clauses = parse_target(args.target)
    degrees = sorted({d for d, _, _ in clauses})

    def predicate(counts):
        ok = True
        for d, op, v in clauses:
            ok = ok & _OPS[op](counts[d], v)
        return ok

    found = engine.search_wonderful(rd, mu, degrees, predicate, args.radius, center)
    shown = found if args.limit is None else found[: args.limit]
    header = ["lambda", *[f"m{d}" for d in degrees]]
    rows = []
    for lam in shown:
        counts = engine.wonderful_multiplicities(rd, lam, mu)
        rows.append([lam, *[counts.get(d, 0) for d in degrees]])
    meta = {"group": rd.name, "mu": mu, "target": args.target, "radius": args.radius, "found": len(found)}
    return Table(header, rows, [], meta)


def _cmd_validate(args) -> Table:
    problem = parse_problem(args.problem)
    fan = problem.fan
    meta = {
        "problem": Path(args.problem).name,
        "mode": problem.mode,
        "group": problem.rd.name if problem.rd else f"torus of rank {fan.rank}",
        "status": "ok",
    }
    header = ["cone", "generators", "h"]
    rows = [[k, " ".join(f"({_fmt(v)})" for v in cone), problem.h.values[k]] for k, cone in enumerate(fan.maximal_cones)]
    return Table(header, rows, [], meta)


COMMANDS = {
    "mult": _cmd_mult,
    "table": _cmd_table,
    "wonderful": _cmd_wonderful,
    "toric": _cmd_toric,
    "check-oracle": _cmd_check_oracle,
    "search": _cmd_search,
    "validate": _cmd_validate,
}


def run(argv: Sequence[str], stdout=None, stderr=None) -> int:
    """Run one command; returns the exit code (0 ok, 1 invalid input, 2 usage)."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(_join_negative_values(argv))
        table = COMMANDS[args.command](args)
        text = render(table, args.format)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except ProblemError as exc:
        print(f"invalid problem: {exc}", file=stderr)
        return EXIT_INVALID
    except (engine.EngineError, FanError, PLFunctionError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run(sys.argv[1:]))
