"""Command-line interface: ``bv-toolkit <command> INPUT [options]``.

INPUT is a catalog name (parameters via ``--param key=value``) or the path
of a JSON function spec.  Reports are JSON documents tagged with the schema
id, the toolkit version and the full configuration; CSV artifacts carry
fixed headers.  Exit status: 0 success, 2 when ``--require-bv`` is given and
the input is not of bounded variation, 1 on input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import SCHEMA, __version__
from .decompose import ACVerdict, ac_report, detect_jumps, three_part_decompose
from .errors import BVError, ConfigError, NotBV
from .essential import (CorruptedGrid, essential_variation_estimate, outlier_mask, phi_search,
                        restricted_variation)
from .funcrep import catalog_get, load_spec_file, to_grid
from .funcrep.base import FunctionRep, GridFunction, PiecewiseMonotone
from .indicatrix import banach_integral_sequence, indicatrix_table, y_grid
from .measure import stieltjes
from .mollify import variation_via_means
from .sequences import FamilySpec, helly_select, tail_liminf
from .variation import (EXCEEDED, pos_neg_variation, total_variation_exact,
                        total_variation_refine)

COMMANDS = ("analyze", "indicatrix", "decompose", "mollify", "helly", "essential", "stieltjes")

EXIT_OK, EXIT_INPUT, EXIT_NOT_BV = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1), keeping 2 for NotBV."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


# -- serialization ------------------------------------------------------------------

def _clean(obj: Any) -> Any:
    """JSON-safe copy: infinities become strings, NaN becomes null, arrays lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def _dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def write_atomic(path: Path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- inputs -----------------------------------------------------------------------------

def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_params(items: Optional[list[str]]) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


def load_input(source: str, params: dict) -> FunctionRep:
    """A spec file when ``source`` names an existing file, else a catalog entry."""
    if Path(source).is_file():
        if params:
            raise ConfigError("--param applies to catalog names, not spec files")
        return load_spec_file(source)
    return catalog_get(source, **params)


def parse_schedule(text: Optional[str]) -> Optional[list[float]]:
    if text is None:
        return None
    try:
        hs = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"--h-schedule: {exc}") from exc
    if not hs or any(not h > 0 for h in hs):
        raise ConfigError("--h-schedule needs positive comma-separated values")
    return hs


def _grid_rows(rep: FunctionRep, n: int):
    x = rep.interval.nodes(int(n))
    return list(zip(x.tolist(), np.asarray(rep(x), dtype=float).tolist()))


# -- commands -----------------------------------------------------------------------------
# Each returns (result dict, {artifact file name: (header, rows)}, primary csv name, exit code).

def cmd_analyze(rep: FunctionRep, args) -> tuple:
    depth = args.depth or 24
    bound = math.inf if args.bound is None else args.bound
    report = total_variation_refine(rep, max_depth=depth, bound=bound)
    result: dict[str, Any] = {"function": rep.name, "interval": [rep.a, rep.b],
                              "refinement": report.to_dict()}
    not_bv = report.verdict == EXCEEDED
    if isinstance(rep, PiecewiseMonotone):
        T = total_variation_exact(rep)
        result["total_variation"] = T
        ac = ac_report(rep, tol=args.tol or 1e-6)
        result.update(ac.to_dict())
        not_bv = ac.verdict == ACVerdict.NOT_BV
        if not not_bv:
            tp, tn = pos_neg_variation(rep)
            result["positive_variation"], result["negative_variation"] = tp, tn
            result["jumps"] = detect_jumps(rep).to_dict()
    else:
        result["total_variation"] = report.value if report.converged else None
        result["classification"] = (ACVerdict.NOT_BV.value if not_bv else "Undetermined")
    grid = args.grid or 256
    files = {"grid.csv": (["x", "f"], _grid_rows(rep, grid))}
    code = EXIT_NOT_BV if (not_bv and args.require_bv) else EXIT_OK
    return result, files, "grid.csv", code


def cmd_indicatrix(rep: FunctionRep, args) -> tuple:
    depth = args.depth or 12
    cells = args.grid or 1024
    ys = y_grid(rep, cells=cells)
    rows = indicatrix_table(rep, depth, ys)
    seq = banach_integral_sequence(rep, range(1, depth + 1))
    result = {"function": rep.name, "depth": depth,
              "integrals": [{"n": n, "integral": v} for n, v in seq],
              "final_integral": seq[-1][1]}
    if isinstance(rep, PiecewiseMonotone):
        result["total_variation"] = total_variation_exact(rep)
    files = {"indicatrix.csv": (["y", "N", "cN", "chi_n"], rows),
             "integrals.csv": (["n", "integral"], seq)}
    return result, files, "indicatrix.csv", EXIT_OK


def cmd_decompose(rep: FunctionRep, args) -> tuple:
    dec = three_part_decompose(rep)
    grid = args.grid or 256
    ac = ac_report(rep, tol=args.tol or 1e-6)
    files = {"F.csv": (["x", "f"], _grid_rows(dec.F, grid)),
             "f_cs.csv": (["x", "f"], _grid_rows(dec.f_cs, grid)),
             "s_f.csv": (["x", "f"], _grid_rows(dec.s_f, grid))}
    result = {"function": rep.name, "F": "F.csv", "f_cs": "f_cs.csv",
              "s_f": detect_jumps(rep).to_dict(), "s_f_grid": "s_f.csv",
              "classification": ac.verdict.value,
              "total_variation": ac.total_variation,
              "integral_abs_derivative": ac.integral_abs_derivative}
    return result, files, "F.csv", EXIT_OK


def cmd_mollify(rep: FunctionRep, args) -> tuple:
    sweep = variation_via_means(rep, parse_schedule(args.h_schedule), delta=args.delta)
    result = {"function": rep.name, **sweep.to_dict()}
    files = {"sweep.csv": (["h", "variation"], sweep.rows)}
    return result, files, "sweep.csv", EXIT_OK


def cmd_helly(name: str, args) -> tuple:
    params = parse_params(args.param)
    count = args.count
    grid = args.grid or 33

    def gen(n):
        return catalog_get(name, n=n, **params)

    probe = FamilySpec(gen, name=name)
    if args.bound is None:
        K = max(probe.size_of(probe.member(n)) for n in range(1, count + 1))
    else:
        K = float(args.bound)
    family = FamilySpec(gen, K=K, name=name)
    sel = helly_select(family, count, grid, depth=args.depth or 16)
    liminf, divergent = tail_liminf(sel.member_variations)
    result = {"family": name, "count": count, "grid": grid, **sel.to_dict(),
              "liminf_estimate": liminf, "divergent": divergent,
              "lsc_holds": sel.limit_variation <= liminf + 1e-9}
    rows = list(zip(sel.limit.nodes.tolist(), sel.limit.samples.tolist(),
                    sel.extrapolated.samples.tolist()))
    return result, {"limit.csv": (["x", "f", "extrapolated"], rows)}, "limit.csv", EXIT_OK


def _essential_input(source: str, args) -> CorruptedGrid:
    path = Path(source)
    if path.is_file() and path.suffix == ".json":
        try:
            obj = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read {source}: {exc}") from exc
        if isinstance(obj, dict) and "samples" in obj:
            return CorruptedGrid.from_dict(obj)
    rep = load_input(source, parse_params(args.param))
    return CorruptedGrid(to_grid(rep, args.grid or 2048), ())


def cmd_essential(source: str, args) -> tuple:
    cg = _essential_input(source, args)
    g: GridFunction = cg.base
    max_size = args.max_size if args.max_size is not None else max(len(cg.corrupt), 3)
    phi = phi_search(g, max_size)
    bad = outlier_mask(g)
    plain = float(np.sum(np.abs(np.diff(g.samples))))
    result = {"n": int(g.samples.size), "plain_variation": plain,
              "corrupt": list(cg.corrupt), "restricted_variation": restricted_variation(cg),
              "phi": phi.to_dict(), "estimate": essential_variation_estimate(g),
              "outliers": np.flatnonzero(bad).tolist()}
    rows = list(zip(g.nodes.tolist(), g.samples.tolist()))
    return result, {"grid.csv": (["x", "f"], rows)}, "grid.csv", EXIT_OK


def cmd_stieltjes(args) -> tuple:
    f = load_input(args.integrand, parse_params(args.param))
    g = load_input(args.integrator, parse_params(args.g_param))
    depth = args.depth or 16
    value = stieltjes(f, g, depth)
    result = {"integrand": f.name, "integrator": g.name, "depth": depth, "value": value}
    return result, {}, None, EXIT_OK


# -- driver ----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--param", action="append", metavar="KEY=VALUE",
                        help="catalog parameter (repeatable)")
    common.add_argument("--depth", type=int, help="refinement / dyadic depth")
    common.add_argument("--tol", type=float, help="classification tolerance (relative)")
    common.add_argument("--bound", type=float, help="variation bound (analyze) or K (helly)")
    common.add_argument("--h-schedule", dest="h_schedule",
                        help="comma-separated step sizes for mollify")
    common.add_argument("--grid", type=int, help="grid size for exported samples")
    common.add_argument("--out", help="output directory for the report and CSV files")
    common.add_argument("--require-bv", action="store_true",
                        help="exit 2 when the input is not of bounded variation")
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="what to print on stdout")

    parser = _Parser(prog="bv-toolkit", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"bv-toolkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (("analyze", "total variation and AC classification"),
                        ("indicatrix", "Banach indicatrix table and level integrals"),
                        ("decompose", "absolutely continuous, singular and jump parts"),
                        ("mollify", "variation of integral means over an h-sweep"),
                        ("helly", "Helly selection for a catalog family"),
                        ("essential", "essential variation of grid data")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("input", help="catalog name or JSON spec path")
        if name == "mollify":
            p.add_argument("--delta", type=float, help="right margin of the mean's domain")
        if name == "helly":
            p.add_argument("--count", type=int, default=64, help="family members to use")
        if name == "essential":
            p.add_argument("--max-size", dest="max_size", type=int,
                           help="largest exceptional set searched")
    p = sub.add_parser("stieltjes", parents=[common], help="Riemann-Stieltjes integral")
    p.add_argument("integrand", help="continuous f: catalog name or spec path")
    p.add_argument("integrator", help="BV g: catalog name or spec path")
    p.add_argument("--g-param", dest="g_param", action="append", metavar="KEY=VALUE",
                   help="catalog parameter for the integrator (repeatable)")
    return parser


def _validate(args) -> None:
    for flag in ("depth", "grid"):
        v = getattr(args, flag, None)
        if v is not None and v < 1:
            raise ConfigError(f"--{flag} must be >= 1")
    for flag in ("tol", "bound"):
        v = getattr(args, flag, None)
        if v is not None and not v > 0:
            raise ConfigError(f"--{flag} must be > 0")
    if getattr(args, "count", 2) < 2:
        raise ConfigError("--count must be >= 2")


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "format")}
    return cfg


def run(argv: Optional[list[str]] = None, stdout=None) -> int:
    """Parse ``argv``, run the command and write its artifacts; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_args(argv)
        _validate(args)
        if args.command == "stieltjes":
            result, files, primary, code = cmd_stieltjes(args)
        elif args.command == "helly":
            result, files, primary, code = cmd_helly(args.input, args)
        elif args.command == "essential":
            result, files, primary, code = cmd_essential(args.input, args)
        else:
            rep = load_input(args.input, parse_params(args.param))
            handler = {"analyze": cmd_analyze, "indicatrix": cmd_indicatrix,
                       "decompose": cmd_decompose, "mollify": cmd_mollify}[args.command]
            result, files, primary, code = handler(rep, args)
    except NotBV as exc:
        args_ns = locals().get("args")
        print(f"bv-toolkit: not of bounded variation: {exc}", file=sys.stderr)
        return EXIT_NOT_BV if (args_ns is not None and args_ns.require_bv) else EXIT_INPUT
    except (BVError, OSError, ValueError) as exc:
        print(f"bv-toolkit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    report = {"schema": SCHEMA, "version": __version__, "command": args.command,
              "config": _config(args), "result": result}
    texts = {name: _csv_text(header, rows) for name, (header, rows) in files.items()}
    try:
        if args.out:
            out = Path(args.out)
            write_atomic(out / f"{args.command}.json", _dumps(report))
            for name, text in texts.items():
                write_atomic(out / f"{args.command}_{name}", text)
        if args.command == "stieltjes":
            stdout.write(f"{_fmt(result['value'])}\n")
        elif args.format == "csv" and primary is not None:
            stdout.write(texts[primary])
        elif not args.out:
            stdout.write(_dumps(report))
    except OSError as exc:
        print(f"bv-toolkit: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return code


def main(argv: Optional[list[str]] = None) -> int:
    try:
        return run(argv)
    except KeyboardInterrupt:
        return 130


__all__ = ["main", "run", "build_parser", "write_atomic", "COMMANDS"]
