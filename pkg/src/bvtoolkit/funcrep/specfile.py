"""JSON function specifications.

Two shapes are accepted::

    {"name": "sin", "params": {"b": 3.0}}

    {"piecewise": [{"on": [0, 1], "expr": {"poly": [0, 1]}},
                   {"on": [1, 2], "expr": [{"poly": [1]}, {"sin": {"amp": 0.1, "freq": 3}}]}],
     "values": [[1, 0.5]]}

A piece expression is one term or a list of terms that are summed.  Terms
come from a fixed whitelist, each with a closed-form derivative:

* ``{"poly": [c0, c1, ...]}``                      -> ``c0 + c1 x + ...``
* ``{"sin": {"amp": A, "freq": w, "phase": p}}``   -> ``A sin(w x + p)``
* ``{"cos": {"amp": A, "freq": w, "phase": p}}``   -> ``A cos(w x + p)``
* ``{"sqrt": {"scale": A, "shift": s}}``           -> ``A sqrt(x - s)``
* ``{"recip": {"scale": A, "shift": s}}``          -> ``A / (x - s)``

Point values default to the right-hand piece (the function is
right-continuous); ``values`` overrides them at listed breakpoints.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Callable

import numpy as np

from ..errors import BadParameter, ConfigError, UnknownName
from .base import FunctionRep, from_smooth
from .catalog import catalog_get

Term = tuple[Callable, Callable]


def _num(obj: dict, key: str, default: float) -> float:
    v = obj.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{key!r} must be a finite number, got {v!r}")
    return float(v)


def _term(spec: Any) -> Term:
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError(f"a term is a one-key object, got {spec!r}")
    (kind, arg), = spec.items()
    if kind == "poly":
        if not isinstance(arg, list) or not arg:
            raise ConfigError("poly needs a non-empty coefficient list")
        coef = np.array([_num({"c": c}, "c", 0.0) for c in arg])
        poly = np.polynomial.Polynomial(coef)
        dpoly = poly.deriv()
        return poly, dpoly
    if kind in ("sin", "cos"):
        if not isinstance(arg, dict):
            raise ConfigError(f"{kind} needs an object of amp/freq/phase")
        A, w, p = _num(arg, "amp", 1.0), _num(arg, "freq", 1.0), _num(arg, "phase", 0.0)
        if kind == "sin":
            return (lambda x: A * np.sin(w * x + p)), (lambda x: A * w * np.cos(w * x + p))
        return (lambda x: A * np.cos(w * x + p)), (lambda x: -A * w * np.sin(w * x + p))
    if kind in ("sqrt", "recip"):
        if not isinstance(arg, dict):
            raise ConfigError(f"{kind} needs an object of scale/shift")
        A, s = _num(arg, "scale", 1.0), _num(arg, "shift", 0.0)
        if kind == "sqrt":
            return (lambda x: A * np.sqrt(x - s)), (lambda x: 0.5 * A / np.sqrt(x - s))
        return (lambda x: A / (x - s)), (lambda x: -A / (x - s) ** 2)
    raise ConfigError(f"unknown term {kind!r}; allowed: poly, sin, cos, sqrt, recip")


def _expr(spec: Any) -> Term:
    terms = [_term(t) for t in (spec if isinstance(spec, list) else [spec])]
    if not terms:
        raise ConfigError("empty expression")

    def f(x, _t=terms):
        x = np.asarray(x, dtype=float)
        return sum((fn(x) for fn, _ in _t), np.zeros(x.shape))

    def df(x, _t=terms):
        x = np.asarray(x, dtype=float)
        return sum((d(x) for _, d in _t), np.zeros(x.shape))

    return f, df


def _check_domain(spec: dict, lo: float, hi: float, idx: int) -> None:
    """sqrt arguments must stay >= 0 and recip poles outside the closed piece."""
    terms = spec if isinstance(spec, list) else [spec]
    for term in terms:
        (kind, arg), = term.items()
        if kind == "sqrt" and lo < _num(arg, "shift", 0.0):
            raise ConfigError(f"piece {idx}: sqrt argument negative on [{lo}, {hi}]")
        if kind == "recip" and lo <= _num(arg, "shift", 0.0) <= hi:
            raise ConfigError(f"piece {idx}: recip pole inside [{lo}, {hi}]")


def build_piecewise(pieces: list, values: list | None = None, name: str | None = None):
    if not isinstance(pieces, list) or not pieces:
        raise ConfigError("'piecewise' must be a non-empty list of pieces")
    t, funcs, derivs = [], [], []
    for i, piece in enumerate(pieces):
        if not isinstance(piece, dict) or "on" not in piece or "expr" not in piece:
            raise ConfigError(f"piece {i} needs 'on' and 'expr'")
        on = piece["on"]
        if not (isinstance(on, list) and len(on) == 2):
            raise ConfigError(f"piece {i}: 'on' must be [lo, hi]")
        lo, hi = _num({"v": on[0]}, "v", 0), _num({"v": on[1]}, "v", 0)
        if not lo < hi:
            raise ConfigError(f"piece {i}: empty interval [{lo}, {hi}]")
        if t and t[-1] != lo:
            raise ConfigError(f"piece {i} starts at {lo}, previous piece ends at {t[-1]}")
        if not t:
            t.append(lo)
        t.append(hi)
        _check_domain(piece["expr"], lo, hi, i)
        f, df = _expr(piece["expr"])
        funcs.append(f)
        derivs.append(df)
    overrides = {}
    for item in values or []:
        if not (isinstance(item, list) and len(item) == 2):
            raise ConfigError("'values' entries are [x, value] pairs")
        x, v = _num({"v": item[0]}, "v", 0), _num({"v": item[1]}, "v", 0)
        if x not in t:
            raise ConfigError(f"'values' point {x} is not a breakpoint")
        overrides[t.index(x)] = v
    try:
        return from_smooth(t, funcs, derivs, values=overrides, name=name or "piecewise")
    except BadParameter as exc:
        raise ConfigError(str(exc)) from exc


def load_spec(obj: Any) -> FunctionRep:
    """Build a representation from a parsed JSON spec (dict)."""
    if not isinstance(obj, dict):
        raise ConfigError("function spec must be a JSON object")
    if "piecewise" in obj:
        return build_piecewise(obj["piecewise"], obj.get("values"), obj.get("label"))
    if "name" in obj:
        params = obj.get("params", {}) or {}
        if not isinstance(params, dict):
            raise ConfigError("'params' must be an object")
        try:
            return catalog_get(obj["name"], **params)
        except (UnknownName, BadParameter) as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError("function spec needs 'name' or 'piecewise'")


def load_spec_file(path: str | Path) -> FunctionRep:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return load_spec(obj)
