"""Deterministic JSON reports: config, seed, versions and outputs."""

from __future__ import annotations

import json
import math
import platform
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from importlib import metadata
from typing import Any, Optional

import numpy as np

from . import __version__
from .numeric import PrecisionConfig, Q

SCHEMA = "gausssum.report/1"
_MPQ = type(Q())


def versions() -> dict:
    out = {"gausssum": __version__, "python": platform.python_version()}
    for pkg in ("numpy", "scipy", "gmpy2"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def to_jsonable(x: Any) -> Any:
    """Plain JSON types. Complex -> [re, im]; rationals -> "p/q" strings."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if is_dataclass(x) and not isinstance(x, type):
        return to_jsonable(asdict(x))
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [to_jsonable(float(x.real)), to_jsonable(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (_MPQ, Fraction)):
        return f"{x.numerator}/{x.denominator}"
    if x is None or isinstance(x, str):
        return x
    # mpz and friends
    try:
        return int(x)
    except (TypeError, ValueError):
        return str(x)


def build_report(command: str, args: dict, cfg: PrecisionConfig, seed: Optional[int],
                 outputs: Any) -> dict:
    return {
        "schema": SCHEMA,
        "command": command,
        "args": to_jsonable(args),
        "config": to_jsonable(asdict(cfg)),
        "seed": seed,
        "versions": versions(),
        "outputs": to_jsonable(outputs),
    }


def emit(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def parse(text: str) -> dict:
    rep = json.loads(text)
    if rep.get("schema") != SCHEMA:
        raise ValueError(f"unknown report schema {rep.get('schema')!r}")
    return rep
