"""JSON file formats.

Complex numbers are written as ``[re, im]`` pairs. Floats go through
``repr``, which is the shortest string that parses back to the same double,
so every matrix round-trips bit-exactly.

state     {"n": int, "kind": "pure", "amplitudes": [[re, im], ...]}   # 2**n entries
w-state   {"n": int, "kind": "w", "c": [[re, im], ...]}               # entry J-1 is party J
marginals {"n": int, "pairs": [{"parties": [J, K], "matrix": 4x4 of [re, im]}, ...]}
report    {"verdict": ..., "coefficients": ..., "residuals": {"J,K": float}, ...}
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .errors import CapExceededError
from .reconstruct import MarginalSet, ReconstructionReport
from .states import DEFAULT_TOL, PureState, Rdm, Tolerances, WCoefficients


class FormatError(ValueError):
    """Malformed input file."""


def encode_complex_array(a) -> list:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [encode_complex_array(x) for x in a]


def decode_complex_array(data, shape_hint: str = "array") -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{shape_hint}: expected nested [re, im] pairs") from exc
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise FormatError(f"{shape_hint}: innermost entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy/complex/dataclass values to plain JSON types."""
    if isinstance(obj, WCoefficients):
        return encode_complex_array(obj.c)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {",".join(map(str, k)) if isinstance(k, tuple) else str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, frozenset):
        return sorted(obj)
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if math.isnan(v) or math.isinf(v) else v
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), allow_nan=False) + "\n"


def read_json(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read JSON from {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise FormatError("top-level JSON value must be an object")
    return data


def write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _get_n(data: dict) -> int:
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise FormatError(f"field 'n' must be a positive integer, got {n!r}")
    return n


# -- states -------------------------------------------------------------------

def pure_state_to_dict(psi: PureState) -> dict:
    return {"n": psi.n, "kind": "pure", "amplitudes": encode_complex_array(psi.amplitudes)}


def w_state_to_dict(c: WCoefficients) -> dict:
    return {"n": c.n, "kind": "w", "c": encode_complex_array(c.c)}


def state_from_dict(data: dict, tol: Tolerances = DEFAULT_TOL) -> PureState | WCoefficients:
    """Parse a ``pure`` or ``w`` state; raises :class:`FormatError` or a cap error."""
    n = _get_n(data)
    kind = data.get("kind")
    if kind == "w":
        c = decode_complex_array(data.get("c"), "c")
        if c.shape != (n,):
            raise FormatError(f"'c' must hold n={n} entries, got shape {c.shape}")
        try:
            return WCoefficients(c, tol)
        except ValueError as exc:
            raise FormatError(str(exc)) from exc
    if kind == "pure":
        amps = decode_complex_array(data.get("amplitudes"), "amplitudes")
        if amps.ndim != 1:
            raise FormatError("'amplitudes' must be a flat list of [re, im] pairs")
        return _build(PureState, n, amps, tol)
    raise FormatError(f"unknown state kind {kind!r}")


def _build(cls, *args):
    try:
        return cls(*args)
    except CapExceededError:
        raise
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


# -- marginals ------------------------------------------------------------------

def marginals_to_dict(n: int, rdms: list[Rdm]) -> dict:
    return {
        "n": n,
        "pairs": [{"parties": list(r.parties), "matrix": encode_complex_array(r.entries)} for r in rdms],
    }


def marginal_set_to_dict(ms: MarginalSet) -> dict:
    return {
        "n": ms.n,
        "pairs": [
            {"parties": [int(p[0]), int(p[1])], "matrix": encode_complex_array(m)}
            for p, m in zip(ms.pairs, ms.matrices)
        ],
    }


def marginal_set_from_dict(data: dict, tol: Tolerances = DEFAULT_TOL) -> MarginalSet:
    n = _get_n(data)
    entries = data.get("pairs")
    if not isinstance(entries, list) or not entries:
        raise FormatError("'pairs' must be a non-empty list")
    pairs, mats = [], []
    for e in entries:
        if not isinstance(e, dict):
            raise FormatError("each entry of 'pairs' must be an object")
        parties = e.get("parties")
        if (
            not isinstance(parties, list)
            or len(parties) != 2
            or not all(isinstance(p, int) and not isinstance(p, bool) for p in parties)
        ):
            raise FormatError(f"'parties' must be two integers, got {parties!r}")
        m = decode_complex_array(e.get("matrix"), f"matrix for {parties}")
        if m.shape != (4, 4):
            raise FormatError(f"matrix for {parties} must be 4x4, got {m.shape}")
        pairs.append(parties)
        mats.append(m)
    try:
        return MarginalSet(n, pairs, mats, tol)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


# -- reports --------------------------------------------------------------------

def report_to_dict(rep: ReconstructionReport) -> dict:
    return {
        "verdict": rep.verdict.value,
        "step": rep.step,
        "message": rep.message,
        "coefficients": encode_complex_array(rep.coefficients.c) if rep.coefficients is not None else None,
        "phase_convention": rep.phase_convention,
        "residuals": {f"{j},{k}": v for (j, k), v in rep.residuals.items()},
        "diagnostics": to_jsonable(rep.diagnostics),
        "assumptions": list(rep.assumptions),
    }
