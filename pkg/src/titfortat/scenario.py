"""Scenario files, seeded random economies, and trajectory CSV export.

A scenario is a JSON object::

    {"values": [...], "initial_amounts": [...], "initial_fractions": [[...], ...],
     "steps": 250, "tie_tolerance": 1e-12, "seed": 7}

The last three keys are optional. Unknown keys are rejected.

Random economies use numpy's PCG64 bit generator seeded with ``seed``.
Draws are consumed in a fixed order: ``n`` uniforms in ``[0, 1)`` for the
values (mapped affinely onto ``[low, high]``), then ``n * n`` uniforms in
row-major order turned into standard exponentials by ``-log1p(-u)``. Each
row of exponentials is divided by its sum, which samples the simplex
uniformly. Only ``Generator.random`` is used, so the stream does not depend
on numpy's ziggurat samplers.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Any, TextIO

import numpy as np

from .dynamics import Economy, EconomyError, Trajectory, new_economy

REQUIRED_KEYS = ("values", "initial_amounts", "initial_fractions")
OPTIONAL_KEYS = ("steps", "tie_tolerance", "seed")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    economy: Economy
    steps: int | None = None
    tie_tolerance: float | None = None
    seed: int | None = None


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _numbers(data: Any, field: str) -> list[float]:
    if not isinstance(data, list) or not all(_is_number(x) for x in data):
        raise ScenarioError(f"field '{field}' must be an array of numbers")
    return data


def load_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"malformed scenario at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")

    unknown = sorted(set(doc) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS))
    if unknown:
        raise ScenarioError(f"unknown field(s): {', '.join(unknown)}")
    for key in REQUIRED_KEYS:
        if key not in doc:
            raise ScenarioError(f"missing required field '{key}'")

    values = _numbers(doc["values"], "values")
    amounts = _numbers(doc["initial_amounts"], "initial_amounts")
    rows = doc["initial_fractions"]
    if not isinstance(rows, list):
        raise ScenarioError("field 'initial_fractions' must be an array of arrays")
    for i, row in enumerate(rows):
        _numbers(row, f"initial_fractions[{i}]")

    steps = doc.get("steps")
    if steps is not None and (not isinstance(steps, int) or isinstance(steps, bool) or steps < 0):
        raise ScenarioError("field 'steps' must be a nonnegative integer")
    tie = doc.get("tie_tolerance")
    if tie is not None and (not _is_number(tie) or tie < 0):
        raise ScenarioError("field 'tie_tolerance' must be a nonnegative number")
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise ScenarioError("field 'seed' must be an integer")

    economy = new_economy(values, amounts, rows)
    return Scenario(economy, steps, None if tie is None else float(tie), seed)


def load_scenario_file(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())


def dump_scenario(
    economy: Economy,
    steps: int | None = None,
    tie_tolerance: float | None = None,
    seed: int | None = None,
) -> str:
    doc: dict[str, Any] = {
        "values": list(economy.values),
        "initial_amounts": list(economy.initial_amounts),
        "initial_fractions": [list(row) for row in economy.initial_fractions],
    }
    for key, val in (("steps", steps), ("tie_tolerance", tie_tolerance), ("seed", seed)):
        if val is not None:
            doc[key] = val
    return json.dumps(doc, indent=2) + "\n"


def generate_random(
    n: int, seed: int, value_low: float = 0.5, value_high: float = 1.5
) -> Economy:
    """Seeded random economy: uniform values, unit amounts, uniform simplex rows."""
    if n < 1:
        raise EconomyError(f"n must be at least 1, got {n}")
    if not (0 < value_low <= value_high) or not math.isfinite(value_high):
        raise EconomyError(
            f"value bounds must satisfy 0 < low <= high, got [{value_low}, {value_high}]"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    values = value_low + (value_high - value_low) * rng.random(n)
    exps = -np.log1p(-rng.random((n, n)))
    # u = 0 would give a zero fraction; a 2**-53 floor keeps rows non-degenerate
    exps = np.maximum(exps, 2.0**-53)
    rows = exps / exps.sum(axis=1, keepdims=True)
    return new_economy(values.tolist(), [1.0] * n, rows.tolist())


def save_trajectory_csv(traj: Trajectory, sink: TextIO) -> None:
    """Long-format CSV: ``t,kind,i,j,value`` with 1-based player indices.

    Per round, ``log_amount`` rows (``j`` empty, value ``ln x_i(t)``) come
    first, then ``fraction`` rows (value ``y_{i,j}(t)``).
    """
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(["t", "kind", "i", "j", "value"])
    la = traj.log_amounts
    y = np.exp(traj.log_fractions)
    n = traj.economy.n
    for t in range(len(traj)):
        for i in range(n):
            writer.writerow([t, "log_amount", i + 1, "", format(la[t, i], ".17g")])
        for i in range(n):
            for j in range(n):
                writer.writerow([t, "fraction", i + 1, j + 1, format(y[t, i, j], ".17g")])
