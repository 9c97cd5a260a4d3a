"""Tit-for-tat dynamic in a production economy with symmetric values.

Each round every player ``i`` receives ``w[i, j] = y[j, i] * x[j]`` of good
``j``, produces ``x_new[i] = sum_j v[j] * w[i, j]`` of its own good, and
then re-splits its good in proportion to each input's contribution,
``y_new[i, j] = v[j] * w[i, j] / x_new[i]``.

Amounts grow or shrink geometrically, so states are kept in log space.
Log amounts are stored relative to a single global offset which absorbs the
absolute scale; the largest stored log amount is always 0. Fractions are
stored as logs too, since fractions toward sub-optimal goods decay
geometrically and leave the double range after a few hundred rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

ROW_SUM_TOLERANCE = 1e-9


class EconomyError(ValueError):
    """Invalid economy data. ``index`` names the offending entry, if any."""

    def __init__(self, message: str, index: tuple[int, ...] | int | None = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class Economy:
    """Immutable problem instance. Use :func:`new_economy` to build one."""

    values: tuple[float, ...]
    initial_amounts: tuple[float, ...]
    initial_fractions: tuple[tuple[float, ...], ...]

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def v_star(self) -> float:
        return max(self.values)

    def values_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def with_value(self, player: int, value: float) -> "Economy":
        values = list(self.values)
        values[player] = value
        return new_economy(values, self.initial_amounts, self.initial_fractions)


def _normalize_row(row: list[float]) -> list[float]:
    # Rows already within float round-off of 1 are left alone so that
    # renormalizing is idempotent and save/load round trips are exact.
    total = math.fsum(row)
    if abs(total - 1.0) <= len(row) * 2.0**-52:
        return row
    return [y / total for y in row]


def new_economy(
    values: Sequence[float],
    initial_amounts: Sequence[float],
    initial_fractions: Sequence[Sequence[float]],
) -> Economy:
    """Validate inputs and build an :class:`Economy`.

    Rows of ``initial_fractions`` within 1e-9 of summing to one are
    renormalized; anything further off is rejected.
    """
    n = len(values)
    if n < 1:
        raise EconomyError("economy needs at least one player")
    if len(initial_amounts) != n:
        raise EconomyError(
            f"initial_amounts has {len(initial_amounts)} entries, expected {n}"
        )
    if len(initial_fractions) != n:
        raise EconomyError(
            f"initial_fractions has {len(initial_fractions)} rows, expected {n}"
        )

    vals = []
    for j, v in enumerate(values):
        v = float(v)
        if not math.isfinite(v) or v <= 0:
            raise EconomyError(f"values[{j}] = {v!r} must be positive and finite", j)
        vals.append(v)

    amounts = []
    for i, x in enumerate(initial_amounts):
        x = float(x)
        if not math.isfinite(x) or x <= 0:
            raise EconomyError(
                f"initial_amounts[{i}] = {x!r} must be positive and finite", i
            )
        amounts.append(x)

    rows = []
    for i, row in enumerate(initial_fractions):
        if len(row) != n:
            raise EconomyError(
                f"initial_fractions row {i} has {len(row)} entries, expected {n}", i
            )
        row = [float(y) for y in row]
        for j, y in enumerate(row):
            if not math.isfinite(y) or y <= 0:
                raise EconomyError(
                    f"initial_fractions[{i}][{j}] = {y!r} must be positive", (i, j)
                )
        total = math.fsum(row)
        if abs(total - 1.0) > ROW_SUM_TOLERANCE:
            raise EconomyError(
                f"initial_fractions row {i} sums to {total!r}, "
                f"more than {ROW_SUM_TOLERANCE} away from 1",
                i,
            )
        rows.append(tuple(_normalize_row(row)))

    return Economy(tuple(vals), tuple(amounts), tuple(rows))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MarketState:
    """State at round ``t``.

    ``log_amounts[i] + log_offset`` is ``ln x_i(t)``; ``log_fractions[i, j]``
    is ``ln y_{i,j}(t)``.
    """

    t: int
    log_amounts: np.ndarray
    log_offset: float
    log_fractions: np.ndarray

    @property
    def n(self) -> int:
        return len(self.log_amounts)

    @property
    def fractions(self) -> np.ndarray:
        return np.exp(self.log_fractions)

    @property
    def absolute_log_amounts(self) -> np.ndarray:
        return self.log_amounts + self.log_offset


@dataclass(frozen=True, eq=False)
class FlowMatrix:
    """``flows[i, j]`` is the amount of good ``j`` received by player ``i``,
    relative to the state's log offset."""

    flows: np.ndarray


def initial_state(economy: Economy) -> MarketState:
    log_amounts = np.log(np.array(economy.initial_amounts, dtype=float))
    log_fractions = np.log(np.array(economy.initial_fractions, dtype=float))
    return MarketState(0, _frozen(log_amounts), 0.0, _frozen(log_fractions))


def flows(state: MarketState, economy: Economy) -> FlowMatrix:
    w = state.fractions.T * np.exp(state.log_amounts)[np.newaxis, :]
    return FlowMatrix(w)


def step(state: MarketState, economy: Economy) -> MarketState:
    """Advance one round of exchange, production and fraction update."""
    log_v = np.log(economy.values_array())
    # terms[i, j] = ln(v_j * w_{i,j}) = ln v_j + ln y_{j,i} + ln x_j
    terms = log_v[np.newaxis, :] + state.log_fractions.T + state.log_amounts[np.newaxis, :]
    top = terms.max(axis=1)
    production = top + np.log(np.exp(terms - top[:, np.newaxis]).sum(axis=1))
    log_fractions = terms - production[:, np.newaxis]
    shift = production.max()
    log_amounts = production - shift
    log_offset = state.log_offset + shift
    if not (
        np.all(np.isfinite(log_amounts))
        and np.all(np.isfinite(log_fractions))
        and math.isfinite(log_offset)
    ):
        raise FloatingPointError(f"non-finite state produced at t={state.t + 1}")
    return MarketState(
        state.t + 1, _frozen(log_amounts), float(log_offset), _frozen(log_fractions)
    )


@dataclass(frozen=True, eq=False)
class Trajectory:
    economy: Economy
    states: tuple[MarketState, ...]

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, t: int) -> MarketState:
        return self.states[t]

    def __iter__(self):
        return iter(self.states)

    @property
    def T(self) -> int:
        return len(self.states) - 1

    @cached_property
    def log_amounts(self) -> np.ndarray:
        """``(T+1, n)`` array of ``ln x_i(t)``, offsets included."""
        return _frozen(np.array([s.absolute_log_amounts for s in self.states]))

    @cached_property
    def log_fractions(self) -> np.ndarray:
        """``(T+1, n, n)`` array of ``ln y_{i,j}(t)``."""
        return _frozen(np.array([s.log_fractions for s in self.states]))


def run(economy: Economy, T: int) -> Trajectory:
    if T < 0:
        raise ValueError(f"T must be nonnegative, got {T}")
    state = initial_state(economy)
    states = [state]
    for _ in range(T):
        state = step(state, economy)
        states.append(state)
    return Trajectory(economy, tuple(states))


def amount_log(state: MarketState, i: int) -> float:
    """``ln x_i(t)``."""
    if not 0 <= i < state.n:
        raise IndexError(f"player index {i} out of range for n={state.n}")
    return float(state.log_amounts[i] + state.log_offset)
