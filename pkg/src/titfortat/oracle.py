"""Exact rational reference engine.

Runs the same round update as :mod:`titfortat.dynamics` with
:class:`fractions.Fraction` entries and no rescaling, so every conserved
quantity holds literally. Bit sizes grow with every round; n <= 5 and
T <= 40 run in well under a second per economy, larger instances are
possible but slow quickly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Sequence

import numpy as np

from .dynamics import Economy, EconomyError, Trajectory


def to_rational(value) -> Fraction:
    """Exact rational for ``value``.

    Floats go through their shortest decimal repr, so ``0.91`` becomes
    ``91/100`` rather than the binary approximation.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (Rational, Decimal, str)):
        return Fraction(value)
    if isinstance(value, (float, np.floating)):
        return Fraction(repr(float(value)))
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def log_rational(q: Fraction) -> float:
    """Natural log of a positive rational, safe for huge numerators."""
    return math.log(q.numerator) - math.log(q.denominator)


@dataclass(frozen=True)
class RationalEconomy:
    values: tuple[Fraction, ...]
    initial_amounts: tuple[Fraction, ...]
    initial_fractions: tuple[tuple[Fraction, ...], ...]

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def v_star(self) -> Fraction:
        return max(self.values)


def rational_economy(
    values: Sequence,
    initial_amounts: Sequence,
    initial_fractions: Sequence[Sequence],
    renormalize: bool = False,
) -> RationalEconomy:
    """Build a :class:`RationalEconomy`, checking invariants exactly.

    With ``renormalize`` each fraction row is divided by its exact sum;
    otherwise rows must sum to exactly one.
    """
    n = len(values)
    if n < 1 or len(initial_amounts) != n or len(initial_fractions) != n:
        raise EconomyError("inconsistent dimensions")
    vals = tuple(to_rational(v) for v in values)
    amounts = tuple(to_rational(x) for x in initial_amounts)
    for j, v in enumerate(vals):
        if v <= 0:
            raise EconomyError(f"values[{j}] = {v} must be positive", j)
    for i, x in enumerate(amounts):
        if x <= 0:
            raise EconomyError(f"initial_amounts[{i}] = {x} must be positive", i)
    rows = []
    for i, row in enumerate(initial_fractions):
        if len(row) != n:
            raise EconomyError(f"initial_fractions row {i} has wrong length", i)
        row = [to_rational(y) for y in row]
        for j, y in enumerate(row):
            if y <= 0:
                raise EconomyError(
                    f"initial_fractions[{i}][{j}] = {y} must be positive", (i, j)
                )
        total = sum(row)
        if total != 1:
            if not renormalize:
                raise EconomyError(f"initial_fractions row {i} sums to {total}", i)
            row = [y / total for y in row]
        rows.append(tuple(row))
    return RationalEconomy(vals, amounts, tuple(rows))


def from_economy(economy: Economy) -> RationalEconomy:
    """Rational twin of a float economy (decimal reprs, rows renormalized)."""
    return rational_economy(
        economy.values,
        economy.initial_amounts,
        economy.initial_fractions,
        renormalize=True,
    )


@dataclass(frozen=True)
class RationalState:
    t: int
    amounts: tuple[Fraction, ...]
    fractions: tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True, eq=False)
class ExactTrajectory:
    economy: RationalEconomy
    states: tuple[RationalState, ...]

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, t: int) -> RationalState:
        return self.states[t]

    def __iter__(self):
        return iter(self.states)

    @property
    def T(self) -> int:
        return len(self.states) - 1

    @cached_property
    def log_amounts(self) -> np.ndarray:
        return np.array([[log_rational(x) for x in s.amounts] for s in self.states])

    @cached_property
    def log_fractions(self) -> np.ndarray:
        return np.array(
            [[[log_rational(y) for y in row] for row in s.fractions] for s in self.states]
        )


def exact_step(state: RationalState, economy: RationalEconomy) -> RationalState:
    n = economy.n
    v, x, y = economy.values, state.amounts, state.fractions
    contrib = [[v[j] * y[j][i] * x[j] for j in range(n)] for i in range(n)]
    amounts = tuple(sum(row) for row in contrib)
    fractions = tuple(
        tuple(c / amounts[i] for c in contrib[i]) for i in range(n)
    )
    return RationalState(state.t + 1, amounts, fractions)


def run_exact(economy: RationalEconomy, T: int) -> ExactTrajectory:
    if T < 0:
        raise ValueError(f"T must be nonnegative, got {T}")
    state = RationalState(0, economy.initial_amounts, economy.initial_fractions)
    states = [state]
    for _ in range(T):
        state = exact_step(state, economy)
        states.append(state)
    return ExactTrajectory(economy, tuple(states))


@dataclass(frozen=True)
class ComparisonReport:
    max_log_amount_error: float
    max_fraction_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return (
            self.max_log_amount_error <= self.tolerance
            and self.max_fraction_error <= self.tolerance
        )


def compare(
    exact: ExactTrajectory, approx: Trajectory, rel_tolerance: float = 1e-9
) -> ComparisonReport:
    """Largest gaps between the exact and float engines.

    Amounts are compared as ``|ln x_exact - ln x_float|`` (a relative error),
    fractions directly.
    """
    if len(exact) != len(approx) or exact.economy.n != approx.economy.n:
        raise ValueError(
            f"shape mismatch: exact {len(exact)}x{exact.economy.n}, "
            f"float {len(approx)}x{approx.economy.n}"
        )
    log_err = float(np.max(np.abs(exact.log_amounts - approx.log_amounts)))
    exact_y = np.array(
        [[[float(y) for y in row] for row in s.fractions] for s in exact.states]
    )
    frac_err = float(np.max(np.abs(exact_y - np.exp(approx.log_fractions))))
    return ComparisonReport(log_err, frac_err, rel_tolerance)
