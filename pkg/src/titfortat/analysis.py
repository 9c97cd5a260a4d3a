"""Phase classification, growth constants, and identity checks on trajectories.

With ``v*`` the largest value, player ``i`` grows when ``v_i * v* > 1``,
vanishes when it is below one and stays bounded at equality. The checkers
below verify the exact relations behind that statement on simulated
trajectories:

* ``x_i(t) * y_{i,i}(t) = v_i**t * x_i(0) * y_{i,i}(0)`` (potential law)
* ``x_i(t+1) y_{i,j}(t+1) = v_i v_j x_i(t-1) y_{i,j}(t-1)`` (two-step identity)
* its telescoped form along each parity, anchored at ``t = 0`` and ``t = 1``
* the sandwich ``c_i r**(t//2) <= x_i(t) <= d_i r**(t//2)`` with ``r = v_i v*``

All checks work in log space and return the worst residual or violation in
log units. Float trajectories and exact ones from :mod:`titfortat.oracle`
are both accepted; the identity checks evaluate exact trajectories in
rational arithmetic, so they report exactly ``0.0`` there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import singledispatch
from typing import Sequence, Union

import numpy as np

from .dynamics import Economy, MarketState, Trajectory, amount_log, run
from .oracle import ExactTrajectory, log_rational

TIE_TOLERANCE = 1e-12

AnyTrajectory = Union[Trajectory, ExactTrajectory]


class Phase(str, Enum):
    GROWS = "Grows"
    VANISHES = "Vanishes"
    BOUNDED = "Bounded"

    def __str__(self) -> str:
        return self.value


def optimal_set(values: Sequence, tie_tolerance: float = TIE_TOLERANCE) -> frozenset[int]:
    """Indices ``j`` with ``v_j >= v* (1 - tie_tolerance)``."""
    v_star = max(values)
    cutoff = v_star * (1 - tie_tolerance) if tie_tolerance else v_star
    return frozenset(j for j, v in enumerate(values) if v >= cutoff)


def phase_of(product: float, tie_tolerance: float = TIE_TOLERANCE) -> Phase:
    if product > 1 + tie_tolerance:
        return Phase.GROWS
    if product < 1 - tie_tolerance:
        return Phase.VANISHES
    return Phase.BOUNDED


@dataclass(frozen=True)
class PhaseEntry:
    player: int
    value: float
    phase: Phase
    product: float
    margin: float


@dataclass(frozen=True)
class PhaseReport:
    entries: tuple[PhaseEntry, ...]

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int) -> PhaseEntry:
        return self.entries[i]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def phases(self) -> tuple[Phase, ...]:
        return tuple(e.phase for e in self.entries)


def classify(economy: Economy, tie_tolerance: float = TIE_TOLERANCE) -> PhaseReport:
    """Label each player by the sign of ``v_i * v* - 1``.

    Depends on the values only, never on amounts or fractions.
    """
    v_star = float(max(economy.values))
    entries = []
    for i, v in enumerate(economy.values):
        product = float(v) * v_star
        entries.append(
            PhaseEntry(i, float(v), phase_of(product, tie_tolerance), product, product - 1)
        )
    return PhaseReport(tuple(entries))


def potential(state: MarketState, economy: Economy, i: int) -> float:
    """``ln g_i(t) = ln x_i(t) + ln y_{i,i}(t)``."""
    return amount_log(state, i) + float(state.log_fractions[i, i])


def _log_values(traj: AnyTrajectory) -> np.ndarray:
    return np.log(np.array([float(v) for v in traj.economy.values]))


def _exact_residual(a: Fraction, b: Fraction) -> float:
    if a == b:
        return 0.0
    return abs(log_rational(a) - log_rational(b))


# -- potential law ---------------------------------------------------------


@singledispatch
def check_potential_law(traj: Trajectory) -> float:
    """Max over ``i, t`` of ``|ln g_i(t) - t ln v_i - ln g_i(0)|``."""
    la, ly = traj.log_amounts, traj.log_fractions
    g = la + np.diagonal(ly, axis1=1, axis2=2)
    t = np.arange(len(traj))[:, np.newaxis]
    return float(np.max(np.abs(g - t * _log_values(traj) - g[0])))


@check_potential_law.register
def _(traj: ExactTrajectory) -> float:
    v = traj.economy.values
    s0 = traj.states[0]
    g0 = [s0.amounts[i] * s0.fractions[i][i] for i in range(len(v))]
    worst = 0.0
    for s in traj.states[1:]:
        for i, vi in enumerate(v):
            worst = max(
                worst,
                _exact_residual(s.amounts[i] * s.fractions[i][i], vi**s.t * g0[i]),
            )
    return worst


# -- two-step identity -----------------------------------------------------


@singledispatch
def check_two_step_identity(traj: Trajectory) -> float:
    """Max residual of ``ln(x_i y_ij)(t+1) = ln(v_i v_j) + ln(x_i y_ij)(t-1)``."""
    if len(traj) < 3:
        return 0.0
    lv = _log_values(traj)
    p = traj.log_fractions + traj.log_amounts[:, :, np.newaxis]
    resid = p[2:] - p[:-2] - (lv[:, np.newaxis] + lv[np.newaxis, :])
    return float(np.max(np.abs(resid)))


@check_two_step_identity.register
def _(traj: ExactTrajectory) -> float:
    v = traj.economy.values
    n = len(v)
    worst = 0.0
    for before, after in zip(traj.states, traj.states[2:]):
        for i in range(n):
            for j in range(n):
                worst = max(
                    worst,
                    _exact_residual(
                        after.amounts[i] * after.fractions[i][j],
                        v[i] * v[j] * before.amounts[i] * before.fractions[i][j],
                    ),
                )
    return worst


# -- conserved products ----------------------------------------------------


@singledispatch
def check_conserved_product(traj: Trajectory) -> float:
    """Max residual of ``x_i(t) y_ij(t) = (v_i v_j)**(t//2) x_i(p) y_ij(p)``
    with ``p = t % 2``."""
    lv = _log_values(traj)
    log_vv = lv[:, np.newaxis] + lv[np.newaxis, :]
    p = traj.log_fractions + traj.log_amounts[:, :, np.newaxis]
    t = np.arange(len(traj))
    anchors = p[t % 2]
    ell = (t // 2)[:, np.newaxis, np.newaxis]
    return float(np.max(np.abs(p - ell * log_vv - anchors)))


@check_conserved_product.register
def _(traj: ExactTrajectory) -> float:
    v = traj.economy.values
    n = len(v)
    worst = 0.0
    for s in traj.states[2:]:
        anchor = traj.states[s.t % 2]
        ell = s.t // 2
        for i in range(n):
            for j in range(n):
                worst = max(
                    worst,
                    _exact_residual(
                        s.amounts[i] * s.fractions[i][j],
                        (v[i] * v[j]) ** ell * anchor.amounts[i] * anchor.fractions[i][j],
                    ),
                )
    return worst


# -- optimal ratio invariance ----------------------------------------------


@singledispatch
def check_optimal_ratio_invariance(
    traj: Trajectory, tie_tolerance: float = TIE_TOLERANCE
) -> float:
    """Max drift of ``ln(y_ij / y_ij')`` between optimal goods ``j, j'``
    along each parity, relative to the anchor at ``t = 0`` or ``t = 1``.

    Vacuously 0 with fewer than two optimal goods.
    """
    opt = sorted(optimal_set(traj.economy.values, tie_tolerance))
    if len(opt) < 2:
        return 0.0
    ly = traj.log_fractions[:, :, opt]
    t = np.arange(len(traj))
    drift = ly - ly[t % 2]
    pairwise = drift[:, :, :, np.newaxis] - drift[:, :, np.newaxis, :]
    return float(np.max(np.abs(pairwise)))


@check_optimal_ratio_invariance.register
def _(traj: ExactTrajectory, tie_tolerance: float = TIE_TOLERANCE) -> float:
    opt = sorted(optimal_set(traj.economy.values, tie_tolerance))
    if len(opt) < 2:
        return 0.0
    worst = 0.0
    for s in traj.states[2:]:
        anchor = traj.states[s.t % 2]
        for i in range(traj.economy.n):
            y, y0 = s.fractions[i], anchor.fractions[i]
            for a in opt:
                for b in opt:
                    if a < b:
                        worst = max(worst, _exact_residual(y[a] * y0[b], y[b] * y0[a]))
    return worst


# -- growth constants ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoundConstants:
    """Per-player log constants of the amount sandwich, one pair per parity.

    ``log_c_odd = ln(x_i(1) y_{i,i*}(1))``, ``log_d_odd = ln x_i(1)``, and the
    even pair likewise at ``t = 0``.
    """

    i_star: int
    log_c_odd: np.ndarray
    log_d_odd: np.ndarray
    log_c_even: np.ndarray
    log_d_even: np.ndarray

    def lower(self, parity: int) -> np.ndarray:
        return self.log_c_odd if parity else self.log_c_even

    def upper(self, parity: int) -> np.ndarray:
        return self.log_d_odd if parity else self.log_d_even


def bound_constants(traj: AnyTrajectory) -> BoundConstants:
    if len(traj) < 2:
        raise ValueError("bound constants need the states at t=0 and t=1")
    values = list(traj.economy.values)
    i_star = values.index(max(values))
    la, ly = traj.log_amounts, traj.log_fractions
    return BoundConstants(
        i_star,
        log_c_odd=la[1] + ly[1, :, i_star],
        log_d_odd=la[1].copy(),
        log_c_even=la[0] + ly[0, :, i_star],
        log_d_even=la[0].copy(),
    )


def _log_rate(traj: AnyTrajectory) -> np.ndarray:
    lv = _log_values(traj)
    return lv + lv.max()


def check_amount_bounds(traj: AnyTrajectory, constants: BoundConstants) -> float:
    """Worst signed violation of ``ln c + (t//2) ln(v_i v*) <= ln x_i(t) <=
    ln d + (t//2) ln(v_i v*)``. Negative means every bound holds with room."""
    la = traj.log_amounts
    t = np.arange(len(traj))
    ell = (t // 2)[:, np.newaxis]
    growth = ell * _log_rate(traj)
    odd = (t % 2 == 1)[:, np.newaxis]
    lower = np.where(odd, constants.log_c_odd, constants.log_c_even) + growth
    upper = np.where(odd, constants.log_d_odd, constants.log_d_even) + growth
    return float(np.max(np.maximum(lower - la, la - upper)))


def check_corollary_envelope(
    traj: AnyTrajectory,
    constants: BoundConstants | None = None,
    tie_tolerance: float = TIE_TOLERANCE,
) -> float:
    """Worst signed violation (log units) of the sub-optimal fraction envelope

    ``y_ij(t) <= x_i(p) y_ij(p) / c_i,p * (v_j / v*)**(t//2)``, ``p = t % 2``,

    using the lower-bound constant ``c``. ``-inf`` when every good is optimal.
    """
    if constants is None:
        constants = bound_constants(traj)
    opt = optimal_set(traj.economy.values, tie_tolerance)
    sub = [j for j in range(traj.economy.n) if j not in opt]
    if not sub:
        return -math.inf
    lv = _log_values(traj)
    la, ly = traj.log_amounts, traj.log_fractions
    t = np.arange(len(traj))
    par = t % 2
    c = np.where(par[:, np.newaxis] == 1, constants.log_c_odd, constants.log_c_even)
    anchor = la[par][:, :, np.newaxis] + ly[par][:, :, sub] - c[:, :, np.newaxis]
    decay = (t // 2)[:, np.newaxis] * (lv[sub] - lv.max())
    envelope = anchor + decay[:, np.newaxis, :]
    return float(np.max(ly[:, :, sub] - envelope))


# -- limits and exponents --------------------------------------------------


@dataclass(frozen=True, eq=False)
class LimitProfile:
    optimal: frozenset[int]
    mass_on_optimal: np.ndarray
    max_suboptimal_fraction: np.ndarray
    suboptimal_mass: np.ndarray


def fraction_limit_profile(
    traj: AnyTrajectory, tie_tolerance: float = TIE_TOLERANCE
) -> LimitProfile:
    """Mass each player puts on optimal goods at the final state."""
    opt = optimal_set(traj.economy.values, tie_tolerance)
    n = traj.economy.n
    mask = np.array([j in opt for j in range(n)])
    y = np.exp(traj.log_fractions[-1])
    sub = y[:, ~mask]
    return LimitProfile(
        opt,
        mass_on_optimal=y[:, mask].sum(axis=1),
        max_suboptimal_fraction=sub.max(axis=1) if sub.size else np.zeros(n),
        suboptimal_mass=sub.sum(axis=1),
    )


def growth_exponent(traj: AnyTrajectory, i: int) -> float:
    """Average log growth per two rounds, ``(ln x_i(T) - ln x_i(T % 2)) / (T // 2)``.

    Compares like parity with like; converges to ``ln(v_i v*)``.
    """
    T = len(traj) - 1
    if T < 2:
        raise ValueError(f"growth exponent needs T >= 2, got T={T}")
    la = traj.log_amounts
    return float((la[T, i] - la[T % 2, i]) / (T // 2))


def exponent_error_bound(constants: BoundConstants, i: int, T: int) -> float:
    """Sandwich bound on ``|growth_exponent - ln(v_i v*)|`` at horizon ``T``."""
    p = T % 2
    return float(constants.upper(p)[i] - constants.lower(p)[i]) / (T // 2)


@dataclass(frozen=True)
class SweepRow:
    value: float
    phase: Phase
    empirical_exponent: float
    theoretical_exponent: float
    error_bound: float


def sweep(
    base: Economy,
    player: int,
    value_grid: Sequence[float],
    T: int,
    tie_tolerance: float = TIE_TOLERANCE,
) -> list[SweepRow]:
    """Substitute each grid value for ``v_player``, classify and simulate."""
    if not value_grid:
        raise ValueError("value grid is empty")
    if not 0 <= player < base.n:
        raise IndexError(f"player index {player} out of range for n={base.n}")
    rows = []
    for value in value_grid:
        economy = base.with_value(player, value)
        entry = classify(economy, tie_tolerance)[player]
        traj = run(economy, T)
        rows.append(
            SweepRow(
                value=entry.value,
                phase=entry.phase,
                empirical_exponent=growth_exponent(traj, player),
                theoretical_exponent=math.log(entry.product),
                error_bound=exponent_error_bound(bound_constants(traj), player, T),
            )
        )
    return rows
