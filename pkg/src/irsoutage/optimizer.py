"""Closed-form optimal IRS phases and an exhaustive grid verifier."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import (DEFAULT_CONTROL, SeriesControl, direct_los, f_series,
                       f_series_many, g_nlos, outage_probability,
                       reflected_los_terms)
from .model import (TWO_PI, OutageQuery, PhaseShifts, SystemModel, check,
                    wrap_phase)

DIRECT_LOS_PRESENT = "direct-LoS-present"
DIRECT_LOS_ABSENT = "direct-LoS-absent"
ALL_LOS_ABSENT = "all-LoS-absent"

GRID_DIM_LIMIT = 4
_CHUNK = 1 << 18


class GridBudgetError(ValueError):
    """Grid search refused: too many phase dimensions or too few points."""


@dataclass(frozen=True)
class OptimalSolution:
    phases: PhaseShifts
    g_los_star: float
    g_nlos: float
    p_o_star: float
    case_tag: str


def case_tag(model: SystemModel) -> str:
    if model.direct.kappa_sd != 0:
        return DIRECT_LOS_PRESENT
    if any(irs.kappa_rd != 0 for irs in model.irss):
        return DIRECT_LOS_ABSENT
    return ALL_LOS_ABSENT


def optimal_phases(model: SystemModel) -> PhaseShifts:
    """Phases that co-phase every reflected LoS term.

    With a LoS direct link each reflected term is rotated onto the direct
    link's LoS phase; without one all reflected terms are rotated to phase 0.
    IRSs without a LoS component (kappa_rd = 0) get zero phases, which do not
    affect the LoS power.
    """
    check(model)
    target = model.direct.los_phase_sd if model.direct.kappa_sd != 0 else 0.0
    rows = []
    for irs in model.irss:
        if irs.kappa_rd == 0:
            rows.append((0.0,) * irs.n_elements)
        else:
            rows.append(tuple(wrap_phase(target - rd - sr)
                              for rd, sr in zip(irs.los_phases_rd, irs.los_phases_sr)))
    return PhaseShifts(tuple(rows))


def g_los_star(model: SystemModel) -> float:
    """Largest LoS power reachable by any phase choice: the squared sum of magnitudes."""
    check(model)
    d = model.direct
    total = math.sqrt(d.alpha_sd * d.kappa_sd / (d.kappa_sd + 1.0))
    for irs in model.irss:
        total += irs.n_elements * math.sqrt(irs.path_gain * irs.kappa_rd / (irs.kappa_rd + 1.0))
    return total * total


def optimal_outage(model: SystemModel, q: OutageQuery,
                   ctl: SeriesControl = DEFAULT_CONTROL) -> OptimalSolution:
    phases = optimal_phases(model)
    gs = g_los_star(model)
    gn = g_nlos(model)
    return OptimalSolution(phases, gs, gn, f_series(gs, gn, q.threshold, ctl), case_tag(model))


def _grid_chunks(model: SystemModel, points_per_dim: int):
    """Yield (start_index, g_los array) over the lexicographic phase grid."""
    amps, phis = reflected_los_terms(model)
    dim = amps.size
    d0 = direct_los(model)
    steps = TWO_PI * np.arange(points_per_dim) / points_per_dim
    rot = np.exp(1j * steps)
    total = points_per_dim ** dim
    if dim == 0:
        yield 0, np.array([abs(d0) ** 2])
        return
    # term m on grid point i contributes amps[m] * e^{j phis[m]} * rot[i]
    base = amps * np.exp(1j * phis)
    radix = points_per_dim ** np.arange(dim - 1, -1, -1)
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, total))
        acc = np.full(flat.size, d0, dtype=complex)
        for m in range(dim):
            digit = (flat // radix[m]) % points_per_dim
            acc += base[m] * rot[digit]
        yield start, acc.real ** 2 + acc.imag ** 2


def _check_budget(model, points_per_dim):
    if model.total_elements > GRID_DIM_LIMIT:
        raise GridBudgetError(f"grid search limited to {GRID_DIM_LIMIT} phase dimensions, "
                              f"model has {model.total_elements}")
    if points_per_dim < 8:
        raise GridBudgetError(f"points_per_dim must be >= 8, got {points_per_dim}")


def _grid_phases(model, flat_index, points_per_dim):
    dim = model.total_elements
    digits = []
    for _ in range(dim):
        flat_index, r = divmod(flat_index, points_per_dim)
        digits.append(r)
    values = [TWO_PI * d / points_per_dim for d in reversed(digits)]
    return PhaseShifts.from_flat(model, values)


def grid_search(model: SystemModel, q: OutageQuery, points_per_dim: int,
                ctl: SeriesControl = DEFAULT_CONTROL):
    """Exhaustively minimize the outage probability over a uniform phase grid.

    Every grid point's outage probability is evaluated (not just its LoS
    power), so this checks the closed-form optimum end to end. Ties go to the
    lowest lexicographic grid index. Returns ``(phases, p_o)``.
    """
    check(model)
    _check_budget(model, points_per_dim)
    if model.total_elements == 0:
        ph = PhaseShifts(())
        return ph, outage_probability(model, ph, q, ctl)
    gn = g_nlos(model)
    c = q.threshold
    best_val, best_idx = math.inf, 0
    for start, gl in _grid_chunks(model, points_per_dim):
        p = f_series_many(gl, gn, c, ctl)
        i = int(np.argmin(p))
        if p[i] < best_val:
            best_val, best_idx = float(p[i]), start + i
    return _grid_phases(model, best_idx, points_per_dim), best_val


def grid_max_g_los(model: SystemModel, points_per_dim: int) -> float:
    """Largest LoS power found on the uniform phase grid."""
    check(model)
    _check_budget(model, points_per_dim)
    return max(float(np.max(gl)) for _, gl in _grid_chunks(model, points_per_dim))

