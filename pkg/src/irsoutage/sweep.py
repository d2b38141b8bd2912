"""Parameter sweeps producing one CSV row per axis value."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .analytic import DEFAULT_CONTROL, SeriesControl, outage_probability
from .asymptotic import asymptotic_outage
from .config import AXES, OUTPUTS, RunConfig
from .model import (OutageQuery, PhaseShifts, SweepPlan, SystemModel, ValidationError,
                    check, wrap_phase)
from .montecarlo import estimate_outage
from .optimizer import optimal_outage, optimal_phases

COLUMNS = {
    "analytic": ("p_o",),
    "optimal": ("p_o_star",),
    "asymptotic": ("p_tilde",),
    "montecarlo": ("mc_p_hat", "mc_std_err"),
}


class SweepError(RuntimeError):
    """Evaluation failed at one axis value; ``cause`` holds the original error."""

    def __init__(self, axis, value, cause):
        super().__init__(f"sweep failed at {axis} = {value}: {cause}")
        self.cause = cause


@dataclass(frozen=True)
class SweepSpec:
    model: SystemModel
    query: OutageQuery
    plan: SweepPlan
    mc_samples: int = 1_000_000
    seed: int = 1
    ctl: SeriesControl = DEFAULT_CONTROL

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "SweepSpec":
        if cfg.sweep is None:
            raise ValueError("configuration has no [sweep] table")
        return cls(cfg.model, cfg.query, cfg.sweep, cfg.mc_samples, cfg.seed, cfg.ctl)

    @property
    def columns(self) -> tuple:
        cols = [self.plan.axis]
        for out in OUTPUTS:
            if out in self.plan.outputs:
                cols.extend(COLUMNS[out])
        return tuple(cols)


def check_spec(spec: SweepSpec) -> None:
    plan = spec.plan
    errs = []
    if plan.axis not in AXES:
        errs.append(f"sweep.axis: unknown axis {plan.axis!r}")
    if not plan.outputs:
        errs.append("sweep.outputs: nothing to compute (empty outputs)")
    bad = [o for o in plan.outputs if o not in OUTPUTS]
    if bad:
        errs.append(f"sweep.outputs: unknown outputs {bad}")
    if not plan.values:
        errs.append("sweep.values: must be non-empty")
    elif any(not math.isfinite(v) for v in plan.values):
        errs.append("sweep.values: must be finite")
    elif any(b <= a for a, b in zip(plan.values, plan.values[1:])):
        errs.append("sweep.values: must be strictly increasing")
    if plan.axis == "K" and plan.template is None:
        errs.append("sweep.template: axis K needs a template IRS")
    if plan.axis == "K" and plan.values and min(plan.values) < 0:
        errs.append("sweep.values: K must be >= 0")
    if plan.axis == "N_uniform" and plan.values and min(plan.values) < 1:
        errs.append("sweep.values: N must be >= 1")
    if plan.axis == "kappa_rd_uniform" and plan.values and min(plan.values) < 0:
        errs.append("sweep.values: Rician factors must be >= 0")
    if plan.axis == "theta_single":
        el = plan.element
        if el is None:
            errs.append("sweep.element: axis theta_single needs [k, n]")
        elif not (0 <= el[0] < spec.model.K and 0 <= el[1] < spec.model.sizes[el[0]]):
            errs.append(f"sweep.element: {list(el)} is not an element of the model")
    if errs:
        raise ValidationError(errs)
    check(spec.model)


def _point(spec: SweepSpec, value):
    """Model, query and phases at one axis value."""
    model, q, axis = spec.model, spec.query, spec.plan.axis
    if axis == "snr_db":
        q = OutageQuery.from_db(q.rate, value)
    elif axis == "K":
        model = model.with_irss([spec.plan.template] * int(value))
    elif axis == "N_uniform":
        model = model.with_irss([irs.resized(int(value)) for irs in model.irss])
    elif axis == "kappa_rd_uniform":
        model = model.with_irss([replace(irs, kappa_rd=float(value)) for irs in model.irss])

    ph = spec.plan.phases
    if ph == "zero":
        phases = PhaseShifts.zeros(model)
    elif ph == "optimal":
        phases = optimal_phases(model)
    else:
        phases = PhaseShifts(ph)
    if axis == "theta_single":
        k, n = spec.plan.element
        rows = [list(r) for r in phases.theta]
        rows[k][n] = wrap_phase(value)
        phases = PhaseShifts(tuple(tuple(r) for r in rows))
    check(model, phases)
    return model, q, phases


def _row(spec: SweepSpec, value):
    try:
        model, q, phases = _point(spec, value)
        outs = spec.plan.outputs
        row = {spec.plan.axis: value}
        if "analytic" in outs:
            row["p_o"] = outage_probability(model, phases, q, spec.ctl)
        if "optimal" in outs:
            row["p_o_star"] = optimal_outage(model, q, spec.ctl).p_o_star
        if "asymptotic" in outs:
            row["p_tilde"] = asymptotic_outage(model, q, spec.ctl).p_tilde
        if "montecarlo" in outs:
            est = estimate_outage(model, phases, q, spec.mc_samples, spec.seed)
            row["mc_p_hat"] = est.p_hat
            row["mc_std_err"] = est.std_err
        return row
    except Exception as e:
        raise SweepError(spec.plan.axis, value, e) from e


def run_sweep(spec: SweepSpec, workers: int = 1) -> list:
    """Evaluate every axis value; rows come back in axis order.

    Axis points may run concurrently; every Monte Carlo column uses the same
    seed, so results do not depend on ``workers``.
    """
    check_spec(spec)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda v: _row(spec, v), spec.plan.values))
    return [_row(spec, v) for v in spec.plan.values]


def _cell(v) -> str:
    if isinstance(v, int) and not isinstance(v, bool):
        return str(v)
    return repr(float(v))


def to_csv(spec: SweepSpec, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = spec.columns
    w.writerow(cols)
    for row in rows:
        w.writerow([_cell(row[c]) for c in cols])
    return buf.getvalue()
