"""TOML run configuration: parsing with field-path errors and canonical dumping.

Schema (``schema_version = 1``)::

    schema_version = 1
    preset = "fig2"            # optional base scenario; keys below override it
    rate = 4.0                 # bit/s/Hz
    snr_db = 15.0

    [direct]
    alpha_sd = 0.8
    kappa_sd = 2.0
    los_phase_sd = 0.0         # radians, default 0

    [[irs]]                    # repeat once per IRS; omit for K = 0
    n_elements = 2
    alpha_sr = 1.0
    alpha_rd = 0.6
    kappa_rd = 10.0
    los_phases_sr = [0.0, 0.0] # radians, default all 0
    los_phases_rd = [0.0, 0.0]

    theta = [[0.0, 0.0], [0.0, 0.0]]   # optional phases for single runs

    [series]
    rel_tol = 1e-12
    max_terms = 10000

    [montecarlo]
    samples = 1000000
    seed = 1

    [sweep]                    # optional
    axis = "snr_db"            # snr_db | K | N_uniform | kappa_rd_uniform | theta_single
    values = [0.0, 5.0, 10.0]
    outputs = ["analytic", "montecarlo"]   # analytic | optimal | asymptotic | montecarlo
    phases = "zero"            # "zero", "optimal", or an explicit ragged list
    element = [0, 1]           # theta_single only
    [sweep.template]           # K only; same keys as an [[irs]] entry
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

try:
    import tomllib
except ImportError:  # python < 3.11
    import tomli as tomllib

from .analytic import SeriesControl
from .model import (PRESET_NAMES, DirectLink, IrsSpec, OutageQuery, PhaseShifts,
                    SweepPlan, SystemModel, ValidationError, preset, validate)

SCHEMA_VERSION = 1
DEFAULT_SAMPLES = 1_000_000
DEFAULT_SEED = 1

AXES = ("snr_db", "K", "N_uniform", "kappa_rd_uniform", "theta_single")
OUTPUTS = ("analytic", "optimal", "asymptotic", "montecarlo")


class ConfigError(ValueError):
    """Malformed configuration document; message names the line or field path."""


@dataclass(frozen=True)
class RunConfig:
    model: SystemModel
    query: OutageQuery
    ctl: SeriesControl = SeriesControl()
    theta: Optional[PhaseShifts] = None
    sweep: Optional[SweepPlan] = None
    mc_samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    preset_name: Optional[str] = field(default=None, compare=False)


def _num(tbl, key, path, default=None, kind=float):
    if key not in tbl:
        if default is None:
            raise ConfigError(f"{path}{key}: missing required field")
        return default
    v = tbl[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}{key}: expected a number, got {v!r}")
    if kind is int:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(f"{path}{key}: expected an integer, got {v!r}")
        return int(v)
    return float(v)


def _num_list(tbl, key, path):
    if key not in tbl:
        return None
    v = tbl[key]
    if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, (int, float))
                                      for x in v):
        raise ConfigError(f"{path}{key}: expected a list of numbers")
    return [float(x) for x in v]


def _table(doc, key, path=""):
    v = doc.get(key, {})
    if not isinstance(v, dict):
        raise ConfigError(f"{path}{key}: expected a table")
    return v


def _irs(tbl, path) -> IrsSpec:
    if not isinstance(tbl, dict):
        raise ConfigError(f"{path}: expected a table")
    return IrsSpec(
        n_elements=_num(tbl, "n_elements", path + ".", kind=int),
        alpha_sr=_num(tbl, "alpha_sr", path + "."),
        alpha_rd=_num(tbl, "alpha_rd", path + "."),
        kappa_rd=_num(tbl, "kappa_rd", path + "."),
        los_phases_sr=_num_list(tbl, "los_phases_sr", path + "."),
        los_phases_rd=_num_list(tbl, "los_phases_rd", path + "."),
    )


def _ragged(v, path):
    if not isinstance(v, list) or not all(isinstance(r, list) for r in v):
        raise ConfigError(f"{path}: expected a list of per-IRS phase lists")
    try:
        return PhaseShifts(tuple(tuple(float(x) for x in r) for r in v))
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: phases must be numbers") from None


def _sweep(tbl, base: Optional[SweepPlan]) -> SweepPlan:
    axis = tbl.get("axis", base.axis if base else None)
    if axis not in AXES:
        raise ConfigError(f"sweep.axis: expected one of {', '.join(AXES)}, got {axis!r}")
    values = _num_list(tbl, "values", "sweep.")
    if values is None:
        if base is None or base.axis != axis:
            raise ConfigError("sweep.values: missing required field")
        values = list(base.values)
    if axis in ("K", "N_uniform"):
        if any(not float(v).is_integer() for v in values):
            raise ConfigError(f"sweep.values: axis {axis} needs integer values")
        values = [int(v) for v in values]
    outputs = tbl.get("outputs", list(base.outputs) if base else None)
    if not isinstance(outputs, list) or any(o not in OUTPUTS for o in outputs):
        raise ConfigError(f"sweep.outputs: expected a list drawn from {', '.join(OUTPUTS)}")
    template = base.template if base else None
    if "template" in tbl:
        template = _irs(tbl["template"], "sweep.template")
    element = base.element if base else None
    if "element" in tbl:
        el = tbl["element"]
        if (not isinstance(el, list) or len(el) != 2
                or any(isinstance(i, bool) or not isinstance(i, int) for i in el)):
            raise ConfigError("sweep.element: expected [k, n]")
        element = tuple(el)
    phases = tbl.get("phases", base.phases if base else "zero")
    if isinstance(phases, list):
        phases = _ragged(phases, "sweep.phases").theta
    elif phases not in ("zero", "optimal"):
        raise ConfigError("sweep.phases: expected 'zero', 'optimal' or a ragged list")
    return SweepPlan(axis, tuple(values), tuple(outputs), template, element, phases)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML run configuration.

    Raises :class:`ConfigError` for malformed documents and
    :class:`ValidationError` when the described model breaks an invariant.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"parse error: {e}") from None

    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported version {version!r}")

    base = None
    name = doc.get("preset")
    if name is not None:
        if name not in PRESET_NAMES:
            raise ConfigError(f"preset: unknown preset {name!r}; valid presets: "
                              f"{', '.join(PRESET_NAMES)}")
        base = preset(name)

    if "direct" in doc:
        d = _table(doc, "direct")
        direct = DirectLink(_num(d, "alpha_sd", "direct."), _num(d, "kappa_sd", "direct."),
                            _num(d, "los_phase_sd", "direct.", default=0.0))
    elif base is not None:
        direct = base.model.direct
    else:
        raise ConfigError("direct: missing required table")
    if "irs" in doc:
        if not isinstance(doc["irs"], list):
            raise ConfigError("irs: expected an array of tables ([[irs]])")
        irss = tuple(_irs(t, f"irs[{k}]") for k, t in enumerate(doc["irs"]))
    else:
        irss = base.model.irss if base is not None and "direct" not in doc else ()
    model = SystemModel(direct, irss)
    errs = validate(model)
    if errs:
        raise ValidationError(errs)

    rate = _num(doc, "rate", "", default=base.query.rate if base else None)
    snr_db = _num(doc, "snr_db", "", default=base.query.snr_db if base else None)
    if base is not None and "snr_db" not in doc:
        query = OutageQuery(rate, base.query.snr)
    else:
        query = OutageQuery.from_db(rate, snr_db)

    s = _table(doc, "series")
    try:
        ctl = SeriesControl(_num(s, "rel_tol", "series.", default=1e-12),
                            _num(s, "max_terms", "series.", default=10_000, kind=int))
    except ValueError as e:
        raise ConfigError(f"series: {e}") from None

    mc = _table(doc, "montecarlo")
    samples = _num(mc, "samples", "montecarlo.", default=DEFAULT_SAMPLES, kind=int)
    seed = _num(mc, "seed", "montecarlo.", default=DEFAULT_SEED, kind=int)
    if samples < 1000:
        raise ConfigError("montecarlo.samples: must be >= 1000")
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("montecarlo.seed: must be an unsigned 64-bit integer")

    theta = _ragged(doc["theta"], "theta") if "theta" in doc else None

    sweep = None
    if "sweep" in doc:
        sweep = _sweep(_table(doc, "sweep"), base.sweep if base else None)
    elif base is not None:
        sweep = base.sweep
    return RunConfig(model, query, ctl, theta, sweep, samples, seed, name)


# --- dumping ---------------------------------------------------------------------

def _f(v: float) -> str:
    # repr is the shortest string that round-trips to the same double
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def _flist(vals) -> str:
    return "[" + ", ".join(_f(v) for v in vals) + "]"


def _irs_lines(irs: IrsSpec):
    return [
        f"n_elements = {irs.n_elements}",
        f"alpha_sr = {_f(irs.alpha_sr)}",
        f"alpha_rd = {_f(irs.alpha_rd)}",
        f"kappa_rd = {_f(irs.kappa_rd)}",
        f"los_phases_sr = {_flist(irs.los_phases_sr)}",
        f"los_phases_rd = {_flist(irs.los_phases_rd)}",
    ]


def dump_config(cfg: RunConfig) -> str:
    """Canonical TOML for ``cfg``; :func:`parse_config` restores it bit-exactly."""
    lines = [f"schema_version = {SCHEMA_VERSION}",
             f"rate = {_f(cfg.query.rate)}",
             f"snr_db = {_f(cfg.query.snr_db)}"]
    if cfg.theta is not None:
        lines.append("theta = [" + ", ".join(_flist(r) for r in cfg.theta.theta) + "]")
    d = cfg.model.direct
    lines += ["", "[direct]", f"alpha_sd = {_f(d.alpha_sd)}", f"kappa_sd = {_f(d.kappa_sd)}",
              f"los_phase_sd = {_f(d.los_phase_sd)}"]
    for irs in cfg.model.irss:
        lines += ["", "[[irs]]"] + _irs_lines(irs)
    lines += ["", "[series]", f"rel_tol = {_f(cfg.ctl.rel_tol)}",
              f"max_terms = {cfg.ctl.max_terms}",
              "", "[montecarlo]", f"samples = {cfg.mc_samples}", f"seed = {cfg.seed}"]
    sw = cfg.sweep
    if sw is not None:
        if sw.axis in ("K", "N_uniform"):
            values = "[" + ", ".join(str(int(v)) for v in sw.values) + "]"
        else:
            values = _flist(sw.values)
        lines += ["", "[sweep]", f'axis = "{sw.axis}"', f"values = {values}",
                  "outputs = [" + ", ".join(f'"{o}"' for o in sw.outputs) + "]"]
        if isinstance(sw.phases, str):
            lines.append(f'phases = "{sw.phases}"')
        else:
            lines.append("phases = [" + ", ".join(_flist(r) for r in sw.phases) + "]")
        if sw.element is not None:
            lines.append(f"element = [{sw.element[0]}, {sw.element[1]}]")
        if sw.template is not None:
            lines += ["", "[sweep.template]"] + _irs_lines(sw.template)
    return "\n".join(lines) + "\n"
