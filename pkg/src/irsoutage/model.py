"""Domain types for the multi-IRS link: direct link, IRS panels, phases, queries.

All angles are radians. Phases are wrapped into [0, 2*pi) on construction, so a
stored phase is always the canonical representative of its class. Path losses
and Rician factors are stored verbatim; use :func:`validate` to list what is
wrong with a model instead of relying on constructors to refuse it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

TWO_PI = 2.0 * math.pi

PRESET_NAMES = ("fig2", "fig3a", "fig3b", "fig4")


class ValidationError(ValueError):
    """Raised when a model or phase vector breaks an invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def wrap_phase(p: float) -> float:
    """Return ``p mod 2*pi`` in [0, 2*pi). Non-finite input comes back as nan."""
    r = float(p) % TWO_PI
    # tiny negative inputs round up to exactly 2*pi
    if r >= TWO_PI:
        r = 0.0
    return r


def _wrap_all(values) -> tuple:
    return tuple(wrap_phase(v) for v in values)


@dataclass(frozen=True)
class DirectLink:
    alpha_sd: float
    kappa_sd: float
    los_phase_sd: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha_sd", float(self.alpha_sd))
        object.__setattr__(self, "kappa_sd", float(self.kappa_sd))
        object.__setattr__(self, "los_phase_sd", wrap_phase(self.los_phase_sd))


@dataclass(frozen=True)
class IrsSpec:
    """One IRS panel with ``n_elements`` elements.

    ``los_phases_sr`` / ``los_phases_rd`` default to all-zero LoS phases.
    Path losses are per panel, shared by all its elements.
    """

    n_elements: int
    alpha_sr: float
    alpha_rd: float
    kappa_rd: float
    los_phases_sr: Optional[Sequence[float]] = None
    los_phases_rd: Optional[Sequence[float]] = None

    def __post_init__(self):
        object.__setattr__(self, "n_elements", int(self.n_elements))
        for name in ("alpha_sr", "alpha_rd", "kappa_rd"):
            object.__setattr__(self, name, float(getattr(self, name)))
        n = max(self.n_elements, 0)
        for name in ("los_phases_sr", "los_phases_rd"):
            vals = getattr(self, name)
            vals = (0.0,) * n if vals is None else _wrap_all(vals)
            object.__setattr__(self, name, vals)

    @property
    def path_gain(self) -> float:
        """Overall path loss of the reflected link, alpha_sr * alpha_rd."""
        return self.alpha_sr * self.alpha_rd

    def resized(self, n: int) -> "IrsSpec":
        """Copy with ``n`` elements, LoS phases tiled cyclically from the current ones."""
        def tile(ph):
            if not ph:
                return (0.0,) * n
            return tuple(ph[i % len(ph)] for i in range(n))
        return replace(self, n_elements=n, los_phases_sr=tile(self.los_phases_sr),
                       los_phases_rd=tile(self.los_phases_rd))


@dataclass(frozen=True)
class SystemModel:
    direct: DirectLink
    irss: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "irss", tuple(self.irss))

    @property
    def K(self) -> int:
        return len(self.irss)

    @property
    def sizes(self) -> tuple:
        return tuple(irs.n_elements for irs in self.irss)

    @property
    def total_elements(self) -> int:
        return sum(self.sizes)

    def with_irss(self, irss) -> "SystemModel":
        return replace(self, irss=tuple(irss))


@dataclass(frozen=True)
class PhaseShifts:
    """Ragged phase matrix ``theta[k][n]`` for element n of IRS k."""

    theta: tuple

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(_wrap_all(row) for row in self.theta))

    @classmethod
    def zeros(cls, model: SystemModel) -> "PhaseShifts":
        return cls(tuple((0.0,) * n for n in model.sizes))

    @classmethod
    def from_flat(cls, model: SystemModel, values: Sequence[float]) -> "PhaseShifts":
        values = list(values)
        if len(values) != model.total_elements:
            raise ValidationError([
                f"theta: expected {model.total_elements} phases, got {len(values)}"])
        rows, i = [], 0
        for n in model.sizes:
            rows.append(values[i:i + n])
            i += n
        return cls(tuple(rows))

    def flat(self) -> tuple:
        return tuple(p for row in self.theta for p in row)

    @property
    def shape(self) -> tuple:
        return tuple(len(row) for row in self.theta)


@dataclass(frozen=True)
class OutageQuery:
    """Target rate ``rate`` (bit/s/Hz) and linear transmit SNR ``snr``."""

    rate: float
    snr: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate >= 0):
            raise ValidationError([f"rate: must be finite and >= 0 (got {self.rate})"])
        if not (math.isfinite(self.snr) and self.snr > 0):
            raise ValidationError([f"snr: must be finite and > 0 (got {self.snr})"])

    @classmethod
    def from_db(cls, rate: float, snr_db: float) -> "OutageQuery":
        return cls(float(rate), db_to_linear(snr_db))

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr)

    @property
    def threshold(self) -> float:
        """Outage threshold on |h|^2, (2^R - 1) / SNR."""
        return math.expm1(self.rate * math.log(2.0)) / self.snr


def db_to_linear(db: float) -> float:
    return 10.0 ** (float(db) / 10.0)


def _positive(v) -> bool:
    return math.isfinite(v) and v > 0


def _rician(v) -> bool:
    return math.isfinite(v) and v >= 0


def _bad_phases(values):
    return [i for i, p in enumerate(values) if not (0.0 <= p < TWO_PI)]


def validate(model: SystemModel) -> list:
    """List every invariant violation of ``model`` as ``"field.path: reason"``.

    An empty list means the model is valid.
    """
    out = []
    d = model.direct
    if not _positive(d.alpha_sd):
        out.append(f"direct.alpha_sd: must be > 0 (got {d.alpha_sd})")
    if not _rician(d.kappa_sd):
        out.append(f"direct.kappa_sd: must be finite and >= 0 (got {d.kappa_sd})")
    if not 0.0 <= d.los_phase_sd < TWO_PI:
        out.append(f"direct.los_phase_sd: must lie in [0, 2pi) (got {d.los_phase_sd})")
    for k, irs in enumerate(model.irss):
        where = f"irss[{k}]"
        if irs.n_elements < 1:
            out.append(f"{where}.n_elements: must be >= 1 (got {irs.n_elements})")
        for name in ("alpha_sr", "alpha_rd"):
            v = getattr(irs, name)
            if not _positive(v):
                out.append(f"{where}.{name}: must be > 0 (got {v})")
        if not _rician(irs.kappa_rd):
            out.append(f"{where}.kappa_rd: must be finite and >= 0 (got {irs.kappa_rd})")
        for name in ("los_phases_sr", "los_phases_rd"):
            vals = getattr(irs, name)
            if len(vals) != irs.n_elements:
                out.append(f"{where}.{name}: has {len(vals)} entries, "
                           f"expected n_elements = {irs.n_elements}")
            for i in _bad_phases(vals):
                out.append(f"{where}.{name}[{i}]: must lie in [0, 2pi) (got {vals[i]})")
    return out


def validate_phases(model: SystemModel, phases: PhaseShifts) -> list:
    out = []
    if phases.shape != model.sizes:
        out.append(f"theta: shape {phases.shape} does not match IRS sizes {model.sizes}")
    for k, row in enumerate(phases.theta):
        for n in _bad_phases(row):
            out.append(f"theta[{k}][{n}]: must lie in [0, 2pi) (got {row[n]})")
    return out


def check(model: SystemModel, phases: Optional[PhaseShifts] = None) -> None:
    """Raise :class:`ValidationError` if ``model`` (and ``phases``) are invalid."""
    errs = validate(model)
    if phases is not None and not errs:
        errs = validate_phases(model, phases)
    if errs:
        raise ValidationError(errs)


# --- figure presets -------------------------------------------------------------

@dataclass(frozen=True)
class SweepPlan:
    """What a sweep varies and which outputs it reports.

    ``axis`` is one of snr_db, K, N_uniform, kappa_rd_uniform, theta_single.
    ``template`` is the IRS replicated along a K axis; ``element`` is the
    (k, n) index varied along a theta_single axis. ``phases`` selects the
    phases used by the analytic and Monte Carlo columns: "zero", "optimal",
    or an explicit ragged matrix.
    """

    axis: str
    values: tuple
    outputs: tuple
    template: Optional[IrsSpec] = None
    element: Optional[tuple] = None
    phases: object = "zero"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.element is not None:
            object.__setattr__(self, "element", tuple(int(i) for i in self.element))


class Scenario(NamedTuple):
    model: SystemModel
    query: OutageQuery
    sweep: SweepPlan


def _irs(n, a_sr, a_rd, kappa):
    return IrsSpec(n_elements=n, alpha_sr=a_sr, alpha_rd=a_rd, kappa_rd=kappa)


def preset(name: str) -> Scenario:
    """Parameter sets from the published figure captions.

    LoS phases are all zero; the captions do not give them. Sweep grids are
    a repo convention since the figures' exact axis points are not tabulated.
    """
    if name == "fig2":
        model = SystemModel(DirectLink(0.8, 2.0),
                            (_irs(2, 1.0, 0.6, 10.0), _irs(2, 1.0, 0.1, 15.0)))
        plan = SweepPlan("snr_db", tuple(float(v) for v in range(0, 31, 5)),
                         ("analytic", "montecarlo"))
        return Scenario(model, OutageQuery.from_db(4.0, 15.0), plan)
    if name == "fig3a":
        template = _irs(20, 0.01, 0.01, 10.0)
        model = SystemModel(DirectLink(0.5, 3.0), (template, template))
        plan = SweepPlan("K", tuple(range(0, 9)), ("optimal",), template=template)
        return Scenario(model, OutageQuery.from_db(4.0, 15.0), plan)
    if name == "fig3b":
        model = SystemModel(DirectLink(0.5, 3.0),
                            (_irs(20, 0.01, 0.01, 10.0), _irs(20, 0.05, 0.05, 15.0)))
        plan = SweepPlan("N_uniform", tuple(range(1, 65)), ("optimal",))
        return Scenario(model, OutageQuery.from_db(4.0, 15.0), plan)
    if name == "fig4":
        model = SystemModel(DirectLink(0.5, 3.0),
                            (_irs(8, 0.01, 0.01, 10.0), _irs(8, 0.05, 0.05, 10.0)))
        plan = SweepPlan("snr_db", tuple(float(v) for v in range(20, 55, 5)),
                         ("optimal", "asymptotic"))
        return Scenario(model, OutageQuery.from_db(4.0, 40.0), plan)
    raise KeyError(f"unknown preset {name!r}; valid presets: {', '.join(PRESET_NAMES)}")
