"""High-SNR behaviour of the optimal outage probability."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

from .analytic import (DEFAULT_CONTROL, AccuracyError, DomainError, SeriesControl,
                       g_nlos, log_f_series)
from .model import OutageQuery, SystemModel, check
from .optimizer import g_los_star

# exact values below this are treated as underflowed
_UNDERFLOW = 1e-300


@dataclass(frozen=True)
class AsymptoteResult:
    """High-SNR asymptote of the optimal outage probability.

    ``p_tilde`` is reported unclamped; ``above_one`` marks SNRs where the
    asymptote exceeds 1 and is clearly outside its regime. ``ratio_to_exact``
    is ``None`` when the exact value underflows or fails to converge.
    """

    p_tilde: float
    log_p_tilde: float
    ratio_to_exact: Optional[float]
    above_one: bool


def asymptotic_outage(model: SystemModel, q: OutageQuery,
                      ctl: SeriesControl = DEFAULT_CONTROL) -> AsymptoteResult:
    """``(2^R - 1) / (g_nlos SNR) * exp(-g_los_star / g_nlos)``."""
    check(model)
    if q.rate <= 0:
        raise DomainError("asymptote needs rate > 0 (it is identically 0 at R = 0)")
    gn = g_nlos(model)
    gs = g_los_star(model)
    c = q.threshold
    log_p = math.log(c / gn) - gs / gn
    p = c / gn * math.exp(-gs / gn)

    ratio = None
    try:
        log_exact = log_f_series(gs, gn, c, ctl)
    except AccuracyError:
        log_exact = None
    if log_exact is not None and log_exact > math.log(_UNDERFLOW):
        ratio = math.exp(log_exact - log_p)
    return AsymptoteResult(p, log_p, ratio, p > 1.0)


def _bump_kappa(model: SystemModel, target: Union[str, int], delta: float) -> SystemModel:
    if target == "sd":
        d = model.direct
        return replace(model, direct=replace(d, kappa_sd=d.kappa_sd + delta))
    if isinstance(target, bool) or not isinstance(target, int) or not 0 <= target < model.K:
        raise IndexError(f"kappa target must be 'sd' or an IRS index in [0, {model.K}), "
                         f"got {target!r}")
    irss = list(model.irss)
    irss[target] = replace(irss[target], kappa_rd=irss[target].kappa_rd + delta)
    return model.with_irss(irss)


def kappa_sensitivity(model: SystemModel, q: OutageQuery, target: Union[str, int],
                      delta: float):
    """Asymptote before and after raising one Rician factor by ``delta``.

    ``target`` is ``"sd"`` for the direct link or an IRS index.
    """
    if not (math.isfinite(delta) and delta >= 0):
        raise DomainError(f"delta must be finite and >= 0, got {delta}")
    bumped = _bump_kappa(model, target, delta)
    before = asymptotic_outage(model, q).p_tilde
    after = asymptotic_outage(bumped, q).p_tilde
    return before, after
