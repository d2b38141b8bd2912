"""Closed-form outage probability of the multi-IRS link.

``|h|^2 / g_nlos`` is non-central chi-squared with two degrees of freedom, so the
outage probability is the Poisson mixture

    f(a, b, c) = sum_i Pois(i; a/b) * P(i + 1, c/b)

with ``P`` the regularized lower incomplete gamma function. The sum is
evaluated in the log domain over an index window that grows outward from the
Poisson mode until rigorous head and tail bounds fall below the requested
relative tolerance.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .model import PhaseShifts, OutageQuery, SystemModel, check

log = logging.getLogger(__name__)

_LOG_TINY = math.log(1e-17)


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class AccuracyError(ArithmeticError):
    """The series did not reach the requested tolerance within ``max_terms``."""

    def __init__(self, msg, partial_sum, bound):
        super().__init__(f"{msg} (partial sum {partial_sum!r}, remaining bound {bound!r})")
        self.partial_sum = partial_sum
        self.bound = bound


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-12
    max_terms: int = 10_000

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-6:
            raise DomainError(f"rel_tol must lie in (0, 1e-6], got {self.rel_tol}")
        if self.max_terms < 64:
            raise DomainError(f"max_terms must be >= 64, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class ChannelMoments:
    g_los: float
    g_nlos: float


# --- regularized incomplete gamma at integer order ----------------------------

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_HALF = -math.log(2.0)


def _stirlerr(n):
    """log(n!) - log(sqrt(2 pi n) (n/e)^n) for n >= 1."""
    n = np.asarray(n, dtype=float)
    small = n <= 15
    ns = np.where(small, n, 1.0)
    direct = gammaln(ns + 1.0) - (ns + 0.5) * np.log(ns) + ns - _HALF_LOG_2PI
    nl = np.where(small, 16.0, n)
    r2 = 1.0 / (nl * nl)
    series = (1.0 / 12 - r2 * (1.0 / 360 - r2 * (1.0 / 1260 - r2 * (1.0 / 1680
              - r2 / 1188)))) / nl
    return np.where(small, direct, series)


def _log_pois(mean, idx):
    """log Poisson(mean) pmf at integer array ``idx``; mean > 0.

    Saddle-point form ``-log sqrt(2 pi k) - stirlerr(k) - mean * h(k/mean - 1)``
    with ``h(d) = (1 + d) log1p(d) - d``; unlike the direct
    ``-mean + k log(mean) - log k!`` it keeps full accuracy near the mode when
    ``mean`` is large.
    """
    k = np.asarray(idx, dtype=float)
    # far from the mode the direct form is as accurate and cannot overflow
    near = (k > 0.1 * mean) & (k < 10.0 * mean)
    kp = np.where(near, k, mean)
    d = kp / mean - 1.0
    dev = mean * ((1.0 + d) * np.log1p(d) - d)
    saddle = -0.5 * np.log(kp) - _HALF_LOG_2PI - _stirlerr(kp) - dev
    direct = -mean + k * math.log(mean) - gammaln(k + 1.0)
    return np.where(near, saddle, direct)


def log_gamma_p(x: float, lo: int, hi: int) -> np.ndarray:
    """log P(i + 1, x) for i = lo..hi, with P the regularized lower incomplete gamma.

    Uses ``P(i+1, x) = Pr[Pois(x) > i]``. For ``i + 1 <= x`` the value is at
    least about 1/2 and the forward recurrence ``P_{i+1} = P_i - t_{i+1}`` (done
    as ``1 - cumsum``) is accurate. Above that the forward recurrence cancels
    catastrophically, so the upper indices run the backward recurrence
    ``P_i = P_{i+1} + t_{i+1}`` as a reversed log-cumulative sum.
    """
    if x <= 0:
        raise DomainError("x must be > 0")
    idx = np.arange(lo, hi + 1)
    out = np.empty(idx.size)
    split = int(np.searchsorted(idx, x - 1.0, side="right"))  # idx[:split] has i + 1 <= x

    if split:
        i_top = int(idx[split - 1])
        # Poisson(x) mass below j0 is < e^-800: treat as exactly zero
        j0 = max(0, int(x - 40.0 * math.sqrt(x) - 50.0))
        if i_top >= j0:
            j = np.arange(j0, i_top + 1)
            q = np.cumsum(np.exp(_log_pois(x, j)))
            low = idx[:split]
            qi = np.where(low >= j0, q[np.clip(low - j0, 0, None)], 0.0)
            out[:split] = np.log1p(-qi)
        else:
            out[:split] = 0.0

    if split < idx.size:
        first = int(idx[split])
        top = int(idx[-1])
        ext = 64
        while True:
            J = max(top + 1, int(math.ceil(x))) + ext
            r = x / (J + 1.0)
            # remainder beyond J is at most t_J * r / (1 - r)
            log_tJ, log_top = _log_pois(x, np.array([J, top + 1.0]))
            if r == 0 or (r < 1 and log_tJ + math.log(r / (1 - r)) < log_top + _LOG_TINY):
                break
            ext *= 2
        j = np.arange(first + 1, J + 1)
        lt = _log_pois(x, j)
        tail = np.logaddexp.accumulate(lt[::-1])[::-1]
        out[split:] = tail[idx[split:] - first]
    return out


def log_gamma_q(x: float, lo: int, hi: int, log_p=None) -> np.ndarray:
    """log Q(i + 1, x) = log(1 - P(i + 1, x)) = log Pr[Pois(x) <= i] for i = lo..hi.

    Below the mode the lower Poisson sum is accumulated directly; above it
    ``log1p(-P)`` is accurate since ``P`` is at most about 1/2 there.
    ``log_p`` may pass in :func:`log_gamma_p` values for the same range.
    """
    if log_p is None:
        log_p = log_gamma_p(x, lo, hi)
    idx = np.arange(lo, hi + 1)
    out = np.empty(idx.size)
    split = int(np.searchsorted(idx, x - 1.0, side="right"))
    if split:
        i_top = int(idx[split - 1])
        j0 = max(0, int(x - 40.0 * math.sqrt(x) - 50.0))
        low = idx[:split]
        out[:split] = -math.inf
        if i_top >= j0:
            acc = np.logaddexp.accumulate(_log_pois(x, np.arange(j0, i_top + 1)))
            keep = low >= j0
            out[:split][keep] = acc[low[keep] - j0]
    if split < idx.size:
        out[split:] = np.log(-np.expm1(log_p[split:]))
    return out


# --- the series f(a, b, c) ----------------------------------------------------

def _log_sum(v):
    m = float(np.max(v))
    if m == -math.inf:
        return m
    return m + math.log(float(np.sum(np.exp(v - m))))


def _check_args(a, b, c):
    if not (math.isfinite(b) and b > 0):
        raise DomainError(f"b must be finite and > 0, got {b}")
    if not (math.isfinite(a) and a >= 0):
        raise DomainError(f"a must be finite and >= 0, got {a}")
    if not (c >= 0) or math.isnan(c):
        raise DomainError(f"c must be >= 0, got {c}")


def _log_gamma(x, lo, hi, upper):
    lp = log_gamma_p(x, lo, hi)
    return log_gamma_q(x, lo, hi, lp) if upper else lp


def _peak(lam, x, lo, hi, upper):
    """Index in ``[lo, hi]`` maximizing ``pois(i; lam) * P(i + 1, x)`` (or ``Q``).

    Poisson pmfs and their tail sums are log-concave in ``i``, so the summand
    is unimodal and an integer ternary search finds the peak.
    """
    def val(i):
        return float(_log_pois(lam, np.array([float(i)]))[0] + _log_gamma(x, i, i, upper)[0])

    while hi - lo > 2:
        m1 = lo + (hi - lo) // 3
        m2 = hi - (hi - lo) // 3
        if val(m1) <= val(m2):
            lo = m1 + 1
        else:
            hi = m2
    return max(range(lo, hi + 1), key=val)


def _log_pois_below(lam, lo):
    """Upper bound on log Pr[Pois(lam) < lo]."""
    if lo == 0:
        return -math.inf
    if lo - 1.0 >= lam:
        return 0.0
    return float(_log_pois(lam, np.array([lo - 1.0]))[0]) - math.log1p(-(lo - 1.0) / lam)


def _log_pois_above(lam, hi):
    """Upper bound on log Pr[Pois(lam) > hi]."""
    if hi + 2.0 <= lam:
        return 0.0
    return min(0.0, float(_log_pois(lam, np.array([hi + 1.0]))[0])
               - math.log1p(-lam / (hi + 2.0)))


def _window(lam, x, ctl, upper=False):
    """Sum ``pois(i; lam) * P(i + 1, x)`` over a window around the summand's peak.

    With ``upper`` the factor is ``Q = 1 - P`` instead, giving ``1 - f``.
    The window grows until bounds on the omitted head and tail are below
    ``rel_tol`` times the sum. Returns ``(log_sum, lo, hi, logG)`` with
    ``logG`` the gamma factors on ``lo..hi``.
    """
    fl = int(math.floor(lam))
    if upper:
        i0 = _peak(lam, x, fl, max(fl, int(math.ceil(x))), True)
    else:
        i0 = fl if x >= lam else _peak(lam, x, 0, fl, False)
    w = int(math.ceil(8.0 * math.sqrt(max(i0, 1)))) + 16
    log_g0 = math.log(-math.expm1(-x))
    log_tol = math.log(ctl.rel_tol)
    while True:
        lo = max(0, i0 - w)
        hi = i0 + w
        last = hi - lo + 1 >= ctl.max_terms
        if last:
            hi = lo + ctl.max_terms - 1
        idx = np.arange(lo, hi + 1)
        logG = _log_gamma(x, lo, hi, upper)
        log_s = _log_sum(_log_pois(lam, idx) + logG)

        # P decreases in i (bounded by P_0) and Q increases (bounded by 1)
        if upper:
            head = _log_pois_below(lam, lo) + float(logG[0])
            tail = _log_pois_above(lam, hi)
        else:
            head = _log_pois_below(lam, lo) + log_g0
            tail = _log_pois_above(lam, hi) + float(logG[-1])
        if max(head, tail) <= log_s + log_tol:
            return log_s, lo, hi, logG
        if last:
            bound = math.exp(min(max(head, tail), 700.0))
            raise AccuracyError(f"series not converged in {ctl.max_terms} terms",
                                math.exp(min(log_s, 700.0)), bound)
        w *= 2


def log_f_series(a: float, b: float, c: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Natural log of :func:`f_series`, usable where the value underflows."""
    _check_args(a, b, c)
    if c == 0:
        return -math.inf
    lam, x = a / b, c / b
    if x == 0:  # c / b underflowed
        return -math.inf
    if x == math.inf:
        return 0.0
    if lam == 0:
        return math.log(-math.expm1(-x))
    log_s = _window(lam, x, ctl)[0]
    if log_s > _LOG_HALF:
        # near 1 the direct sum keeps only absolute accuracy; the complement
        # is small and is summed to relative accuracy
        try:
            comp = _window(lam, x, ctl, upper=True)[0]
        except AccuracyError:
            return log_s
        if comp < 0:
            return math.log1p(-math.exp(comp))
    return log_s


def f_series(a: float, b: float, c: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Outage series ``e^{-a/b} sum_i (a/b)^i / i! * gamma(1+i, c/b) / Gamma(1+i)``.

    Equivalently ``1 - Q_1(sqrt(2a/b), sqrt(2c/b))`` with ``Q_1`` the first-order
    Marcum Q function. Result is clamped to [0, 1].
    """
    value = math.exp(log_f_series(a, b, c, ctl))
    if value > 1.0:
        if value - 1.0 > ctl.rel_tol:
            log.warning("f_series clamped from %r to 1", value)
        value = 1.0
    return value


def f_series_many(a, b: float, c: float, ctl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
    """Vectorized :func:`f_series` over an array ``a`` with shared ``b`` and ``c``.

    The incomplete-gamma factors depend only on (b, c), so they are computed
    once and the Poisson mixture is evaluated with Horner's rule in the scaled
    variable ``a / (b * s)``. Falls back to scalar evaluation when the mixture
    is too wide for that scaling.
    """
    a = np.asarray(a, dtype=float)
    _check_args(float(np.min(a, initial=0.0)), b, c)
    if a.size and not np.all(np.isfinite(a)):
        raise DomainError("a must be finite")
    if c == 0 or a.size == 0:
        return np.zeros_like(a)
    x = c / b
    if x == 0:
        return np.zeros_like(a)
    lam = a / b
    s = float(np.max(lam))
    if s == 0:
        return np.full_like(a, -math.expm1(-x))
    if s > 600:
        return np.vectorize(lambda v: f_series(v, b, c, ctl), otypes=[float])(a)

    hi = _window(s, x, ctl)[2]
    log_tol = math.log(ctl.rel_tol)
    while True:
        idx = np.arange(0, hi + 1, dtype=float)
        logG = log_gamma_p(x, 0, hi)
        # log(s^i / i!) up to the constant s, absorbed by the shift
        logd = logG + _log_pois(s, idx)
        shift = float(np.max(logd))
        d = np.exp(logd - shift)
        u = lam / s
        poly = np.full_like(lam, d[-1])
        for coef in d[-2::-1]:
            poly *= u
            poly += coef
        out = np.exp(shift + s - lam) * poly
        # per-element tail bound G_hi * Pr[Pois(lam) > hi]
        with np.errstate(divide="ignore", invalid="ignore"):
            geo = (-lam + (hi + 1) * np.log(lam) - math.lgamma(hi + 2.0)
                   - np.log1p(-lam / (hi + 2.0)))
            tail = np.where(hi + 2 > lam, np.minimum(geo, 0.0), 0.0) + logG[-1]
            ok = np.all((lam == 0) | (tail <= np.log(out) + log_tol))
        if ok:
            return np.clip(out, 0.0, 1.0)
        if np.any(out == 0):
            # underflowed entries: the tail test is meaningless there
            return np.vectorize(lambda v: f_series(v, b, c, ctl), otypes=[float])(a)
        if hi + 1 >= ctl.max_terms:
            raise AccuracyError("vectorized series not converged", float(np.min(out)),
                                float(np.exp(np.max(tail))))
        hi = min(2 * hi, ctl.max_terms - 1)


# --- channel power aggregates ---------------------------------------------------

def _rician_los(alpha, kappa):
    return math.sqrt(alpha * kappa / (kappa + 1.0))


def reflected_los_terms(model: SystemModel):
    """Per-element amplitude and LoS phase (rd + sr) of the reflected LoS terms.

    Returns two flat arrays in IRS-then-element order.
    """
    amps, phis = [], []
    for irs in model.irss:
        amp = _rician_los(irs.path_gain, irs.kappa_rd)
        amps.extend([amp] * irs.n_elements)
        phis.extend(r + s for r, s in zip(irs.los_phases_rd, irs.los_phases_sr))
    return np.asarray(amps, dtype=float), np.asarray(phis, dtype=float)


def direct_los(model: SystemModel) -> complex:
    d = model.direct
    return _rician_los(d.alpha_sd, d.kappa_sd) * complex(math.cos(d.los_phase_sd),
                                                         math.sin(d.los_phase_sd))


def g_los(model: SystemModel, phases: PhaseShifts) -> float:
    """Power of the LoS part of the equivalent channel for phases ``phases``."""
    check(model, phases)
    amps, phis = reflected_los_terms(model)
    theta = np.asarray(phases.flat(), dtype=float)
    total = direct_los(model) + np.sum(amps * np.exp(1j * (phis + theta)))
    return float(total.real ** 2 + total.imag ** 2)


def g_nlos(model: SystemModel) -> float:
    """Power of the NLoS (scattered) part of the equivalent channel."""
    check(model)
    d = model.direct
    total = d.alpha_sd / (d.kappa_sd + 1.0)
    for irs in model.irss:
        total += irs.n_elements * irs.path_gain / (irs.kappa_rd + 1.0)
    return total


def channel_moments(model: SystemModel, phases: PhaseShifts) -> ChannelMoments:
    return ChannelMoments(g_los(model, phases), g_nlos(model))


def outage_probability(model: SystemModel, phases: PhaseShifts, q: OutageQuery,
                       ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Outage probability Pr[log2(1 + SNR |h|^2) < R] at fixed phases."""
    m = channel_moments(model, phases)
    return f_series(m.g_los, m.g_nlos, q.threshold, ctl)
