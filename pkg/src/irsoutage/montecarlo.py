"""Seeded Monte Carlo simulation of the Rician multi-IRS channel.

Samples are generated in fixed-size blocks. Block ``j`` draws from a Philox
stream keyed by ``SeedSequence(seed, spawn_key=(j,))`` and fills an array of
shape ``(block_len, 1 + total_elements, 2)`` in C order, so the draws for
sample ``i`` depend only on ``(seed, i)``. Blocks may be processed by any
number of workers in any order; only integer outage counts are combined.
Normals come from numpy's ziggurat ``standard_normal``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import OutageQuery, PhaseShifts, SystemModel, check

BLOCK_SIZE = 1 << 16
MAX_SEED = (1 << 64) - 1


@dataclass(frozen=True)
class NLoSRealization:
    """Scattered-path draws: direct link and one per IRS element."""

    nlos_sd: complex
    nlos_rd: tuple


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    std_err: float
    n_samples: int
    seed: int
    n_outage: int

    @property
    def rare_event(self) -> bool:
        """No outage observed: the estimate carries no resolution at this depth."""
        return self.n_outage == 0

    def interval(self, z: float = 1.96):
        return max(0.0, self.p_hat - z * self.std_err), min(1.0, self.p_hat + z * self.std_err)


def stream(seed: int, block: int = 0) -> np.random.Generator:
    """Random stream for one block of samples."""
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _cn01(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    z = rng.standard_normal((n, dim, 2))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)


def sample_nlos(model: SystemModel, rng: np.random.Generator) -> NLoSRealization:
    """One CN(0, 1) draw per scattered path."""
    check(model)
    z = _cn01(rng, 1, 1 + model.total_elements)[0]
    rows, i = [], 1
    for n in model.sizes:
        rows.append(tuple(complex(v) for v in z[i:i + n]))
        i += n
    return NLoSRealization(complex(z[0]), tuple(rows))


def _link_coefficients(model: SystemModel, phases: PhaseShifts):
    """LoS mean and NLoS weights of h, one entry per path (direct first).

    h = sum_m (los[m] + nlos_w[m] * n_m) for unit NLoS draws n_m; each entry
    is assembled from its link's Rician split and the reflection factors.
    """
    d = model.direct
    k = d.kappa_sd
    los = [math.sqrt(d.alpha_sd) * math.sqrt(k / (k + 1.0)) * np.exp(1j * d.los_phase_sd)]
    wts = [math.sqrt(d.alpha_sd) * math.sqrt(1.0 / (k + 1.0))]
    for irs, theta in zip(model.irss, phases.theta):
        k = irs.kappa_rd
        los_amp = math.sqrt(irs.alpha_rd) * math.sqrt(k / (k + 1.0))
        nlos_amp = math.sqrt(irs.alpha_rd) * math.sqrt(1.0 / (k + 1.0))
        for ph_rd, ph_sr, th in zip(irs.los_phases_rd, irs.los_phases_sr, theta):
            # reflection e^{j theta} times the LoS-only source->IRS hop
            refl = np.exp(1j * th) * math.sqrt(irs.alpha_sr) * np.exp(1j * ph_sr)
            los.append(los_amp * np.exp(1j * ph_rd) * refl)
            wts.append(nlos_amp * refl)
    return np.asarray(los, dtype=complex), np.asarray(wts, dtype=complex)


def equivalent_channel(model: SystemModel, phases: PhaseShifts, real: NLoSRealization) -> complex:
    """Equivalent channel h: direct link plus every phase-shifted reflected path."""
    check(model, phases)
    if tuple(len(r) for r in real.nlos_rd) != model.sizes:
        raise ValueError("NLoS realization does not match the model's IRS sizes")
    los, wts = _link_coefficients(model, phases)
    draws = np.array([real.nlos_sd] + [v for row in real.nlos_rd for v in row], dtype=complex)
    return complex(np.sum(los + wts * draws))


def capacity(h: complex, q: OutageQuery) -> float:
    """Shannon capacity log2(1 + SNR |h|^2) in bit/s/Hz."""
    return math.log2(1.0 + q.snr * abs(h) ** 2)


def channel_power_samples(model: SystemModel, phases: PhaseShifts, n_samples: int,
                          seed: int, block: int = 0) -> np.ndarray:
    """|h|^2 for the first ``n_samples`` samples of block ``block``."""
    check(model, phases)
    los, wts = _link_coefficients(model, phases)
    z = _cn01(stream(seed, block), n_samples, los.size)
    h = z @ wts + np.sum(los)
    return h.real ** 2 + h.imag ** 2


def estimate_outage(model: SystemModel, phases: PhaseShifts, q: OutageQuery,
                    n_samples: int, seed: int, workers: int = 1) -> McEstimate:
    """Fraction of channel draws with |h|^2 below the outage threshold."""
    if n_samples < 1000:
        raise ValueError(f"n_samples must be >= 1000, got {n_samples}")
    check(model, phases)
    thr = q.threshold
    n_blocks = -(-n_samples // BLOCK_SIZE)

    def count(block):
        size = min(BLOCK_SIZE, n_samples - block * BLOCK_SIZE)
        power = channel_power_samples(model, phases, size, seed, block)
        return int(np.count_nonzero(power < thr))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(count, range(n_blocks)))
    else:
        hits = sum(count(b) for b in range(n_blocks))
    p = hits / n_samples
    return McEstimate(p, math.sqrt(p * (1.0 - p) / n_samples), n_samples, seed, hits)
