"""Outage probability analysis and phase optimization for multi-IRS Rician links."""

from .analytic import (AccuracyError, ChannelMoments, DomainError, SeriesControl,
                       channel_moments, f_series, g_los, g_nlos, outage_probability)
from .asymptotic import AsymptoteResult, asymptotic_outage, kappa_sensitivity
from .model import (DirectLink, IrsSpec, OutageQuery, PhaseShifts, SystemModel,
                    ValidationError, preset, validate)
from .montecarlo import McEstimate, estimate_outage
from .optimizer import OptimalSolution, g_los_star, grid_search, optimal_outage, optimal_phases

__version__ = "0.1.0"
