"""Measurement harness built on the simulator."""
from .variance import VarianceSeries, spike_variance, theory_prefactor
from .impact import ImpactCurve, ImpactSetup, fit_log, fit_power, impact_experiment
from .kinks import LocalProfile, critical_volume, kink_oracle
from .facts import StylisedFacts, stylised_facts
from .session import SessionSetup, run_session
from .volume import VolumeVolatility, volume_volatility
from .complexity import complexity_estimate
