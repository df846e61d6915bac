"""Time densities and asymptotic times for wave packets tunneling through 1-D barriers."""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticReport,
    AsymptoticTimeEstimator,
    asymptotic_time,
    imaginary_time,
    phase_time,
    region_time,
)
from .config import ScenarioConfig, parse_config
from .densities import (
    DensityProfile,
    DetectorCoupling,
    TunnelingTimeDensity,
    dwell_density,
    measured_density,
    reflect_density,
    transmission_probability,
    tunnel_density_pair,
)
from .exceptions import ConfigError, DomainError, NumericalError
from .numerics import EnergyQuadrature, central_derivative, gauss_legendre, integrate, unwrap_phase
from .scattering import Amplitudes, PotentialSpec, ScatteringSolution, flux_element, solve, wavenumber_momentum
from .tdse import GridSpec, PropagationResult, auto_grid, dwell_oracle, flux_moments, propagate
from .wavepacket import PacketSpec, SpectralAmplitude, spectral_amplitude, spectral_table

__all__ = [
    "Amplitudes", "AsymptoticReport", "AsymptoticTimeEstimator", "ConfigError",
    "DensityProfile", "DetectorCoupling", "DomainError", "EnergyQuadrature", "GridSpec",
    "NumericalError", "PacketSpec", "PotentialSpec", "PropagationResult", "ScatteringSolution",
    "ScenarioConfig", "SpectralAmplitude", "TunnelingTimeDensity", "asymptotic_time",
    "auto_grid", "central_derivative", "dwell_density", "dwell_oracle", "flux_element",
    "flux_moments", "gauss_legendre", "imaginary_time", "integrate", "measured_density",
    "parse_config", "phase_time", "propagate", "reflect_density", "region_time", "solve",
    "spectral_amplitude", "spectral_table", "transmission_probability", "tunnel_density_pair",
    "unwrap_phase", "wavenumber_momentum",
]
