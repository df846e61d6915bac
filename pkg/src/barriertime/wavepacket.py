"""Gaussian incident packets and their energy-representation coefficients."""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .numerics import gauss_legendre
from .scattering import wavenumber_momentum

MIN_PURITY = 8.0  # p0 / sigma_p; keeps the p <= 0 tail below 1e-14


def default_x0(p0, sigma_p, hbar=1.0):
    """Start position six spatial widths (at least 50) left of the origin."""
    return -max(50.0, 6.0 * hbar / (2.0 * sigma_p))


@dataclass(frozen=True)
class PacketSpec:
    """Minimum-uncertainty Gaussian packet centred at ``x0`` with mean momentum ``p0``."""

    p0: float = 1.0
    sigma_p: float = 0.001
    x0: float = None
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.p0 > 0 and self.sigma_p > 0):
            raise DomainError("p0 and sigma_p must be positive")
        if self.mass <= 0 or self.hbar <= 0:
            raise DomainError("mass and hbar must be positive")
        if self.p0 / self.sigma_p < MIN_PURITY:
            raise DomainError(
                f"p0/sigma_p = {self.p0 / self.sigma_p:.3g} < {MIN_PURITY}; "
                "packet would carry negative momenta"
            )
        if self.x0 is None:
            object.__setattr__(self, "x0", default_x0(self.p0, self.sigma_p, self.hbar))
        if not self.x0 < 0:
            raise DomainError("packet must start left of the barrier (x0 < 0)")

    @property
    def E0(self):
        return self.p0 ** 2 / (2.0 * self.mass)

    @property
    def sigma_x(self):
        return self.hbar / (2.0 * self.sigma_p)

    def momentum_amplitude(self, p):
        p = np.asarray(p, dtype=float)
        s = self.sigma_p
        return (
            (2.0 * np.pi * s ** 2) ** -0.25
            * np.exp(-((p - self.p0) ** 2) / (4.0 * s ** 2))
            * np.exp(-1j * p * self.x0 / self.hbar)
        )

    def wavefunction(self, x):
        """Free Gaussian ``<x|Psi>`` at t = 0, consistent with :func:`spectral_amplitude`."""
        x = np.asarray(x, dtype=float)
        sx = self.sigma_x
        d = x - self.x0
        return (2.0 * np.pi * sx ** 2) ** -0.25 * np.exp(
            -(d ** 2) / (4.0 * sx ** 2) + 1j * self.p0 * d / self.hbar
        )


def spectral_amplitude(spec, E):
    """``c_E = <E,+|Psi> = sqrt(M / p_E) phi(p_E)``."""
    p = wavenumber_momentum(E, spec.mass)
    return np.sqrt(spec.mass / p) * spec.momentum_amplitude(p)


def energy_window(spec, width_sigmas=8.0):
    """Energy interval covering ``p0 -/+ width_sigmas * sigma_p``, clipped above zero."""
    lo = spec.p0 - width_sigmas * spec.sigma_p
    hi = spec.p0 + width_sigmas * spec.sigma_p
    e_lo = lo ** 2 / (2.0 * spec.mass) if lo > 0 else 1e-12 * spec.E0
    return (max(e_lo, 1e-12 * spec.E0), hi ** 2 / (2.0 * spec.mass))


def suggest_nodes(spec, reach, width_sigmas=8.0):
    """Gauss-Legendre size that resolves phases ``exp(i p x / hbar)`` for ``|x| <= reach``."""
    dp = 2.0 * width_sigmas * spec.sigma_p
    span = 2.0 * dp * reach / spec.hbar
    return int(max(64, np.ceil(0.35 * span) + 32))


@dataclass(frozen=True)
class SpectralAmplitude:
    """``c_E`` tabulated on the nodes of an energy quadrature."""

    packet: PacketSpec
    quadrature: object
    c: np.ndarray

    @property
    def energies(self):
        return self.quadrature.nodes

    @property
    def weights(self):
        return self.quadrature.weights

    @property
    def density(self):
        return np.abs(self.c) ** 2

    def norm(self):
        return float(np.sum(self.weights * self.density))


def spectral_table(spec, n=64, width_sigmas=8.0, quadrature=None):
    if quadrature is None:
        quadrature = gauss_legendre(n, energy_window(spec, width_sigmas))
    c = spectral_amplitude(spec, quadrature.nodes)
    c.setflags(write=False)
    return SpectralAmplitude(spec, quadrature, c)
