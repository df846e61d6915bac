"""Asymptotic tunneling time, phase time and imaginary time."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .densities import _FLAG_EPS, _engine, region_integrals
from .exceptions import DomainError, NumericalError
from .numerics import _check_step, richardson
from .scattering import PotentialSpec, solve
from .wavepacket import PacketSpec, spectral_amplitude, spectral_table, suggest_nodes

_STENCIL = np.array([-1.0, -0.5, 0.5, 1.0])
_OPAQUE = 1e-300


def _t_stencil(pot, E, M, hbar, h=None):
    E = np.atleast_1d(np.asarray(E, dtype=float))
    h = 1e-4 * E if h is None else np.broadcast_to(np.asarray(h, float), E.shape)
    for e, hh in zip(E, h):
        _check_step(e, hh)
    grid = E[None, :] + _STENCIL[:, None] * h[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        t = solve(pot, grid.ravel(), M, hbar).t.reshape(grid.shape)
    if not np.all(np.isfinite(t)) or np.any(np.abs(t) < _OPAQUE):
        raise DomainError("|t(E)| underflows; barrier too opaque for a phase derivative")
    return t, h


def _scalar_or_array(E, out):
    return float(out[0]) if np.ndim(E) == 0 else out


def phase_time(pot, E, M=1.0, hbar=1.0, h=None):
    """``hbar d(arg t)/dE`` from an unwrapped, Richardson-extrapolated stencil.

    The phase is referred to the barrier edges, i.e. taken from
    ``t exp(i k L)``: it is the time spent crossing ``[0, L]`` and saturates
    for opaque barriers.  For ``L = 0`` this is ``arg t`` itself.
    """
    t, h = _t_stencil(pot, E, M, hbar, h)
    phase = np.unwrap(np.angle(t), axis=0)
    flight = M * pot.length / np.sqrt(2.0 * M * np.atleast_1d(np.asarray(E, float)))
    return _scalar_or_array(E, hbar * richardson(*phase, h) + flight)


def imaginary_time(pot, E, M=1.0, hbar=1.0, h=None):
    """``hbar d(ln|t|)/dE``."""
    t, h = _t_stencil(pot, E, M, hbar, h)
    return _scalar_or_array(E, hbar * richardson(*np.log(np.abs(t)), h))


@dataclass(frozen=True)
class AsymptoticReport:
    """Asymptotic times for a packet transmitted to ``x2``.

    ``t_corr_integral`` is the correction integrated over a window that holds
    the barrier but not the initial packet; ``t_corr_full`` is the same
    integral over a region that also holds the packet (it vanishes).
    """

    t_tun: float
    t_corr_integral: float
    t_phase: float
    t_imag: float
    x2: float
    E0: float
    t_corr_full: float = 0.0
    transmission: float = float("nan")
    inverse_velocity: float = float("nan")  # M <1/p> over the transmitted part

    def __post_init__(self):
        vals = (self.t_tun, self.t_corr_integral, self.t_phase, self.t_imag, self.t_corr_full)
        if not np.all(np.isfinite(vals)):
            raise NumericalError(f"non-finite asymptotic time in {self}")


class _Moments:
    """Energy sums behind the asymptotic-time integral, affine in ``x2``."""

    def __init__(self, c, pot):
        pk = c.packet
        E, w, cE = c.energies, c.weights, c.c
        M, hbar = pk.mass, pk.hbar
        p = np.sqrt(2.0 * M * E)
        # derivative of t(E) c_E; the step resolves the fastest local phase
        # (x0 / velocity) and Gaussian slope of c_E
        s = p - pk.p0
        dlog = (M / p) * np.abs(-0.5 / p - s / (2.0 * pk.sigma_p ** 2) - 1j * pk.x0 / hbar)
        h = np.minimum(1e-4 * E, 0.02 / dlog)
        t_st, _ = _t_stencil(pot, E, M, hbar, h)
        c_st = spectral_amplitude(pk, E[None, :] + _STENCIL[:, None] * h[None, :])
        d_prod = richardson(*(t_st * c_st), h)
        d_t = richardson(*t_st, h)
        t = solve(pot, E, M, hbar).t
        if not np.all(np.isfinite(d_prod)):
            raise NumericalError("non-finite derivative of t(E) c_E")
        bra = w * np.conj(cE) * np.conj(t)
        self.N = float(np.sum(w * np.abs(cE * t) ** 2))
        self.slope = float(np.sum(w * np.abs(cE * t) ** 2 * M / p))
        self.I_prod = complex(np.sum(bra * (-1j * hbar) * d_prod))
        self.I_t = complex(np.sum(bra * cE * (-1j * hbar) * d_t))

    def report(self, pot, pk, x2):
        if self.N <= _FLAG_EPS:
            raise DomainError("no tunneling subensemble (<N> = 0)")
        x2 = float(x2)
        if not x2 > pot.length:
            raise DomainError("x2 must lie behind the barrier")
        E0 = pk.E0
        return AsymptoticReport(
            t_tun=(self.slope * x2 + self.I_prod.real) / self.N,
            t_corr_integral=self.I_t.imag / self.N,
            t_phase=phase_time(pot, E0, pk.mass, pk.hbar),
            t_imag=imaginary_time(pot, E0, pk.mass, pk.hbar),
            x2=x2,
            E0=E0,
            t_corr_full=-self.I_prod.imag / self.N,
            transmission=self.N,
            inverse_velocity=self.slope / self.N,
        )


def asymptotic_time(c, pot, x2):
    """Asymptotic tunneling time over a region holding the packet and ``[0, x2]``.

    ``t_tun = Re (1/<N>) int c^* t^* (M x2 / p - i hbar d/dE)(t c) dE``.
    """
    return _Moments(c, pot).report(pot, c.packet, x2)


def region_time(c, pot, x1, x2, X=None, time_ordered=True, panel=2.0):
    """``int_{x1}^{x2} tau_tun dx`` by spatial quadrature of the density.

    With ``time_ordered`` (default) the clock starts with the packet at
    ``x0``, so the result tends to :func:`asymptotic_time` once ``x1`` lies
    below the packet; ``time_ordered=False`` integrates the stationary
    density.
    """
    x1, x2 = float(x1), float(x2)
    if not (x1 < 0.0 <= pot.length < x2):
        raise DomainError("need x1 < 0 <= L < x2")
    eng = _engine(c, pot, X)
    if eng.N <= _FLAG_EPS:
        raise DomainError("no tunneling subensemble (<N> = 0)")
    return region_integrals(eng, x1, x2, time_ordered, 0.0, panel)["tau_tun"]


class AsymptoticTimeEstimator(BaseEstimator):
    """Asymptotic tunneling time as a function of the far edge ``x2``.

    ``fit`` tabulates the packet spectrum; ``predict(x2)`` returns ``t_tun``
    for each ``x2`` and :meth:`report` the full :class:`AsymptoticReport`.
    """

    def __init__(self, potential=None, p0=1.0, sigma_p=0.001, x0=None, mass=1.0,
                 hbar=1.0, n_energy=None, width_sigmas=8.0):
        self.potential = potential
        self.p0 = p0
        self.sigma_p = sigma_p
        self.x0 = x0
        self.mass = mass
        self.hbar = hbar
        self.n_energy = n_energy
        self.width_sigmas = width_sigmas

    def fit(self, X=None, y=None):
        pot = self.potential if self.potential is not None else PotentialSpec.delta(2.0)
        if not isinstance(pot, PotentialSpec):
            raise TypeError("potential must be a PotentialSpec")
        packet = PacketSpec(self.p0, self.sigma_p, self.x0, self.mass, self.hbar)
        n = self.n_energy or suggest_nodes(packet, 2.0 * abs(packet.x0), self.width_sigmas)
        self.potential_ = pot
        self.packet_ = packet
        self.spectrum_ = spectral_table(packet, n, self.width_sigmas)
        self.moments_ = _Moments(self.spectrum_, pot)
        self.transmission_probability_ = self.moments_.N
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "moments_")
        x2 = check_array(X, ensure_2d=False, dtype=float).reshape(-1)
        m = self.moments_
        if m.N <= _FLAG_EPS:
            raise DomainError("no tunneling subensemble (<N> = 0)")
        if np.any(x2 <= self.potential_.length):
            raise DomainError("x2 must lie behind the barrier")
        return (m.slope * x2 + m.I_prod.real) / m.N

    def report(self, x2):
        check_is_fitted(self, "moments_")
        return self.moments_.report(self.potential_, self.packet_, x2)
