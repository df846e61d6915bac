"""Energy quadrature, finite differences and phase unwrapping."""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, NumericalError

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EnergyQuadrature:
    """Gauss-Legendre nodes and weights on an energy window ``(E_min, E_max)``."""

    nodes: np.ndarray
    weights: np.ndarray
    window: tuple

    def __post_init__(self):
        e_min, e_max = self.window
        if not (0.0 < e_min < e_max):
            raise DomainError(f"invalid energy window {self.window}")
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise DomainError("nodes and weights must be 1-d arrays of equal length")
        if np.any(nodes <= e_min) or np.any(nodes >= e_max):
            raise DomainError("quadrature nodes must lie strictly inside the window")
        if np.any(weights <= 0):
            raise DomainError("quadrature weights must be positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.nodes)


def gauss_legendre(n, window):
    """Build an ``n``-point Gauss-Legendre rule on ``window``.

    Exact for polynomials of degree ``2n - 1``.
    """
    n = int(n)
    if n < 2:
        raise DomainError("need at least two quadrature nodes")
    e_min, e_max = float(window[0]), float(window[1])
    if not (e_max > e_min) or e_min <= 0.0:
        raise DomainError(f"invalid energy window ({e_min}, {e_max})")
    s, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (e_max - e_min)
    mid = 0.5 * (e_max + e_min)
    return EnergyQuadrature(mid + half * s, half * w, (e_min, e_max))


def integrate(q, f):
    """Return ``sum_i w_i f(E_i)`` for a callable or for values sampled on the nodes."""
    if callable(f):
        try:
            values = np.asarray(f(q.nodes), dtype=complex)
        except (TypeError, ValueError):
            values = None
        if values is None or values.shape != q.nodes.shape:
            values = np.array([complex(f(e)) for e in q.nodes])
    else:
        values = np.asarray(f, dtype=complex)
        if values.shape[0] != len(q):
            raise DomainError("sampled values do not match the quadrature nodes")
    bad = ~np.isfinite(values)
    if values.ndim > 1:
        bad = bad.any(axis=tuple(range(1, values.ndim)))
    if np.any(bad):
        node = float(q.nodes[np.argmax(bad)])
        raise NumericalError(f"integrand is not finite at E = {node!r}")
    return np.tensordot(q.weights, values, axes=(0, 0))


def _check_step(E, h):
    if h <= 1e3 * EPS * abs(E):
        raise DomainError(f"step h={h!r} underflows relative to E={E!r}")
    if E - h <= 0.0:
        raise DomainError("central difference stencil reaches E <= 0")


def richardson(f_minus, f_minus_half, f_plus_half, f_plus, h):
    """Richardson-extrapolated central difference from stencil values at
    ``E - h, E - h/2, E + h/2, E + h``."""
    coarse = (f_plus - f_minus) / (2.0 * h)
    fine = (f_plus_half - f_minus_half) / h
    return (4.0 * fine - coarse) / 3.0


def central_derivative(f, E, h=None):
    """Derivative of ``f`` at ``E`` by central differences with one Richardson step.

    The default step is ``1e-4 * E``.
    """
    E = float(E)
    h = 1e-4 * E if h is None else float(h)
    _check_step(E, h)
    vals = [complex(np.asarray(f(E + s * h)).reshape(())) for s in (-1.0, -0.5, 0.5, 1.0)]
    out = richardson(*vals, h)
    if not np.isfinite(out):
        raise NumericalError(f"non-finite derivative at E = {E!r}")
    return out


def unwrap_phase(values):
    """Continuous phase of complex samples taken on increasing energies."""
    values = np.asarray(values, dtype=complex)
    if np.any(values == 0):
        idx = int(np.argmax(values == 0))
        raise DomainError(f"amplitude is zero at sample {idx}; phase undefined")
    return np.unwrap(np.angle(values))
