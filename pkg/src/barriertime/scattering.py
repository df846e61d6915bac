"""Stationary scattering states of one-dimensional barriers.

Barriers are either a delta function at ``x = 0`` or piecewise-constant
segments covering ``[0, L]``; the potential vanishes outside.  Interior
solutions are propagated as ``(psi, psi')`` pairs with the entire-function
basis ``cos(k s), sin(k s)/k``, which covers ``E > V``, ``E < V`` (real
exponentials) and the removable point ``E = V`` with one formula.  The state
``|E,+>`` is built from its transmitted side leftwards and ``|E,->`` from the
left rightwards, so opaque segments are always crossed in the growing
direction.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError

KINDS = ("free", "delta", "piecewise")


@dataclass(frozen=True)
class PotentialSpec:
    """Declarative barrier description.

    ``kind='delta'`` places ``strength * delta(x)`` at the origin.
    ``kind='piecewise'`` takes ``segments`` as ``(x_start, x_end, height)``
    triples that tile ``[0, L]`` from the left.
    """

    kind: str = "free"
    strength: float = 0.0
    segments: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown potential kind {self.kind!r}")
        if self.kind == "delta":
            if not np.isfinite(self.strength) or self.strength < 0:
                raise DomainError("delta strength must be finite and >= 0")
        segs = tuple((float(a), float(b), float(v)) for a, b, v in self.segments)
        object.__setattr__(self, "segments", segs)
        if self.kind == "piecewise":
            if not segs:
                raise DomainError("piecewise potential needs at least one segment")
            edge = 0.0
            for a, b, v in segs:
                if a != edge:
                    raise DomainError("segments must be contiguous and start at x = 0")
                if not b > a:
                    raise DomainError(f"empty or reversed segment ({a}, {b})")
                if not np.isfinite(b) or not np.isfinite(v) or v < 0:
                    raise DomainError("segment ends and heights must be finite, heights >= 0")
                edge = b
        elif segs:
            raise DomainError(f"{self.kind} potential takes no segments")

    @classmethod
    def free(cls):
        return cls("free")

    @classmethod
    def delta(cls, strength):
        return cls("delta", strength=float(strength))

    @classmethod
    def piecewise(cls, segments):
        return cls("piecewise", segments=tuple(segments))

    @classmethod
    def rectangle(cls, height, width):
        return cls("piecewise", segments=((0.0, float(width), float(height)),))

    @property
    def length(self):
        """Right edge ``L`` of the support (0 for free and delta barriers)."""
        return self.segments[-1][1] if self.segments else 0.0

    @property
    def boundaries(self):
        return np.array([0.0] + [b for _, b, _ in self.segments])

    @property
    def heights(self):
        return np.array([v for _, _, v in self.segments])

    def __call__(self, x):
        """Potential value at ``x`` (the delta barrier evaluates to zero)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, b, v in self.segments:
            out[(x >= a) & (x < b)] = v
        return out


def wavenumber_momentum(E, M):
    """Momentum ``p_E = sqrt(2 M E)``."""
    E = np.asarray(E, dtype=float)
    if np.any(E <= 0):
        raise DomainError("energy must be positive")
    if M <= 0:
        raise DomainError("mass must be positive")
    p = np.sqrt(2.0 * M * E)
    return float(p) if p.ndim == 0 else p


def _propagator(k, s):
    """Entries of the map ``(psi, psi')(x) -> (psi, psi')(x + s)``.

    ``k`` has shape (nE,), ``s`` shape (nx, 1); results broadcast to (nx, nE).
    """
    ks = k * s
    c = np.cos(ks)
    sk = s * np.sinc(ks / np.pi)  # sin(k s)/k, finite at k = 0
    return c, sk, -(k ** 2) * sk, c


@dataclass(frozen=True)
class Amplitudes:
    """Transmission and reflection amplitudes at energy ``E``."""

    E: np.ndarray
    t: np.ndarray
    r: np.ndarray

    @property
    def transmission(self):
        return np.abs(self.t) ** 2

    @property
    def reflection(self):
        return np.abs(self.r) ** 2


class ScatteringSolution:
    """Scattering states ``<x|E,+>`` and ``<x|E,->`` for one or many energies.

    Built by :func:`solve`.  Wave functions carry the energy normalization
    ``sqrt(M / (2 pi hbar p_E))``.  With an array of energies, evaluators
    return arrays of shape ``(len(x), len(E))``.
    """

    def __init__(self, potential, E, mass, hbar):
        self.potential = potential
        self.mass = float(mass)
        self.hbar = float(hbar)
        self._scalar = np.ndim(E) == 0
        E = np.atleast_1d(np.asarray(E, dtype=float))
        if np.any(E <= 0):
            raise DomainError("scattering energies must be positive")
        if self.mass <= 0 or self.hbar <= 0:
            raise DomainError("mass and hbar must be positive")
        self.E = E
        self.p = np.sqrt(2.0 * self.mass * E)
        self.k = self.p / self.hbar
        self.norm = np.sqrt(self.mass / (2.0 * np.pi * self.hbar * self.p))
        self._build()

    # -- construction -------------------------------------------------
    def _segment_k(self):
        V = self.potential.heights
        k2 = 2.0 * self.mass * (self.E[None, :] - V[:, None]) / self.hbar ** 2
        return np.sqrt(k2.astype(complex))

    def _build(self):
        pot, k = self.potential, self.k.astype(complex)
        ik = 1j * k
        alpha = self.mass * pot.strength / self.hbar ** 2 if pot.kind == "delta" else 0.0

        if pot.kind == "piecewise":
            b = pot.boundaries
            width = np.diff(b)
            kseg = self._segment_k()
            n_b = len(b)
            # '+' state, transmitted side normalised to exp(i k x)
            up = np.empty((n_b, len(k)), complex)
            dup = np.empty_like(up)
            up[-1] = np.exp(ik * b[-1])
            dup[-1] = ik * up[-1]
            for s in range(n_b - 2, -1, -1):
                c11, c12, c21, c22 = _propagator(kseg[s], -width[s])
                up[s] = c11 * up[s + 1] + c12 * dup[s + 1]
                dup[s] = c21 * up[s + 1] + c22 * dup[s + 1]
            u0, du0 = up[0], dup[0]
            # '-' state, transmitted side normalised to exp(-i k x)
            vm = np.empty_like(up)
            dvm = np.empty_like(up)
            vm[0] = 1.0
            dvm[0] = -ik
            for s in range(n_b - 1):
                c11, c12, c21, c22 = _propagator(kseg[s], width[s])
                vm[s + 1] = c11 * vm[s] + c12 * dvm[s]
                dvm[s + 1] = c21 * vm[s] + c22 * dvm[s]
            vL, dvL = vm[-1], dvm[-1]
            self._kseg = kseg
        else:
            u0 = np.ones_like(k)
            du0 = ik - 2.0 * alpha * u0
            vL = np.ones_like(k)
            dvL = -ik + 2.0 * alpha * vL
            up = dup = vm = dvm = None

        a = 0.5 * (u0 + du0 / ik)
        bcoef = 0.5 * (u0 - du0 / ik)
        self.t = 1.0 / a
        self.r = bcoef / a
        L = pot.length
        inc = 0.5 * (vL - dvL / ik) * np.exp(ik * L)  # exp(-ikx) coefficient
        out = 0.5 * (vL + dvL / ik) * np.exp(-ik * L)  # exp(+ikx) coefficient
        self.t_minus = 1.0 / inc
        self.r_minus = out / inc
        if up is not None:
            self._plus = (up / a, dup / a)
            self._minus = (vm / inc, dvm / inc)

    # -- public API ---------------------------------------------------
    @property
    def amplitudes(self):
        if self._scalar:
            return Amplitudes(self.E[0], self.t[0], self.r[0])
        return Amplitudes(self.E, self.t, self.r)

    def _out(self, arr, x_scalar):
        if self._scalar:
            arr = arr[:, 0]
        if x_scalar:
            arr = arr[0]
        return arr

    def _evaluate(self, alpha, x, derivative):
        if alpha not in (1, -1):
            raise DomainError("alpha must be +1 or -1")
        x_scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        X = x[:, None]
        k = self.k[None, :]
        ik = 1j * k
        ep = np.exp(ik * X)
        em = np.exp(-ik * X)
        L = self.potential.length
        left = x < 0
        right = x >= L
        psi = np.zeros((len(x), len(self.E)), complex)

        if alpha == 1:
            t, r = self.t[None, :], self.r[None, :]
            if derivative:
                lv = ik * (ep - r * em)
                rv = ik * t * ep
            else:
                lv = ep + r * em
                rv = t * ep
        else:
            t, r = self.t_minus[None, :], self.r_minus[None, :]
            if derivative:
                lv = -ik * t * em
                rv = -ik * em + ik * r * ep
            else:
                lv = t * em
                rv = em + r * ep
        psi[left] = lv[left]
        psi[right] = rv[right]

        inside = ~(left | right)
        if np.any(inside):
            b = self.potential.boundaries
            seg = np.clip(np.searchsorted(b, x[inside], side="right") - 1, 0, len(b) - 2)
            xi = x[inside]
            vals = np.empty((len(xi), len(self.E)), complex)
            state, dstate = self._plus if alpha == 1 else self._minus
            for s in np.unique(seg):
                m = seg == s
                # '+' from the right edge, '-' from the left edge of the segment
                anchor = s + 1 if alpha == 1 else s
                shift = (xi[m] - b[anchor])[:, None]
                c11, c12, c21, c22 = _propagator(self._kseg[s][None, :], shift)
                if derivative:
                    vals[m] = c21 * state[anchor] + c22 * dstate[anchor]
                else:
                    vals[m] = c11 * state[anchor] + c12 * dstate[anchor]
            psi[inside] = vals
        return self._out(self.norm[None, :] * psi, x_scalar)

    def psi(self, alpha, x):
        """``<x|E,alpha>``."""
        return self._evaluate(alpha, x, derivative=False)

    def dpsi(self, alpha, x):
        """``d/dx <x|E,alpha>``."""
        return self._evaluate(alpha, x, derivative=True)


def solve(potential, E, M=1.0, hbar=1.0):
    """Solve the stationary scattering problem at energy (or energies) ``E``."""
    return ScatteringSolution(potential, E, M, hbar)


def flux_element(sol, alpha, X):
    """Flux matrix element ``<E,alpha| J(X) |E,+>`` behind the barrier.

    Equals ``(hbar / 2Mi) [psi_alpha^* psi_+' - psi_alpha^*' psi_+]`` at ``X``.
    """
    if np.any(np.asarray(X) <= sol.potential.length):
        raise DomainError("flux probe X must lie behind the barrier (X > L)")
    bra = np.conj(sol.psi(alpha, X))
    dbra = np.conj(sol.dpsi(alpha, X))
    ket = sol.psi(1, X)
    dket = sol.dpsi(1, X)
    return sol.hbar / (2j * sol.mass) * (bra * dket - dbra * ket)
