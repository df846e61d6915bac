"""Position-resolved time densities for tunneled, reflected and all particles.

All densities come from one bilinear engine in the energy representation,
valid at every ``x`` including the barrier interior.  For a packet made of
right-moving waves,

    G(x) = (2 pi hbar)^2 sum_E |c_E|^2 psi_+^*(x) sum_a psi_a(x) <E,a|J(X)|E,+>

gives the tunneling density ``Re G / <N>`` and its detector-dependent
correction ``-Im G / <N>``.  The reflection density is built on a separate
route: the reflected channel of ``|E,+>`` is ``r(E) <x|E,+>^*`` (the
decomposition ``psi_+ = r psi_+^* + t psi_-^*``), which uses no flux matrix
elements at all.

The stationary engine extends every time integral to ``t -> -inf`` and is
therefore independent of the packet position.  ``time_ordered=True`` starts
the clock at ``t = 0`` instead: it subtracts ``int_{-inf}^0 Psi^* Phi dt``
with ``Phi = N Psi``, which only differs from zero where the initial packet
sits.  That contribution is what makes the corrections integrate to zero over
a region holding both the packet and the barrier.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DomainError
from .scattering import PotentialSpec, flux_element, solve
from .wavepacket import PacketSpec, spectral_table, suggest_nodes

KINDS = ("dwell", "tunnel", "tunnel_corr", "reflect", "measured")
COLUMNS = ("tau_dwell", "tau_tun", "tau_corr", "tau_refl", "tau_measured")

_CHUNK = 2048
_PACKET_ZONE = 12.0  # spatial widths around x0 where the time origin matters
_FLAG_EPS = 1e-12


@dataclass(frozen=True)
class DensityProfile:
    x_grid: np.ndarray
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown density kind {self.kind!r}")


@dataclass(frozen=True)
class DetectorCoupling:
    """Detector constant multiplying the correction density.

    ``kappa = (2 / hbar) (<q><p_q> - Re <q p_q>)`` for the pointer state.
    """

    kappa: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.kappa):
            raise DomainError("detector coupling must be finite")


def measured_density(pair, kappa):
    """Density read by a detector: ``tau_tun + kappa * tau_corr``."""
    if isinstance(kappa, DetectorCoupling):
        kappa = kappa.kappa
    tun, corr = pair
    return np.asarray(tun) + kappa * np.asarray(corr)


def _gl_panels(a, b, breaks, width, order=16):
    """Composite Gauss-Legendre nodes/weights on [a, b] split at ``breaks``."""
    edges = [a] + sorted(x for x in breaks if a < x < b) + [b]
    s, w = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        n = max(1, int(np.ceil((hi - lo) / width)))
        e = np.linspace(lo, hi, n + 1)
        half = 0.5 * np.diff(e)[:, None]
        mid = 0.5 * (e[1:] + e[:-1])[:, None]
        xs.append((mid + half * s).ravel())
        ws.append((half * w).ravel())
    if not xs:
        return np.empty(0), np.empty(0)
    return np.concatenate(xs), np.concatenate(ws)


class _Engine:
    """Per-energy tables shared by all densities for one packet and barrier."""

    def __init__(self, table, potential, X=None):
        pk = table.packet
        self.table = table
        self.packet = pk
        self.potential = potential
        self.hbar = pk.hbar
        L = potential.length
        self.X = L + 5.0 if X is None else float(X)
        if not self.X > L:
            raise DomainError("flux probe X must lie behind the barrier")
        self.sol = solve(potential, table.energies, pk.mass, pk.hbar)
        self.wc = table.weights * table.c
        self.wc2 = table.weights * table.density
        self.J_pp = flux_element(self.sol, 1, self.X)
        self.J_mp = flux_element(self.sol, -1, self.X)
        twopi_h = 2.0 * np.pi * self.hbar
        self.N = float(np.real(twopi_h * np.sum(self.wc2 * self.J_pp)))
        self.R = 1.0 - self.N

    # -- stationary (time integrals over the whole real line) ---------
    def stationary(self, x):
        """Rows of (dwell, G, G_refl) at each x; G complex."""
        h2 = 2.0 * np.pi * self.hbar
        psi_p = self.sol.psi(1, x)
        psi_m = self.sol.psi(-1, x)
        chi = h2 * (psi_p * self.J_pp + psi_m * self.J_mp)  # <x|N|E,+> per unit c_E
        cp = np.conj(psi_p)
        dwell = h2 * (np.abs(psi_p) ** 2) @ self.wc2
        G = h2 * (cp * chi) @ self.wc2
        GR = h2 * (cp * cp) @ (self.sol.r * self.wc2)
        return np.real(dwell), G, GR

    # -- contribution of t < 0 near the initial packet ----------------
    def _time_nodes(self, x_min):
        pk = self.packet
        p_slow = pk.p0 - 6.0 * pk.sigma_p
        reach = max(pk.x0 - x_min, 0.0) + _PACKET_ZONE * pk.sigma_x
        T = pk.mass * reach / p_slow
        E = self.table.energies
        dE = E[-1] - E[0]
        tau = pk.mass * pk.sigma_x / pk.p0
        n = int(max(64, np.ceil(0.35 * dE * T / self.hbar) + 32, np.ceil(8.0 * T / tau)))
        s, w = np.polynomial.legendre.leggauss(n)
        return -0.5 * T * (1.0 - s), 0.5 * T * w

    def past(self, x):
        """``int_{-T}^0`` of |Psi|^2, Psi^* Phi and Psi^* Phi_R at x."""
        h2 = 2.0 * np.pi * self.hbar
        t, wt = self._time_nodes(float(np.min(x)))
        phase = np.exp(-1j * np.outer(self.table.energies, t) / self.hbar)
        psi_p = self.sol.psi(1, x)
        chi = h2 * (psi_p * self.J_pp + self.sol.psi(-1, x) * self.J_mp)
        Psi = (psi_p * self.wc) @ phase
        Phi = (chi * self.wc) @ phase
        Phi_R = (np.conj(psi_p) * self.sol.r * self.wc) @ phase
        cPsi = np.conj(Psi)
        dwell = (np.abs(Psi) ** 2) @ wt
        G = (cPsi * Phi) @ wt
        GR = (cPsi * Phi_R) @ wt
        return np.real(dwell), G, GR

    def zone_edge(self):
        pk = self.packet
        return min(pk.x0 + _PACKET_ZONE * pk.sigma_x, 0.0)

    def raw(self, x, time_ordered=False):
        x = np.asarray(x, dtype=float)
        dwell, G, GR = self.stationary(x)
        if time_ordered:
            zone = x < self.zone_edge()
            if np.any(zone):
                d0, g0, r0 = self.past(x[zone])
                dwell[zone] -= d0
                G[zone] -= g0
                GR[zone] -= r0
        return dwell, G, GR

    def columns(self, x, kappa=0.0, time_ordered=False):
        dwell, G, GR = self.raw(x, time_ordered)
        out = np.empty((len(x), 5))
        out[:, 0] = dwell
        if self.N > _FLAG_EPS:
            out[:, 1] = np.real(G) / self.N
            out[:, 2] = -np.imag(G) / self.N
        else:
            out[:, 1:3] = np.nan
        out[:, 3] = np.real(GR) / self.R if self.R > _FLAG_EPS else np.nan
        out[:, 4] = out[:, 1] + kappa * out[:, 2]
        return out


def _engine(c, pot, X=None):
    if abs(c.norm() - 1.0) > 1e-6:
        raise DomainError(f"spectral amplitude is not normalised (norm {c.norm():.9g})")
    return _Engine(c, pot, X)


def transmission_probability(c, pot):
    """``<N(X)> = int |t(E)|^2 |c_E|^2 dE`` for any probe behind the barrier."""
    sol = solve(pot, c.energies, c.packet.mass, c.packet.hbar)
    return float(np.sum(c.weights * c.density * np.abs(sol.t) ** 2))


def dwell_density(c, pot, x, time_ordered=False):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return _engine(c, pot).raw(x, time_ordered)[0]


def tunnel_density_pair(c, pot, X, x, time_ordered=False):
    """``(tau_tun(x), tau_corr(x))`` for the subensemble found behind ``X``."""
    eng = _engine(c, pot, X)
    if eng.N <= _FLAG_EPS:
        raise DomainError("no tunneling subensemble (<N> = 0)")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    _, G, _ = eng.raw(x, time_ordered)
    return np.real(G) / eng.N, -np.imag(G) / eng.N


def reflect_density(c, pot, X, x, time_ordered=False):
    eng = _engine(c, pot, X)
    if eng.R <= _FLAG_EPS:
        raise DomainError("no reflected subensemble (<N> = 1)")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    _, _, GR = eng.raw(x, time_ordered)
    return np.real(GR) / eng.R


def region_integrals(eng, x1, x2, time_ordered=False, kappa=0.0, panel=2.0):
    """Integrate all densities over ``[x1, x2]``.

    The oscillating stationary part uses 16-point panels of width ``panel``
    split at the barrier edges; the smooth packet-zone term uses panels a
    quarter of the packet's spatial width.
    """
    if not x2 > x1:
        raise DomainError("need x1 < x2")
    acc = np.zeros(3, complex)

    def add(fn, xs, ws, sign):
        for i in range(0, len(xs), _CHUNK):
            d, g, r = fn(xs[i : i + _CHUNK])
            wi = ws[i : i + _CHUNK]
            acc[:] += sign * np.array([wi @ d, wi @ g, wi @ r])

    add(eng.stationary, *_gl_panels(x1, x2, list(eng.potential.boundaries), panel), 1.0)
    if time_ordered:
        edge = min(eng.zone_edge(), x2)
        if edge > x1:
            add(eng.past, *_gl_panels(x1, edge, [], 0.25 * eng.packet.sigma_x), -1.0)
    dwell, G, GR = acc
    tun = G.real / eng.N if eng.N > _FLAG_EPS else np.nan
    corr = -G.imag / eng.N if eng.N > _FLAG_EPS else np.nan
    refl = GR.real / eng.R if eng.R > _FLAG_EPS else np.nan
    values = (dwell.real, tun, corr, refl, tun + kappa * corr)
    return dict(zip(COLUMNS, (float(v) for v in values)))


class TunnelingTimeDensity(TransformerMixin, BaseEstimator):
    """Map positions to time densities of a Gaussian packet hitting a barrier.

    ``fit`` tabulates the scattering states on an energy quadrature sized for
    the positions it is given; ``transform`` returns one row per position with
    columns ``tau_dwell, tau_tun, tau_corr, tau_refl, tau_measured``.

    Parameters
    ----------
    potential : PotentialSpec, default delta barrier of strength 2
    p0, sigma_p, x0, mass, hbar : packet and units; ``x0=None`` picks a
        start six spatial widths left of the barrier
    probe : flux probe X behind the barrier (default ``L + 5``)
    kappa : detector coupling for the ``tau_measured`` column
    n_energy : quadrature size, ``None`` sizes it from the fitted positions
    time_ordered : start the clock at t = 0 instead of t = -inf
    n_jobs : threads used to evaluate position chunks
    """

    def __init__(
        self,
        potential=None,
        p0=1.0,
        sigma_p=0.001,
        x0=None,
        mass=1.0,
        hbar=1.0,
        probe=None,
        kappa=0.0,
        n_energy=None,
        width_sigmas=8.0,
        time_ordered=False,
        n_jobs=None,
    ):
        self.potential = potential
        self.p0 = p0
        self.sigma_p = sigma_p
        self.x0 = x0
        self.mass = mass
        self.hbar = hbar
        self.probe = probe
        self.kappa = kappa
        self.n_energy = n_energy
        self.width_sigmas = width_sigmas
        self.time_ordered = time_ordered
        self.n_jobs = n_jobs

    def _positions(self, X):
        X = check_array(X, ensure_2d=False, dtype=float)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError(f"expected one column of positions, got {X.shape[1]}")
            X = X[:, 0]
        return X

    def fit(self, X=None, y=None):
        pot = self.potential if self.potential is not None else PotentialSpec.delta(2.0)
        if not isinstance(pot, PotentialSpec):
            raise TypeError("potential must be a PotentialSpec")
        packet = PacketSpec(self.p0, self.sigma_p, self.x0, self.mass, self.hbar)
        DetectorCoupling(self.kappa)
        x_reach = 0.0 if X is None else float(np.max(np.abs(self._positions(X))))
        reach = max(x_reach, abs(packet.x0) + _PACKET_ZONE * packet.sigma_x, pot.length)
        if self.n_energy is None:
            n = suggest_nodes(packet, 2.0 * reach, self.width_sigmas)
        else:
            n = int(self.n_energy)
        table = spectral_table(packet, n, self.width_sigmas)
        self.potential_ = pot
        self.packet_ = packet
        self.spectrum_ = table
        self.n_energy_ = n
        self.reach_ = reach
        self.engine_ = _engine(table, pot, self.probe)
        self.probe_ = self.engine_.X
        self.transmission_probability_ = self.engine_.N
        self.n_features_in_ = 1
        return self

    def _map(self, fn, x):
        chunks = [x[i : i + _CHUNK] for i in range(0, len(x), _CHUNK)]
        if self.n_jobs and self.n_jobs > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(self.n_jobs) as pool:
                parts = list(pool.map(fn, chunks))
        else:
            parts = [fn(ch) for ch in chunks]
        return np.concatenate(parts) if parts else np.empty((0, 5))

    def transform(self, X):
        check_is_fitted(self, "engine_")
        x = self._positions(X)
        eng, kappa, ordered = self.engine_, self.kappa, self.time_ordered
        return self._map(lambda ch: eng.columns(ch, kappa, ordered), x)

    def profile(self, x, kind="tunnel"):
        x = np.asarray(x, dtype=float)
        col = KINDS.index(kind)
        return DensityProfile(x, self.transform(x)[:, col], kind)

    def integrate(self, x1, x2, panel=2.0):
        """Integrals of every density column over ``[x1, x2]``."""
        check_is_fitted(self, "engine_")
        return region_integrals(self.engine_, x1, x2, self.time_ordered, self.kappa, panel)

    def get_feature_names_out(self, input_features=None):
        return np.array(COLUMNS, dtype=object)
