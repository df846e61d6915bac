"""Brute-force time-dependent oracle: Crank-Nicolson propagation on a uniform grid.

The implicit midpoint (Cayley) step is unitary, so the discrete norm is
conserved to round-off.  Currents live on the bonds between grid points,

    J_{j+1/2} = (hbar / (M dx)) Im(conj(a_j) a_{j+1}),  a = (psi^n + psi^{n+1}) / 2,

which makes ``(rho^{n+1} - rho^n) / dt + (J_{j+1/2} - J_{j-1/2}) / dx = 0``
hold exactly.  Flux moments at a probe are therefore the exact probability
that crossed that bond.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .exceptions import DomainError, NumericalError

MIN_POINTS = 1024
_NORM_TOL = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Uniform space-time grid ``x_min + j dx`` for ``j < n_x``, steps of ``dt`` up to ``t_max``."""

    x_min: float
    x_max: float
    n_x: int
    dt: float
    t_max: float

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise DomainError("x_max must exceed x_min")
        if int(self.n_x) < MIN_POINTS:
            raise DomainError(f"need at least {MIN_POINTS} grid points")
        if not (self.dt > 0 and self.t_max > 0):
            raise DomainError("dt and t_max must be positive")
        object.__setattr__(self, "n_x", int(self.n_x))

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.n_x - 1)

    @property
    def x(self):
        return self.x_min + self.dx * np.arange(self.n_x)

    @property
    def n_steps(self):
        return int(np.ceil(self.t_max / self.dt - 1e-9))


def auto_grid(pot, packet, x2, dx=0.05, dt=0.05, margin=0.2):
    """Grid that holds the packet, its transmitted and reflected parts until
    the slowest relevant component has passed ``x2``; ``x = 0`` is a node."""
    pk = packet
    v_lo = (pk.p0 - 6.0 * pk.sigma_p) / pk.mass
    v_hi = (pk.p0 + 6.0 * pk.sigma_p) / pk.mass
    t_max = (x2 - pk.x0 + 8.0 * pk.sigma_x) / v_lo
    spread = 8.0 * pk.sigma_x * np.hypot(1.0, pk.hbar * t_max / (2.0 * pk.mass * pk.sigma_x ** 2))
    right = max(pk.x0 + v_hi * t_max, x2, pot.length) + spread
    left = min(pk.x0, -(v_hi * t_max + pk.x0)) - spread
    width = right - left
    lo = np.floor((left - margin * width) / dx) * dx
    hi = np.ceil((right + margin * width) / dx) * dx
    n = int(round((hi - lo) / dx)) + 1
    if n < MIN_POINTS:
        n = MIN_POINTS
        hi = lo + dx * (n - 1)
    return GridSpec(float(lo), float(hi), n, dt, float(t_max))


def discretize(pot, grid):
    """Cell-averaged potential on the grid (a delta becomes ``Omega / dx`` in one cell)."""
    x, dx = grid.x, grid.dx
    V = np.zeros(grid.n_x)
    if pot.kind == "delta":
        j = int(np.argmin(np.abs(x)))
        V[j] = pot.strength / dx
    for a, b, h in pot.segments:
        lo = np.clip(x - 0.5 * dx, a, b)
        hi = np.clip(x + 0.5 * dx, a, b)
        V += h * (hi - lo) / dx
    return V


@dataclass
class PropagationResult:
    grid: GridSpec
    times: np.ndarray
    norm_history: np.ndarray
    center_history: np.ndarray
    probes: tuple
    flux_times: np.ndarray
    flux_series: dict
    rho_time_integral: np.ndarray
    final_density: np.ndarray
    continuity_residual: float
    dwell_region: tuple
    snapshots: list = field(default_factory=list)

    @property
    def transmitted_norm(self):
        """Probability that crossed the first probe."""
        n = float(np.sum(self.flux_series[self.probes[0]]) * self.grid.dt)
        return min(max(n, 0.0), 1.0)

    @property
    def dwell(self):
        return dwell_oracle(self, *self.dwell_region, check=False)

    @property
    def arrival_moment(self):
        N, T = flux_moments(self, self.probes[0], check=False)
        return T / N if N > 0 else float("nan")


def _bond_index(grid, X):
    # bond j sits at x_j + dx/2; pick the bond closest to X
    j = int(np.round((X - grid.x_min) / grid.dx - 0.5))
    if not 0 <= j < grid.n_x - 1:
        raise DomainError(f"probe {X} lies outside the grid")
    return j


def propagate(grid, pot, packet, probes=None, dwell_region=None, snapshot_every=0):
    """Evolve ``packet`` through ``pot`` on ``grid``.

    ``probes`` are flux probe positions (default ``L + 5``); the first one
    defines ``transmitted_norm`` and ``arrival_moment``.
    """
    x, dx, dt = grid.x, grid.dx, grid.dt
    M, hbar = packet.mass, packet.hbar
    L = pot.length
    if probes is None:
        probes = (L + 5.0,)
    probes = tuple(float(p) for p in np.atleast_1d(probes))
    if dwell_region is None:
        dwell_region = (-10.0, L + 10.0)
    edge = 8.0 * packet.sigma_x
    if packet.x0 - edge < grid.x_min or packet.x0 + edge > grid.x_max:
        raise DomainError("initial packet is not contained in the grid")
    if not (grid.x_min < 0.0 and L < grid.x_max):
        raise DomainError("barrier is not contained in the grid")
    bonds = [_bond_index(grid, X) for X in probes]

    psi = packet.wavefunction(x).astype(complex)
    psi[0] = psi[-1] = 0.0
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * dx)

    V = discretize(pot, grid)
    kin = hbar ** 2 / (2.0 * M * dx ** 2)
    a = 0.5j * dt / hbar
    diag = 2.0 * kin + V
    off = np.full(grid.n_x - 1, -kin, dtype=complex)
    # (1 + a H) psi^{n+1} = (1 - a H) psi^n, H tridiagonal
    dl, d, du, du2, ipiv, info = lapack.zgttrf(a * off, 1.0 + a * diag, a * off)
    if info != 0:
        raise NumericalError("Crank-Nicolson matrix is singular")
    rhs_diag = 1.0 - a * diag
    rhs_off = -a * off

    n_steps = grid.n_steps
    norms = np.empty(n_steps + 1)
    centers = np.empty(n_steps + 1)
    flux = {X: np.empty(n_steps) for X in probes}
    rho = np.abs(psi) ** 2
    norms[0] = np.sum(rho) * dx
    centers[0] = np.sum(x * rho) * dx
    rho_int = np.zeros(grid.n_x)
    residual = 0.0
    peak = 0.0
    snaps = []
    cur_scale = hbar / (M * dx)

    for n in range(n_steps):
        rhs = rhs_diag * psi
        rhs[1:] += rhs_off * psi[:-1]
        rhs[:-1] += rhs_off * psi[1:]
        new, info = lapack.zgttrs(dl, d, du, du2, ipiv, rhs)
        avg = 0.5 * (psi + new)
        J = cur_scale * np.imag(np.conj(avg[:-1]) * avg[1:])
        rho_new = np.abs(new) ** 2
        rho_int += 0.5 * dt * (rho + rho_new)
        res = np.max(np.abs((rho_new[1:-1] - rho[1:-1]) / dt + np.diff(J) / dx))
        residual = max(residual, res)
        peak = max(peak, np.max(np.abs(J)))
        for X, j in zip(probes, bonds):
            flux[X][n] = J[j]
        psi, rho = new, rho_new
        norms[n + 1] = np.sum(rho) * dx
        centers[n + 1] = np.sum(x * rho) * dx
        if abs(norms[n + 1] - norms[0]) > _NORM_TOL:
            raise NumericalError(
                f"norm drift {norms[n + 1] - norms[0]:.3g} at step {n + 1}; use a smaller dt"
            )
        if snapshot_every and (n + 1) % snapshot_every == 0:
            Jn = np.zeros(grid.n_x)
            Jn[1:-1] = 0.5 * (J[:-1] + J[1:])
            snaps.append(((n + 1) * dt, rho.copy(), Jn))

    times = dt * np.arange(n_steps + 1)
    return PropagationResult(
        grid=grid,
        times=times,
        norm_history=norms,
        center_history=centers,
        probes=probes,
        flux_times=dt * (np.arange(n_steps) + 0.5),
        flux_series=flux,
        rho_time_integral=rho_int,
        final_density=rho,
        continuity_residual=residual / peak if peak > 0 else residual,
        dwell_region=tuple(dwell_region),
        snapshots=snaps,
    )


def _trapezoid_on(res, x1, x2, values):
    x = res.grid.x
    inside = (x >= x1) & (x <= x2)
    if inside.sum() < 2:
        raise DomainError("region holds fewer than two grid points")
    return float(np.trapezoid(values[inside], x[inside]))


def dwell_oracle(res, x1, x2, check=True, tol=1e-8):
    """``int_{x1}^{x2} int_0^{t_max} rho dt dx`` by the trapezoid rule."""
    if check:
        left = _trapezoid_on(res, x1, x2, res.final_density)
        if left > tol:
            raise DomainError(f"residual probability {left:.3g} in [{x1}, {x2}]; run longer")
    return _trapezoid_on(res, x1, x2, res.rho_time_integral)


def flux_moments(res, x2, check=True, tol=1e-6):
    """``N = int J(x2, t) dt`` and ``T = int t J(x2, t) dt``."""
    if x2 not in res.flux_series:
        raise DomainError(f"no flux recorded at {x2}; pass it in probes")
    J = res.flux_series[x2]
    if check:
        peak = np.max(np.abs(J))
        if peak > 0 and abs(J[-1]) > tol * peak:
            raise DomainError(f"flux at {x2} has not decayed by t_max; run longer")
    dt = res.grid.dt
    return float(np.sum(J) * dt), float(np.sum(res.flux_times * J) * dt)


def write_snapshots(res, path, stride=1):
    """Dump snapshots as ``t, x, rho, J`` rows."""
    x = res.grid.x[::stride]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "rho", "J"])
        for t, rho, J in res.snapshots:
            for row in zip(np.full(len(x), t), x, rho[::stride], J[::stride]):
                w.writerow(["%.17g" % v for v in row])
