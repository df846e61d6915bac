"""Command-line front end: ``barriertime {density,asymptotic,propagate,verify}``."""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .asymptotics import AsymptoticTimeEstimator, imaginary_time, phase_time
from .config import ConfigError, ScenarioConfig, parse_config
from .densities import COLUMNS, TunnelingTimeDensity, _engine, region_integrals
from .exceptions import DomainError, NumericalError
from .scattering import solve
from .tdse import auto_grid, dwell_oracle, flux_moments, propagate, write_snapshots
from .wavepacket import spectral_table, suggest_nodes

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _fmt(v):
    if isinstance(v, str):
        return v
    return "%.17g" % v


def format_csv(command, cfg, header, rows):
    lines = [f"# barriertime {__version__}", f"# command: {command}"]
    lines += [f"# {line}" for line in cfg.echo()]
    lines.append(",".join(header))
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _density_estimator(cfg, threads=None, time_ordered=None, X=None):
    return TunnelingTimeDensity(
        potential=cfg.potential(),
        p0=cfg.p0,
        sigma_p=cfg.sigma_p,
        x0=cfg.x0,
        mass=cfg.mass,
        hbar=cfg.hbar,
        probe=cfg.X if X is None else X,
        kappa=cfg.kappa,
        n_energy=cfg.n_energy,
        width_sigmas=cfg.width_sigmas,
        time_ordered=cfg.time_ordered if time_ordered is None else time_ordered,
        n_jobs=threads,
    )


def run_density(cfg, threads=None):
    x = cfg.grid()
    est = _density_estimator(cfg, threads).fit(x)
    out = est.transform(x)
    return ("x",) + COLUMNS, [(xi, *row) for xi, row in zip(x, out)]


def _asymptotic(cfg):
    return AsymptoticTimeEstimator(
        potential=cfg.potential(), p0=cfg.p0, sigma_p=cfg.sigma_p, x0=cfg.x0,
        mass=cfg.mass, hbar=cfg.hbar, n_energy=cfg.n_energy, width_sigmas=cfg.width_sigmas,
    ).fit()


def run_asymptotic(cfg, threads=None):
    rep = _asymptotic(cfg).report(cfg.x2)
    header = ("E0", "t_phase", "t_imag", "t_tun", "t_corr_integral", "x2")
    return header, [(rep.E0, rep.t_phase, rep.t_imag, rep.t_tun, rep.t_corr_integral, rep.x2)]


def _oracle_run(cfg, snapshots=False):
    pot, pk = cfg.potential(), cfg.tdse_packet()
    grid = auto_grid(pot, pk, cfg.x2, cfg.tdse_dx, cfg.tdse_dt)
    every = cfg.snapshot_every if snapshots else 0
    res = propagate(grid, pot, pk, probes=(cfg.x2,),
                    dwell_region=(cfg.dwell_x1, cfg.dwell_x2), snapshot_every=every)
    return res


def run_propagate(cfg, threads=None):
    res = _oracle_run(cfg, snapshots=bool(cfg.snapshots and cfg.snapshot_every))
    if cfg.snapshots and res.snapshots:
        write_snapshots(res, cfg.snapshots)
    header = ("transmitted_norm", "dwell", "arrival_moment", "x2", "dwell_x1", "dwell_x2")
    row = (res.transmitted_norm, res.dwell, res.arrival_moment, cfg.x2, cfg.dwell_x1, cfg.dwell_x2)
    return header, [row]


def _rel(a, b):
    return abs(a - b) / abs(b)


def run_verify(cfg, threads=None):
    """Rows of ``(check, measured, bound, verdict)``."""
    rows = []

    def check(name, measured, bound):
        ok = bool(np.isfinite(measured) and measured <= bound)
        rows.append((name, float(measured), float(bound), "PASS" if ok else "FAIL"))

    pot, pk = cfg.potential(), cfg.packet()
    est = _density_estimator(cfg, threads, time_ordered=False).fit(cfg.grid())
    c = est.spectrum_
    sol = solve(pot, c.energies, pk.mass, pk.hbar)
    check("unitarity", np.max(np.abs(np.abs(sol.t) ** 2 + np.abs(sol.r) ** 2 - 1.0)), 1e-10)
    check("packet_norm", abs(c.norm() - 1.0), 1e-8)

    x = np.linspace(cfg.x_min, cfg.x_max, 2048)
    out = est.transform(x)
    N = est.transmission_probability_
    if 1e-12 < N < 1 - 1e-12:
        resid = out[:, 0] - N * out[:, 1] - (1.0 - N) * out[:, 3]
        check("dwell_identity", np.max(np.abs(resid)), 1e-9)
    shifted = _density_estimator(cfg, threads, time_ordered=False, X=est.probe_ + 7.0).fit(cfg.grid())
    cols = slice(1, 3) if N > 1e-12 else slice(3, 4)
    check("probe_invariance", np.max(np.abs(shifted.transform(x)[:, cols] - out[:, cols])), 1e-9)

    E0 = pk.E0
    if pot.kind == "delta":
        alpha = pk.mass * pot.strength / pk.hbar ** 2
        p = pk.p0
        ph = pk.hbar * alpha * pk.mass / (p * (p ** 2 + alpha ** 2))
        im = pk.mass * alpha ** 2 * pk.hbar / (p ** 2 * (p ** 2 + alpha ** 2))
        check("phase_time_analytic", abs(phase_time(pot, E0, pk.mass, pk.hbar) - ph), 1e-6)
        check("imag_time_analytic", abs(imaginary_time(pot, E0, pk.mass, pk.hbar) - im), 1e-6)

    if N > 1e-300:
        rep = _asymptotic(cfg).report(cfg.x2)
        # transmission filters momenta, so the flight uses the transmitted <M/p>
        flight = rep.inverse_velocity * (cfg.x2 - pot.length - pk.x0)
        if abs(rep.t_phase) > 0:
            check("quasimono_phase", _rel(rep.t_tun - flight, rep.t_phase), 0.01)
        else:
            check("quasimono_phase", abs(rep.t_tun - flight) / flight, 0.005)
        if abs(rep.t_imag) > 0:
            check("quasimono_imag", _rel(rep.t_corr_integral, -rep.t_imag), 0.01)
        if cfg.verify_cancellation and N > 1e-12:
            eng = _engine(c, pot, est.probe_)
            x_lo = pk.x0 - 12.0 * pk.sigma_x
            x_hi = max(cfg.x2, pot.length + 12.0 * pk.sigma_x)
            full = region_integrals(eng, x_lo, x_hi, time_ordered=True)
            check("corr_cancellation", abs(full["tau_corr"]), 1e-3)

    if cfg.verify_tdse:
        tp = cfg.tdse_packet()
        res = _oracle_run(cfg)
        n_t = suggest_nodes(tp, 2.0 * (abs(tp.x0) + cfg.x2) + 100.0)
        ct = spectral_table(tp, n_t)
        eng = _engine(ct, pot)
        Nt, Tt = flux_moments(res, cfg.x2)
        check("tdse_norm_drift", np.max(np.abs(res.norm_history - 1.0)), 1e-8)
        check("tdse_continuity", res.continuity_residual, 1e-4)
        check("oracle_transmission", _rel(Nt, eng.N), 0.01)
        dw = region_integrals(eng, cfg.dwell_x1, cfg.dwell_x2)["tau_dwell"]
        check("oracle_dwell", _rel(dwell_oracle(res, cfg.dwell_x1, cfg.dwell_x2), dw), 0.01)
        if eng.N > 1e-12:
            t_ref = AsymptoticTimeEstimator(
                potential=pot, p0=tp.p0, sigma_p=tp.sigma_p, x0=tp.x0, mass=tp.mass,
                hbar=tp.hbar, n_energy=n_t,
            ).fit().predict([cfg.x2])[0]
            check("oracle_arrival", _rel(Tt / Nt, t_ref), 0.02)
    return ("check", "measured", "bound", "verdict"), rows


RUNNERS = {
    "density": run_density,
    "asymptotic": run_asymptotic,
    "propagate": run_propagate,
    "verify": run_verify,
}


def _threads(arg):
    if arg is not None:
        return arg
    env = os.environ.get("BARRIERTIME_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"BARRIERTIME_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError("BARRIERTIME_THREADS must be >= 1")
        return n
    return None


def build_parser():
    ap = argparse.ArgumentParser(prog="barriertime", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH", help="scenario file (defaults if omitted)")
        sp.add_argument("--out", metavar="PATH", help="write CSV here instead of stdout")
        sp.add_argument("--threads", type=int, metavar="N", help="worker threads")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else ScenarioConfig()
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        threads = _threads(args.threads)
    except FileNotFoundError as exc:
        print(f"barriertime: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"barriertime: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        header, rows = RUNNERS[args.command](cfg, threads)
    except (DomainError, NumericalError) as exc:
        print(f"barriertime: {exc}", file=sys.stderr)
        return EXIT_FAIL if args.command == "verify" else EXIT_USAGE

    text = format_csv(args.command, cfg, header, rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "verify":
        for name, measured, bound, verdict in rows:
            print(f"{verdict} {name}: {measured:.3e} (bound {bound:.1e})", file=sys.stderr)
        return EXIT_OK if all(r[3] == "PASS" for r in rows) else EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
