"""Scenario files: ``[section]`` headers followed by ``key = value`` lines.

Blank lines and lines starting with ``#`` or ``;`` are ignored.  Every key has
a default, so an empty file describes the delta-barrier scenario (strength 2,
``p0 = 1``, ``sigma_p = 0.001``, ``hbar = M = 1``).
"""

import re
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, DomainError
from .scattering import PotentialSpec
from .wavepacket import PacketSpec


def _float(s):
    return float(s)


def _opt_float(s):
    return None if s.lower() in ("", "auto", "none") else float(s)


def _opt_int(s):
    return None if s.lower() in ("", "auto", "none") else int(s)


def _bool(s):
    v = s.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _segments(s):
    """``x_start:x_end:height`` triples separated by commas."""
    out = []
    for part in s.split(","):
        if part.strip():
            a, b, v = (float(u) for u in part.split(":"))
            out.append((a, b, v))
    return tuple(out)


def _text(s):
    return s


# (section, key) -> (field name, converter)
SCHEMA = {
    ("potential", "kind"): ("kind", _text),
    ("potential", "omega"): ("omega", _float),
    ("potential", "height"): ("height", _float),
    ("potential", "width"): ("width", _float),
    ("potential", "segments"): ("segments", _segments),
    ("packet", "p0"): ("p0", _float),
    ("packet", "sigma_p"): ("sigma_p", _float),
    ("packet", "x0"): ("x0", _opt_float),
    ("units", "hbar"): ("hbar", _float),
    ("units", "mass"): ("mass", _float),
    ("grid", "x_min"): ("x_min", _float),
    ("grid", "x_max"): ("x_max", _float),
    ("grid", "n_x"): ("n_x", int),
    ("grid", "n_energy"): ("n_energy", _opt_int),
    ("grid", "width_sigmas"): ("width_sigmas", _float),
    ("grid", "time_ordered"): ("time_ordered", _bool),
    ("detector", "kappa"): ("kappa", _float),
    ("probes", "X"): ("X", _opt_float),
    ("probes", "x2"): ("x2", _float),
    ("tdse", "sigma_p"): ("tdse_sigma_p", _float),
    ("tdse", "x0"): ("tdse_x0", _float),
    ("tdse", "dx"): ("tdse_dx", _float),
    ("tdse", "dt"): ("tdse_dt", _float),
    ("tdse", "dwell_x1"): ("dwell_x1", _float),
    ("tdse", "dwell_x2"): ("dwell_x2", _float),
    ("tdse", "snapshots"): ("snapshots", _text),
    ("tdse", "snapshot_every"): ("snapshot_every", int),
    ("verify", "tdse"): ("verify_tdse", _bool),
    ("verify", "cancellation"): ("verify_cancellation", _bool),
}
_FIELD_KEY = {f: k for k, (f, _) in SCHEMA.items()}
POTENTIAL_KINDS = ("free", "delta", "rectangle", "piecewise")


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = "delta"
    omega: float = 2.0
    height: float = 2.0
    width: float = 5.0
    segments: tuple = ()
    p0: float = 1.0
    sigma_p: float = 0.001
    x0: float = None
    hbar: float = 1.0
    mass: float = 1.0
    x_min: float = -20.0
    x_max: float = 40.0
    n_x: int = 2048
    n_energy: int = None
    width_sigmas: float = 8.0
    time_ordered: bool = False
    kappa: float = 0.0
    X: float = None
    x2: float = 40.0
    tdse_sigma_p: float = 0.05
    tdse_x0: float = -120.0
    tdse_dx: float = 0.05
    tdse_dt: float = 0.05
    dwell_x1: float = -20.0
    dwell_x2: float = 20.0
    snapshots: str = ""
    snapshot_every: int = 0
    verify_tdse: bool = True
    verify_cancellation: bool = True

    def __post_init__(self):
        # module-level invariants, re-checked when the file is read
        if self.kind not in POTENTIAL_KINDS:
            raise DomainError(f"kind must be one of {POTENTIAL_KINDS}")
        if not (np.isfinite(self.omega) and self.omega >= 0):
            raise DomainError("omega must be finite and >= 0")
        if self.height < 0 or not self.width > 0:
            raise DomainError("rectangle needs height >= 0 and width > 0")
        if not self.x_max > self.x_min:
            raise DomainError("x_max must exceed x_min")
        if self.n_x < 2:
            raise DomainError("n_x must be at least 2")
        if self.n_energy is not None and self.n_energy < 2:
            raise DomainError("n_energy must be at least 2")
        if not (self.tdse_dx > 0 and self.tdse_dt > 0):
            raise DomainError("tdse dx and dt must be positive")
        if not self.dwell_x2 > self.dwell_x1:
            raise DomainError("dwell_x2 must exceed dwell_x1")
        if self.snapshot_every < 0:
            raise DomainError("snapshot_every must be >= 0")
        pot = self.potential()
        self.packet()
        self.tdse_packet()
        if not self.x2 > pot.length:
            raise DomainError("x2 must lie behind the barrier")
        if self.X is not None and not self.X > pot.length:
            raise DomainError("X must lie behind the barrier")

    def potential(self):
        if self.kind == "free":
            return PotentialSpec.free()
        if self.kind == "delta":
            return PotentialSpec.delta(self.omega)
        if self.kind == "rectangle":
            return PotentialSpec.rectangle(self.height, self.width)
        return PotentialSpec.piecewise(self.segments)

    def packet(self):
        return PacketSpec(self.p0, self.sigma_p, self.x0, self.mass, self.hbar)

    def tdse_packet(self):
        return PacketSpec(self.p0, self.tdse_sigma_p, self.tdse_x0, self.mass, self.hbar)

    def grid(self):
        return np.linspace(self.x_min, self.x_max, self.n_x)

    def echo(self):
        """Canonical ``[section] key = value`` lines for every setting."""
        lines = []
        for f in fields(self):
            section, key = _FIELD_KEY[f.name]
            v = getattr(self, f.name)
            if v is None:
                text = "auto"
            elif isinstance(v, bool):
                text = str(v).lower()
            elif isinstance(v, float):
                text = repr(v)
            elif f.name == "segments":
                text = ", ".join(":".join(repr(u) for u in seg) for seg in v)
            else:
                text = str(v)
            lines.append(f"[{section}] {key} = {text}")
        return lines


def parse_text(text):
    """Parse scenario text; raises :class:`ConfigError` carrying the line number."""
    section = None
    values = {}
    where = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("malformed section header", lineno)
            section = line[1:-1].strip()
            if section not in {s for s, _ in SCHEMA}:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno)
        if section is None:
            raise ConfigError("key outside of any [section]", lineno)
        key, _, value = (u.strip() for u in line.partition("="))
        if (section, key) not in SCHEMA:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno)
        name, conv = SCHEMA[(section, key)]
        try:
            values[name] = conv(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno) from None
        where[name] = lineno
    try:
        return ScenarioConfig(**values)
    except (DomainError, ValueError) as exc:
        # point at the setting named first in the message, else the last line read
        msg = str(exc)
        line = max(where.values()) if where else 0
        hits = []
        for name, ln in where.items():
            m = re.search(rf"\b{re.escape(_FIELD_KEY[name][1])}\b", msg)
            if m:
                hits.append((m.start(), ln))
        if hits:
            line = min(hits)[1]
        raise ConfigError(str(exc), line) from None


def parse_config(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    return parse_text(path.read_text(encoding="utf-8"))


def shipped_config(name):
    """Path of a bundled scenario such as ``'fig2'``."""
    return Path(__file__).with_name("configs") / f"{name}.cfg"


def with_overrides(cfg, **kw):
    return replace(cfg, **kw)
