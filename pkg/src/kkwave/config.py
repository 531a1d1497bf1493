"""Flat ``section.key = value`` run configuration.

Example::

    # free packet, no force
    grid.x_min = -409.6
    grid.x_max = 409.6
    grid.n = 8192
    packet.d = 100
    packet.w = 1.2
    packet.p0 = 1
    potential.variant = single_pole
    potential.V0 = 10
    potential.alpha = 0.2
    potential.envelope_b = 60
    force.variant = cosine
    force.F0 = 0.25
    force.T = 40
    solver.dt = 0.0025
    solver.t_final = 100
    solver.strobe = 0.5

Unknown keys and malformed values are rejected, all problems reported at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError

_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _bool(s):
    if isinstance(s, bool):
        return s
    try:
        return _BOOL[str(s).strip().lower()]
    except KeyError:
        raise ValueError(f"not a boolean: {s!r}") from None


def _opt_float(s):
    if s is None or str(s).strip().lower() in ("", "none"):
        return None
    return float(s)


def _choice(*options):
    def conv(s):
        s = str(s).strip()
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}; got {s!r}")
        return s
    return conv


# key -> (converter, default)
SCHEMA = {
    "grid.x_min": (float, -409.6),
    "grid.x_max": (float, 409.6),
    "grid.n": (int, 8192),
    "packet.d": (float, 100.0),
    "packet.w": (float, 1.2),
    "packet.p0": (float, 1.0),
    "packet.part": (_choice("full", "right", "left"), "full"),
    "potential.variant": (_choice("zero", "gaussian", "single_pole", "poschl_teller",
                                  "tabulated"), "zero"),
    "potential.V0": (float, 10.0),
    "potential.alpha": (float, 0.2),
    "potential.n": (int, 1),
    "potential.file": (str, ""),
    "potential.envelope_b": (_opt_float, None),
    "potential.envelope_order": (int, 4),
    "force.variant": (_choice("zero", "cosine", "tabulated", "tailored"), "zero"),
    "force.F0": (float, 0.0),
    "force.T": (float, 40.0),
    "force.period": (_opt_float, None),
    "force.file": (str, ""),
    "force.x_init": (_opt_float, None),
    "force.p_init": (_opt_float, None),
    "solver.engine": (_choice("split_step", "momentum", "kh_frame", "gordon_volkov"),
                      "split_step"),
    "solver.dt": (float, 0.0025),
    "solver.t_final": (float, 100.0),
    "solver.strobe": (float, 0.5),
    "solver.tol": (_opt_float, None),
    "diagnostics.enabled": (_bool, False),
    "diagnostics.probe_d": (_opt_float, None),
    "diagnostics.v_d": (float, -0.2),
    "diagnostics.x_w": (_opt_float, None),
    "diagnostics.t_w": (_opt_float, None),
    "diagnostics.factor": (float, 10.0),
    "scenario.F0_list": (str, "0,0.1,0.25,0.5"),
    "scenario.taus": (str, "4,2,1,0.5"),
    "scenario.shift_amplitude": (float, 2.0),
    "scenario.alpha0": (float, 0.05),
    "scenario.alpha_period": (float, 20.0),
    "output.dir": (str, "kkwave_out"),
    "output.snapshots": (_bool, True),
    "output.field_csv": (_bool, False),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def replace(self, **updates) -> "RunConfig":
        """Copy with ``section__key=value`` style updates (dots as ``__``)."""
        raw = {k.replace("__", "."): v for k, v in updates.items()}
        return self.with_overrides(raw)

    def with_overrides(self, raw: dict) -> "RunConfig":
        merged = dict(self.values)
        merged.update(_convert(raw))
        _validate(merged)
        return RunConfig(merged)

    def to_text(self) -> str:
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in self.values.items())

    def write(self, path) -> None:
        Path(path).write_text(self.to_text())


def _fmt(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _convert(raw: dict) -> dict:
    errors, out = [], {}
    for key, val in raw.items():
        if key not in SCHEMA:
            errors.append(f"unknown key {key!r}")
            continue
        conv = SCHEMA[key][0]
        try:
            out[key] = conv(val)
        except (TypeError, ValueError) as exc:
            errors.append(f"{key}: {exc}")
    if errors:
        raise ConfigurationError("invalid configuration:\n  " + "\n  ".join(errors))
    return out


def _validate(v: dict) -> None:
    errors = []
    if v["grid.x_max"] <= v["grid.x_min"]:
        errors.append("grid.x_max must exceed grid.x_min")
    n = v["grid.n"]
    if n < 16 or n & (n - 1):
        errors.append("grid.n must be a power of two >= 16")
    if v["packet.w"] <= 0:
        errors.append("packet.w must be positive")
    for k in ("solver.dt", "solver.t_final", "solver.strobe"):
        if not v[k] > 0:
            errors.append(f"{k} must be positive")
    if v["potential.variant"] == "tabulated" and not v["potential.file"]:
        errors.append("potential.file is required for a tabulated potential")
    if v["force.variant"] == "tabulated" and not v["force.file"]:
        errors.append("force.file is required for a tabulated force")
    if v["potential.variant"] == "single_pole" and not v["potential.alpha"] > 0:
        errors.append("potential.alpha must be positive for single_pole")
    if v["force.variant"] == "cosine" and not v["force.T"] > 0:
        errors.append("force.T must be positive")
    if v["force.variant"] == "tailored" and v["diagnostics.enabled"]:
        errors.append("diagnostics need a force with zero net impulse and displacement; "
                      "a tailored force does not satisfy them")
    if errors:
        raise ConfigurationError("invalid configuration:\n  " + "\n  ".join(errors))


def float_list(text: str) -> list:
    try:
        return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"expected a comma-separated list of numbers: {text!r}")


def defaults() -> RunConfig:
    return RunConfig({k: d for k, (_, d) in SCHEMA.items()})


def parse_text(text: str, base: RunConfig | None = None) -> RunConfig:
    raw, errors = {}, []
    for i, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {i}: expected 'key = value'")
            continue
        k, val = (s.strip() for s in line.split("=", 1))
        if k in raw:
            errors.append(f"line {i}: duplicate key {k!r}")
        raw[k] = val
    try:
        converted = _convert(raw)
    except ConfigurationError as exc:
        errors += str(exc).splitlines()[1:]
    if errors:
        raise ConfigurationError("invalid configuration:\n  " + "\n  ".join(
            e.strip() for e in errors))
    return (base or defaults()).with_overrides(converted)


def load(path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    return parse_text(p.read_text())


def parse_overrides(items) -> dict:
    """``["a.b=1", ...]`` -> ``{"a.b": "1"}``."""
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out
