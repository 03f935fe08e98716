"""Structured text configuration: key = value entries grouped in sections.

Example::

    [experiment]
    kind = sweep
    seed = 7

    [grid]
    n = 256
    half_width = 8.0

    [trap]
    kind = harmonic_plus
    A = 1.0
    w_kind = bump
    w_far_field = 1.0
    w_depth = 1.0
    w_sign = -1

    [params]
    a = 5.0
    omega = 0.05
    a_values = 0, 1, 5
    omega_values = 0, 0.5, 1

    [solver]
    tau = 5e-3
    max_iters = 20000
    tol = 1e-7

Scalar keys `a`/`omega` drive single runs; the `*_values` lists drive
sweeps.  Unknown sections or keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field

from .fields import Grid2D
from .flow import SolverOptions
from .model import GPParams, Trap, WSpec

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "trap_to_config",
    "trap_from_config",
    "params_to_config",
    "params_from_config",
]

EXPERIMENT_KINDS = ("townes", "solve", "sweep", "smallomega", "critical", "trial", "uniqueness")

_KNOWN_KEYS = {
    "experiment": {"kind", "seed", "out"},
    "grid": {"n", "half_width"},
    "trap": {"kind", "a", "s", "w_kind", "w_far_field", "w_depth", "w_sign", "w_s"},
    "params": {"a", "omega", "a_values", "omega_values"},
    "solver": {
        "tau", "max_iters", "tol", "collapse_threshold", "boundary_threshold",
        "check_interval", "deconfine_steps", "monotone_window",
    },
    "townes": {"dr", "r_max", "cross_check"},
    "lattice": {"sigma_values", "radius_factor"},
    "uniqueness": {"restarts"},
    "output": {"snapshots"},
}


class ConfigError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"[{where}] {message}")
        self.where = where


class _Section:
    """Typed accessors with key context in every error."""

    def __init__(self, name: str, data: dict[str, str]):
        self.name = name
        self.data = data

    def _raw(self, key, default):
        if key in self.data:
            return self.data[key]
        if default is not _REQUIRED:
            return default
        raise ConfigError(f"{self.name}.{key}", "required key is missing")

    def get_float(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None or isinstance(raw, (int, float)):
            return raw
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{self.name}.{key}", f"not a number: {raw!r}") from None

    def get_int(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None or isinstance(raw, int):
            return raw
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{self.name}.{key}", f"not an integer: {raw!r}") from None

    def get_str(self, key, default=None):
        raw = self._raw(key, default)
        return raw if raw is None else str(raw).strip()

    def get_bool(self, key, default=False):
        raw = self._raw(key, default)
        if isinstance(raw, bool):
            return raw
        val = str(raw).strip().lower()
        if val in ("1", "true", "yes", "on"):
            return True
        if val in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{self.name}.{key}", f"not a boolean: {raw!r}")

    def get_floats(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None or isinstance(raw, list):
            return raw
        try:
            return [float(tok) for tok in str(raw).split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"{self.name}.{key}", f"not a number list: {raw!r}") from None


_REQUIRED = object()


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    out: str | None
    grid: Grid2D
    trap: Trap
    a: float | None
    omega: float | None
    a_values: list[float] | None
    omega_values: list[float] | None
    solver: SolverOptions
    townes_dr: float
    townes_r_max: float
    townes_cross_check: bool
    sigma_values: list[float]
    radius_factor: float
    restarts: int
    snapshots: bool
    config_hash: str = field(default="", repr=False)

    @property
    def params(self) -> GPParams:
        if self.a is None:
            raise ConfigError("params.a", "required for this experiment kind")
        return GPParams(a=self.a, omega=self.omega if self.omega is not None else 0.0)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, "r") as fh:
            text = fh.read()
        return cls.from_text(text)

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            parser.read_file(io.StringIO(text))
        except configparser.Error as exc:
            raise ConfigError("syntax", str(exc)) from None

        for section in parser.sections():
            if section not in _KNOWN_KEYS:
                raise ConfigError(section, "unknown section")
            for key in parser[section]:
                if key not in _KNOWN_KEYS[section]:
                    raise ConfigError(f"{section}.{key}", "unknown key")

        def sec(name):
            return _Section(name, dict(parser[name]) if parser.has_section(name) else {})

        exp = sec("experiment")
        kind = exp.get_str("kind", _REQUIRED)
        if kind not in EXPERIMENT_KINDS:
            raise ConfigError("experiment.kind", f"must be one of {EXPERIMENT_KINDS}, got {kind!r}")

        gridsec = sec("grid")
        grid = Grid2D(
            n=gridsec.get_int("n", 256),
            half_width=gridsec.get_float("half_width", 8.0),
        )

        trap = cls._parse_trap(sec("trap"))

        params = sec("params")
        solver_sec = sec("solver")
        solver = SolverOptions(
            tau=solver_sec.get_float("tau", 5e-3),
            max_iters=solver_sec.get_int("max_iters", 20000),
            tol=solver_sec.get_float("tol", 1e-7),
            collapse_threshold=solver_sec.get_float("collapse_threshold", 50.0),
            boundary_threshold=solver_sec.get_float("boundary_threshold", 0.05),
            check_interval=solver_sec.get_int("check_interval", 25),
            deconfine_steps=solver_sec.get_int("deconfine_steps", 200),
            monotone_window=solver_sec.get_int("monotone_window", 100),
        )

        townes_sec = sec("townes")
        lattice = sec("lattice")
        uniq = sec("uniqueness")
        output = sec("output")

        cfg = cls(
            kind=kind,
            seed=exp.get_int("seed", 0),
            out=exp.get_str("out", None),
            grid=grid,
            trap=trap,
            a=params.get_float("a", None),
            omega=params.get_float("omega", None),
            a_values=params.get_floats("a_values", None),
            omega_values=params.get_floats("omega_values", None),
            solver=solver,
            townes_dr=townes_sec.get_float("dr", 1e-4),
            townes_r_max=townes_sec.get_float("r_max", 15.0),
            townes_cross_check=townes_sec.get_bool("cross_check", False),
            sigma_values=lattice.get_floats("sigma_values", [2.0, 4.0, 8.0]),
            radius_factor=lattice.get_float("radius_factor", 4.0),
            restarts=uniq.get_int("restarts", 3),
            snapshots=output.get_bool("snapshots", False),
        )
        cfg.config_hash = hashlib.sha256(text.encode()).hexdigest()[:16]
        return cfg

    @staticmethod
    def _parse_trap(sec: _Section) -> Trap:
        kind = sec.get_str("kind", "harmonic")
        try:
            if kind == "harmonic":
                return Trap.harmonic(A=sec.get_float("a", 1.0))
            if kind == "power":
                return Trap.power(s=sec.get_float("s", 2.0))
            if kind == "harmonic_plus":
                w = WSpec(
                    kind=sec.get_str("w_kind", _REQUIRED),
                    far_field=sec.get_float("w_far_field", 0.0),
                    depth=sec.get_float("w_depth", 1.0),
                    sign=sec.get_int("w_sign", -1),
                    s=sec.get_float("w_s", 1.0),
                )
                return Trap.harmonic_plus(A=sec.get_float("a", 1.0), w=w)
        except (ValueError, TypeError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("trap", str(exc)) from None
        raise ConfigError("trap.kind", f"unknown trap kind {kind!r}")


def trap_to_config(trap: Trap) -> str:
    """Serialize a trap back to its [trap] section."""
    lines = ["[trap]", f"kind = {trap.kind}"]
    if trap.kind == "power":
        lines.append(f"s = {trap.s!r}")
    else:
        lines.append(f"a = {trap.A!r}")
    if trap.kind == "harmonic_plus":
        w = trap.w
        lines += [
            f"w_kind = {w.kind}",
            f"w_far_field = {w.far_field!r}",
        ]
        if w.kind != "constant":
            lines += [f"w_depth = {w.depth!r}", f"w_sign = {w.sign}"]
        if w.kind == "tail":
            lines.append(f"w_s = {w.s!r}")
    return "\n".join(lines) + "\n"


def params_to_config(params: GPParams) -> str:
    return f"[params]\na = {params.a!r}\nomega = {params.omega!r}\n"


def _section_from_text(text: str, name: str) -> _Section:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise ConfigError("syntax", str(exc)) from None
    if not parser.has_section(name):
        raise ConfigError(name, "section is missing")
    return _Section(name, dict(parser[name]))


def trap_from_config(text: str) -> Trap:
    return ExperimentConfig._parse_trap(_section_from_text(text, "trap"))


def params_from_config(text: str) -> GPParams:
    sec = _section_from_text(text, "params")
    return GPParams(a=sec.get_float("a", _REQUIRED), omega=sec.get_float("omega", 0.0))
