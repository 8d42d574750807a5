"""INI run configuration with one section per module.

Missing keys fall back to the published simulation setup (alpha 4,
mu 0.1, lambda 1e-4 per m^2) scaled to desk size (5000 runs, 200 BSs on
average). :meth:`RunConfig.to_ini` writes every resolved value back out,
so a manifest re-runs to identical outputs.
"""

from __future__ import annotations

import configparser
import io
import logging
from dataclasses import dataclass, field, fields

from . import __version__
from .experiments import SCHEMES, ExperimentConfig
from .geometry import DeploymentConfig
from .pair_allocation import EQUAL_RATE, OBJECTIVES
from .threshold import METHODS

log = logging.getLogger(__name__)

DEFAULT_MU = 0.1
DEFAULT_MEAN_BS = 200.0


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    parts = text.replace(",", " ").split()
    if not parts:
        raise ConfigError("empty list")
    return tuple(float(p) for p in parts)


def _words(text: str) -> tuple[str, ...]:
    parts = tuple(text.replace(",", " ").split())
    if not parts:
        raise ConfigError("empty list")
    return parts


def _join(values) -> str:
    return " ".join(repr(float(v)) if isinstance(v, float) else str(v) for v in values)


@dataclass
class RunConfig:
    # geometry
    density: float = 1e-4
    mean_bs: float = DEFAULT_MEAN_BS
    guard_fraction: float = 0.2
    # rate-control
    epsilon: tuple[float, ...] = (1e-2, 1e-2)
    alpha: float = 4.0
    phi_method: str = "approximate"
    r_a: float | None = None
    interferers_a: tuple[float, ...] | None = None
    r_b: float | None = None
    interferers_b: tuple[float, ...] | None = None
    # pair-allocation
    mu: float | None = None
    p_total: float = 1.0
    objective: str = EQUAL_RATE
    phi_a: float | None = None
    phi_b: float | None = None
    # threshold-distribution
    theta_db: tuple[float, ...] = (-40.0, 10.0, 1.0)
    method: str = "inversion"
    inverter: str = "euler"
    # experiments
    runs: int = 5000
    seed: int = 0
    mu_grid: tuple[float, ...] = (0.1,)
    alpha_grid: tuple[float, ...] = (4.0,)
    density_grid: tuple[float, ...] = (1e-4,)
    objectives: tuple[str, ...] = OBJECTIVES
    schemes: tuple[str, ...] = SCHEMES
    max_batches: int = 20
    audit_epsilons: tuple[float, ...] = (1e-1, 1e-2)
    audit_realizations: int = 20
    audit_draws: int = 100_000
    # cli
    command: str | None = None
    figure: str | None = None
    mu_defaulted: bool = field(default=False, repr=False)

    def __post_init__(self):
        if len(self.epsilon) == 1:
            self.epsilon = self.epsilon * 2
        if len(self.epsilon) != 2:
            raise ConfigError("epsilon takes one or two values")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}")
        if self.method not in METHODS[:2]:
            raise ConfigError(f"method must be one of {METHODS[:2]}")
        if self.phi_method not in ("approximate", "exact"):
            raise ConfigError("phi_method must be 'approximate' or 'exact'")
        if len(self.theta_db) != 3 or self.theta_db[2] <= 0 or self.theta_db[1] < self.theta_db[0]:
            raise ConfigError("theta_db is 'start stop step' with step > 0 and stop >= start")

    @property
    def mu_value(self) -> float:
        return DEFAULT_MU if self.mu is None else self.mu

    def deployment(self) -> DeploymentConfig:
        return DeploymentConfig.from_mean_count(
            self.density, self.mean_bs, guard_fraction=self.guard_fraction, seed=self.seed
        )

    def experiment(self) -> ExperimentConfig:
        try:
            return ExperimentConfig(
                runs=self.runs,
                deployment=self.deployment(),
                epsilon=tuple(self.epsilon),
                mu_grid=self.mu_grid,
                alpha_grid=self.alpha_grid,
                density_grid=self.density_grid,
                objectives=self.objectives,
                schemes=self.schemes,
                seed=self.seed,
                max_batches=self.max_batches,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    # --- INI mapping -------------------------------------------------

    SECTIONS = {
        "geometry": ("density", "mean_bs", "guard_fraction"),
        "rate-control": ("epsilon", "alpha", "phi_method", "r_a", "interferers_a", "r_b", "interferers_b"),
        "pair-allocation": ("mu", "p_total", "objective", "phi_a", "phi_b"),
        "threshold-distribution": ("theta_db", "method", "inverter"),
        "experiments": (
            "runs", "seed", "mu_grid", "alpha_grid", "density_grid", "objectives", "schemes",
            "max_batches", "audit_epsilons", "audit_realizations", "audit_draws",
        ),
        "cli": ("command", "figure"),
    }

    @classmethod
    def from_parser(cls, parser: configparser.ConfigParser) -> "RunConfig":
        known = {k for keys in cls.SECTIONS.values() for k in keys}
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for section in parser.sections():
            if section not in cls.SECTIONS and section != "manifest":
                raise ConfigError(f"unknown section [{section}]")
            if section == "manifest":
                continue
            for key, raw in parser.items(section):
                if key not in cls.SECTIONS[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                try:
                    kw[key] = _convert(types[key], raw)
                except ValueError as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}") from exc
        assert set(kw) <= known
        cfg = cls(**kw)
        if cfg.mu is None:
            cfg.mu_defaulted = True
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        return cls.from_parser(parser)

    def to_ini(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        parser["manifest"] = {"package": "nomarate", "version": __version__}
        for section, keys in self.SECTIONS.items():
            parser[section] = {}
            for key in keys:
                value = self.mu_value if key == "mu" else getattr(self, key)
                if value is None:
                    continue
                if isinstance(value, tuple):
                    parser[section][key] = _join(value)
                elif isinstance(value, float):
                    parser[section][key] = repr(value)
                else:
                    parser[section][key] = str(value)
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()


def _convert(kind, raw: str):
    kind = str(kind)
    if "tuple[float" in kind:
        return _floats(raw)
    if "tuple[str" in kind:
        return _words(raw)
    if kind.startswith("int"):
        return int(raw)
    if kind.startswith("float"):
        return float(raw)
    return raw.strip()
