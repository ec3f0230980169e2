"""Experiment configuration: flat dotted key-value files, validation, builders.

The config format is plain text, one ``key = value`` per line, ``#`` comments,
dotted section names (``stream.kind``, ``schedule.eta_exponent``).  Unknown
keys and malformed values are hard errors carrying the line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bandit import BDAConfig, run_bda
from .baselines import run_exp3, run_uniform
from .dual_averaging import run_da
from .errors import ConfigError
from .grids import BoxDomain, Grid
from .losses import (
    BanditChannel,
    BiasedChannel,
    ExactChannel,
    LossStream,
    UnbiasedChannel,
    default_trig_stream,
    to_payoff,
)
from .regret import RegretTrace, default_checkpoints
from .regularizers import Regularizer
from .schedules import Schedule

__all__ = ["ExperimentConfig", "parse_config", "run_seed"]

_DEFAULT_GRID_N = {1: 1024, 2: 64, 3: 16}

_ALGORITHMS = ("da", "bda", "exp3_grid", "uniform")
_STREAM_KINDS = ("trig_mixture", "drifting", "finite_sum")
_CHANNEL_KINDS = ("exact", "unbiased", "biased", "bandit")
_REG_FAMILIES = ("negentropy", "quadratic", "burg", "tsallis")


def _parse_bool(s: str) -> bool:
    low = s.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _parse_floats(s: str) -> list[float]:
    return [float(part) for part in s.split(",")]


def parse_seed_spec(s: str) -> list[int]:
    """Seed lists: ``0..15`` (inclusive range) or ``1,5,9``."""
    s = s.strip()
    if ".." in s:
        a, b = s.split("..")
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ValueError(f"empty seed range {s!r}")
        return list(range(lo, hi + 1))
    return [int(part) for part in s.split(",")]


@dataclass
class ExperimentConfig:
    """One experiment: domain, algorithm, adversary, schedules, seeds, output."""

    dim: int = 1
    lower: list = field(default_factory=lambda: [0.0])
    upper: list = field(default_factory=lambda: [1.0])
    grid_n: int | None = None
    algorithm: str = "da"
    reg_family: str = "negentropy"
    reg_gamma: float | None = None
    stream_kind: str = "trig_mixture"
    stream_seed: int = 0
    stream_terms: int = 5
    stream_payoff: bool = False
    drift_rate: float = 0.0
    drift_exponent: float = 0.5
    channel_kind: str = "exact"
    noise_scale: float = 0.5
    bias_scale: float = 0.0
    bias_decay: float = 1.0
    eta_coef: float | None = None
    eta_exponent: float | None = None
    delta_coef: float | None = None
    delta_exponent: float | None = None
    eps_coef: float = 0.5
    eps_exponent: float | None = None
    exp3_arms: int = 32
    horizon: int = 1000
    seeds: list = field(default_factory=lambda: [0])
    checkpoint_start: int = 100
    checkpoint_ratio: float = 1.3
    out: str = "results"

    def validate(self) -> None:
        if self.dim < 1:
            raise ConfigError("domain.dim must be >= 1")
        if len(self.lower) not in (1, self.dim) or len(self.upper) not in (1, self.dim):
            raise ConfigError("domain bounds must have 1 or dim entries")
        if self.algorithm not in _ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {_ALGORITHMS}")
        if self.stream_kind not in _STREAM_KINDS:
            raise ConfigError(f"stream.kind must be one of {_STREAM_KINDS}")
        if self.channel_kind not in _CHANNEL_KINDS:
            raise ConfigError(f"channel.kind must be one of {_CHANNEL_KINDS}")
        if self.reg_family not in _REG_FAMILIES:
            raise ConfigError(f"regularizer.family must be one of {_REG_FAMILIES}")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if not self.seeds:
            raise ConfigError("at least one seed required")
        for name in ("eta_exponent", "delta_exponent", "eps_exponent", "drift_exponent"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.algorithm in ("bda", "exp3_grid", "uniform") and not self.stream_payoff:
            raise ConfigError(f"algorithm {self.algorithm!r} requires stream.payoff = true")
        if self.algorithm == "bda" and self.channel_kind not in ("bandit",):
            raise ConfigError("algorithm 'bda' uses channel.kind = bandit")
        if self.algorithm == "da" and self.channel_kind == "bandit":
            raise ConfigError("algorithm 'da' needs a function-valued channel")
        if self.stream_kind == "drifting" and self.drift_rate == 0.0:
            raise ConfigError("drifting stream needs stream.drift_rate > 0")
        if self.checkpoint_ratio <= 1.0:
            raise ConfigError("checkpoint.ratio must exceed 1")

    # domain / grid -----------------------------------------------------

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array(self.lower if len(self.lower) == self.dim else self.lower * self.dim)
        hi = np.array(self.upper if len(self.upper) == self.dim else self.upper * self.dim)
        return lo, hi

    def build_grid(self) -> Grid:
        lo, hi = self.bounds()
        n = self.grid_n
        if n is None:
            n = _DEFAULT_GRID_N.get(self.dim, 8)
        return Grid(BoxDomain(lo, hi), n)

    def build_stream(self, grid: Grid) -> LossStream:
        if self.stream_kind == "finite_sum":
            raise ConfigError(
                "finite_sum streams carry arbitrary components and are "
                "constructed programmatically, not from config files"
            )
        base = default_trig_stream(
            grid,
            seed=self.stream_seed,
            n_terms=self.stream_terms,
            drift_rate=self.drift_rate if self.stream_kind == "drifting" else 0.0,
            drift_exponent=self.drift_exponent,
        )
        return to_payoff(base) if self.stream_payoff else base

    def build_channel(self):
        if self.channel_kind == "exact":
            return ExactChannel()
        if self.channel_kind == "unbiased":
            return UnbiasedChannel(self.noise_scale)
        if self.channel_kind == "biased":
            return BiasedChannel(self.noise_scale, self.bias_scale, self.bias_decay)
        return BanditChannel()

    def build_regularizer(self) -> Regularizer:
        return Regularizer(self.reg_family, self.reg_gamma)

    def eta_schedule(self, stream: LossStream) -> Schedule:
        coef = self.eta_coef
        if coef is None:
            coef = 1.0 / stream.V  # keep scores O(t^{1-p}) at the loss scale
        expo = self.eta_exponent
        if expo is None:
            expo = (self.dim + 2) / (self.dim + 3) if self.algorithm == "bda" else 0.5
        return Schedule(coef, expo)

    def bda_config(self, grid: Grid, stream: LossStream) -> BDAConfig:
        d = self.dim
        delta_coef = self.delta_coef if self.delta_coef is not None else grid.domain.diameter / 4
        delta_expo = self.delta_exponent if self.delta_exponent is not None else 1 / (d + 3)
        eps_expo = self.eps_exponent if self.eps_exponent is not None else 1 / (d + 3)
        return BDAConfig(
            eta=self.eta_schedule(stream),
            delta=Schedule(delta_coef, delta_expo, floor=2.0 * grid.cell_diameter),
            eps=Schedule(self.eps_coef, eps_expo) if self.eps_coef > 0 else None,
        )

    def checkpoints(self) -> np.ndarray:
        return default_checkpoints(self.horizon, self.checkpoint_start, self.checkpoint_ratio)


# Mapping of config-file keys to (attribute, converter).
_KEYS = {
    "domain.dim": ("dim", int),
    "domain.lower": ("lower", _parse_floats),
    "domain.upper": ("upper", _parse_floats),
    "grid.n": ("grid_n", int),
    "algorithm": ("algorithm", str),
    "regularizer.family": ("reg_family", str),
    "regularizer.gamma": ("reg_gamma", float),
    "stream.kind": ("stream_kind", str),
    "stream.seed": ("stream_seed", int),
    "stream.terms": ("stream_terms", int),
    "stream.payoff": ("stream_payoff", _parse_bool),
    "stream.drift_rate": ("drift_rate", float),
    "stream.drift_exponent": ("drift_exponent", float),
    "channel.kind": ("channel_kind", str),
    "channel.noise_scale": ("noise_scale", float),
    "channel.bias_scale": ("bias_scale", float),
    "channel.bias_decay": ("bias_decay", float),
    "schedule.eta_coef": ("eta_coef", float),
    "schedule.eta_exponent": ("eta_exponent", float),
    "schedule.delta_coef": ("delta_coef", float),
    "schedule.delta_exponent": ("delta_exponent", float),
    "schedule.eps_coef": ("eps_coef", float),
    "schedule.eps_exponent": ("eps_exponent", float),
    "exp3.arms": ("exp3_arms", int),
    "horizon": ("horizon", int),
    "seeds": ("seeds", parse_seed_spec),
    "checkpoint.start": ("checkpoint_start", int),
    "checkpoint.ratio": ("checkpoint_ratio", float),
    "out": ("out", str),
}


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse and validate a config file's text; errors carry line numbers."""
    cfg = ExperimentConfig()
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        attr, conv = _KEYS[key]
        try:
            setattr(cfg, attr, conv(value))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    try:
        cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), source=path)


def run_seed(cfg: ExperimentConfig, seed: int) -> RegretTrace:
    """Run one algorithm instance with the given seed; deterministic in (cfg, seed)."""
    grid = cfg.build_grid()
    stream = cfg.build_stream(grid)
    rng = np.random.default_rng(seed)
    checkpoints = cfg.checkpoints()
    if cfg.algorithm == "da":
        return run_da(
            grid,
            cfg.build_regularizer(),
            stream,
            cfg.build_channel(),
            cfg.eta_schedule(stream),
            cfg.horizon,
            rng,
            checkpoints=checkpoints,
        )
    if cfg.algorithm == "bda":
        return run_bda(grid, stream, cfg.bda_config(grid, stream), cfg.horizon, rng,
                       checkpoints=checkpoints)
    if cfg.algorithm == "exp3_grid":
        return run_exp3(grid, stream, cfg.exp3_arms, cfg.horizon, rng,
                        checkpoints=checkpoints)
    return run_uniform(grid, stream, cfg.horizon, rng, checkpoints=checkpoints)
