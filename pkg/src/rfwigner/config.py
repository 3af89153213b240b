"""Flat run configuration shared by the pipeline harnesses and the CLI."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ChannelSet, DriveParams, Setup
from .modefilter import ModeFilter, boxcar, exponential, load_custom
from .trajectory import SmeConfig


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class RunConfig:
    """All parameters of one ensemble -> histogram -> MLE -> Wigner run.

    Rates and times are in units of the radiative rate of the monitored
    channel (``gamma = 1`` for the semi-infinite waveguide).
    """

    setup: str = "semi-infinite"
    omega: float = 1.0 / math.sqrt(8.0)
    phase: float = 0.0
    gamma1: float = 1.0
    gamma2: float = 0.0
    gamma_phi: float = 0.0
    gamma_nr: float = 0.0
    dt: float = 1e-3
    t0: float = 15.0
    T: float = 4.0
    trajectories: int = 1000
    angles: int = 20
    bins: int = 100
    x_min: float = -5.0
    x_max: float = 5.0
    cutoff: int = 5
    tol: float = 1e-6
    max_iter: int = 20000
    seed: int = 0
    output_dir: str = "out"
    # "boxcar", "exponential" (rate = filter_rate or the total decay) or "custom"
    filter: str = "boxcar"
    filter_rate: float = 0.0
    filter_file: str = ""
    # "ground", "excited" or "steady"; "steady" with t0 = 0 skips the warm-up
    initial: str = "ground"
    drive_offset: bool = False
    integrator: str = "kraus"
    subdivisions: int = 256
    grid_points: int = 201
    workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        try:
            Setup(self.setup)
        except ValueError:
            raise ConfigError("setup", f"unknown setup {self.setup!r}") from None
        for name in ("omega", "phase", "gamma1", "gamma2", "gamma_phi", "gamma_nr", "dt", "t0",
                     "T", "x_min", "x_max", "tol", "filter_rate"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(name, f"must be a finite real, got {v!r}")
        if self.omega < 0:
            raise ConfigError("omega", "drive amplitude must be >= 0")
        for name in ("gamma2", "gamma_phi", "gamma_nr", "t0", "filter_rate"):
            if getattr(self, name) < 0:
                raise ConfigError(name, "must be >= 0")
        for name in ("gamma1", "dt", "T", "tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(name, "must be > 0")
        if self.setup == Setup.SEMI_INFINITE.value and self.gamma2 != 0:
            raise ConfigError("gamma2", "the semi-infinite setup has a single channel")
        if self.setup == Setup.INFINITE.value and not self.gamma2 > 0:
            raise ConfigError("gamma2", "the infinite setup needs gamma2 > 0")
        for name in ("t0", "T"):
            v = getattr(self, name)
            if abs(round(v / self.dt) * self.dt - v) > 1e-9 * max(v, 1.0):
                raise ConfigError(name, f"must be a multiple of dt={self.dt}")
        for name, lo in (("trajectories", 1), ("angles", 1), ("bins", 1), ("cutoff", 1),
                         ("max_iter", 0), ("subdivisions", 2), ("grid_points", 3), ("workers", 1)):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < lo:
                raise ConfigError(name, f"must be an integer >= {lo}, got {v!r}")
        if not self.x_max > self.x_min:
            raise ConfigError("x_max", "histogram range must satisfy x_min < x_max")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) \
                or not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be an integer in [0, 2^64)")
        if self.filter not in ("boxcar", "exponential", "custom"):
            raise ConfigError("filter", f"unknown filter {self.filter!r}")
        if self.filter == "custom" and not self.filter_file:
            raise ConfigError("filter_file", "custom filter needs a t,f CSV file")
        if self.initial not in ("ground", "excited", "steady"):
            raise ConfigError("initial", f"unknown initial state {self.initial!r}")
        if self.integrator not in ("kraus", "euler"):
            raise ConfigError("integrator", f"unknown integrator {self.integrator!r}")

    # derived objects

    def channels(self) -> ChannelSet:
        return ChannelSet(self.gamma1, self.gamma2, self.gamma_phi, self.gamma_nr, Setup(self.setup))

    def drive(self) -> DriveParams:
        return DriveParams(self.omega, self.phase)

    def sme_config(self, seed: int | None = None) -> SmeConfig:
        return SmeConfig(self.drive(), self.channels(), dt=self.dt, t0=self.t0, T=self.T,
                         seed=self.seed if seed is None else seed, initial=self.initial,
                         drive_offset=self.drive_offset, integrator=self.integrator)

    def mode_filter(self) -> ModeFilter:
        if self.filter == "boxcar":
            return boxcar(self.t0, self.T)
        if self.filter == "exponential":
            rate = self.filter_rate or self.channels().total_decay
            return exponential(self.t0, rate, self.T)
        f = load_custom(self.filter_file)
        if abs(f.t0 - self.t0) > 1e-9 or abs(f.T - self.T) > 1e-9:
            raise ConfigError("filter_file", f"filter support [{f.t0}, +{f.T}] does not match [t0, +T]")
        return f

    def thetas(self) -> np.ndarray:
        """``angles`` LO phases in equal steps over a quarter turn (20 -> 4.5 degrees)."""
        return 0.5 * math.pi * np.arange(self.angles) / self.angles

    def edges(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.bins + 1)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")
        return cls(**data)


def load_config(path) -> dict:
    """Flat JSON object of configuration keys (dashes or underscores)."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError("config", "config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def rates_from_physical(gamma_mhz: float, gamma_phi_khz: float = 0.0,
                        gamma_nr_khz: float = 0.0) -> dict:
    """Convert a radiative rate in MHz and decoherence rates in kHz to ``gamma = 1`` units."""
    if not gamma_mhz > 0:
        raise ConfigError("ghz_scale", "radiative rate must be positive")
    scale = 1e3 * gamma_mhz
    return {"gamma_phi": gamma_phi_khz / scale, "gamma_nr": gamma_nr_khz / scale}


def decoherence_budget(gamma_mhz: float = 20.0, budget_khz: float = 89.0,
                       ratio: float = 2.0) -> dict:
    """Split ``gamma_nr + 2 gamma_phi = budget`` with ``gamma_nr = ratio * gamma_phi``."""
    gphi = budget_khz / (ratio + 2.0)
    return rates_from_physical(gamma_mhz, gphi, ratio * gphi)
