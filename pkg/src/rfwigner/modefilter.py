"""Real temporal mode functions selecting one wavepacket mode of the output field."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid


class FilterKind(str, enum.Enum):
    BOXCAR = "boxcar"
    EXPONENTIAL = "exponential"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class ModeFilter:
    """Mode function ``f(t)`` supported on ``[t0, t0 + T]``, normalized to ``int f^2 dt = 1``.

    Custom filters carry tabulated ``(times, samples)`` and are linearly
    interpolated between samples.
    """

    kind: FilterKind
    t0: float
    T: float
    rate: float = 0.0
    times: np.ndarray | None = None
    samples: np.ndarray | None = None

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        inside = (t >= self.t0) & (t <= self.t0 + self.T)
        if self.kind is FilterKind.BOXCAR:
            vals = np.full(t.shape, 1.0 / math.sqrt(self.T))
        elif self.kind is FilterKind.EXPONENTIAL:
            g = self.rate
            c = math.sqrt(g / -math.expm1(-g * self.T))
            vals = c * np.exp(-0.5 * g * (t - self.t0))
        else:
            vals = np.interp(t, self.times, self.samples)
        return np.where(inside, vals, 0.0)

    def n_steps(self, dt: float) -> int:
        n = round(self.T / dt)
        if n < 1 or abs(n * dt - self.T) > 1e-9 * max(self.T, 1.0):
            raise ValueError(f"dt={dt} does not divide the filter duration T={self.T}")
        return n

    def weights(self, dt: float) -> np.ndarray:
        """Samples at ``t0 + k dt`` for the ``T/dt`` steps of the window, rescaled so ``sum f^2 dt = 1``."""
        n = self.n_steps(dt)
        t = self.t0 + dt * np.arange(n)
        if self.kind is FilterKind.BOXCAR:
            return np.full(n, 1.0 / math.sqrt(n * dt))
        f = self(t)
        norm = math.sqrt(np.sum(f * f) * dt)
        if norm == 0:
            raise ValueError("filter vanishes on the sampling grid")
        return f / norm

    def norm(self, n_points: int = 200001) -> float:
        """``int f^2 dt`` by trapezoidal quadrature."""
        t = np.linspace(self.t0, self.t0 + self.T, n_points)
        return float(trapezoid(self(t) ** 2, t))


def boxcar(t0: float, T: float) -> ModeFilter:
    if not T > 0:
        raise ValueError(f"duration must be positive, got {T}")
    return ModeFilter(FilterKind.BOXCAR, float(t0), float(T))


def exponential(t0: float, rate: float, T: float) -> ModeFilter:
    """Emission profile of a decaying atom, ``c exp(-rate (t - t0) / 2)`` truncated to ``T``."""
    if not rate > 0:
        raise ValueError(f"decay rate must be positive, got {rate}")
    if not T > 0:
        raise ValueError(f"duration must be positive, got {T}")
    return ModeFilter(FilterKind.EXPONENTIAL, float(t0), float(T), rate=float(rate))


def custom(times, samples) -> ModeFilter:
    t = np.asarray(times, dtype=float)
    f = np.asarray(samples, dtype=float)
    if t.ndim != 1 or t.shape != f.shape or t.size < 2:
        raise ValueError("times and samples must be equal-length 1-D arrays with >= 2 points")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    if not np.all(np.isfinite(f)):
        raise ValueError("samples must be finite real values")
    norm = math.sqrt(trapezoid(f * f, t))
    if norm == 0:
        raise ValueError("filter is identically zero")
    return ModeFilter(FilterKind.CUSTOM, float(t[0]), float(t[-1] - t[0]),
                      times=t, samples=f / norm)


def load_custom(path) -> ModeFilter:
    """Read ``t,f`` pairs (header row required) and renormalize."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return custom([float(r["t"]) for r in rows], [float(r["f"]) for r in rows])


def overlap(a: ModeFilter, b: ModeFilter, t=None, n_points: int = 400001) -> float:
    """``|int a(t) b(t) dt|^2`` by trapezoidal quadrature on ``t``.

    ``t`` defaults to a uniform grid spanning both supports; an explicit grid
    must cover both.
    """
    lo = min(a.t0, b.t0)
    hi = max(a.t0 + a.T, b.t0 + b.T)
    if t is None:
        t = np.linspace(lo, hi, n_points)
    else:
        t = np.asarray(t, dtype=float)
        if t.ndim != 1 or np.any(np.diff(t) <= 0):
            raise ValueError("grid must be 1-D and strictly increasing")
        if t[0] > lo + 1e-12 or t[-1] < hi - 1e-12:
            raise ValueError("grid does not cover both filter supports")
    return float(trapezoid(a(t) * b(t), t) ** 2)
