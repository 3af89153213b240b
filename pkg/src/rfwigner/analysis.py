"""Closed-form observables, the end-to-end pipeline, sweeps and bootstrap studies.

The pipeline runs ensemble -> filtered quadratures -> histograms -> MLE ->
Wigner grid -> WLN for one :class:`~rfwigner.config.RunConfig`. Sweeps keep
the master seed fixed across grid points, so a one-point sweep reproduces a
single pipeline run exactly; bootstrap repeats draw independent seeds.
"""

from __future__ import annotations

import csv
import functools
import hashlib
import json
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import rng
from .config import RunConfig
from .qcore import (annihilation, coherent_state, density_matrix_to_dict, fidelity, pearson,
                    purity)
from .tomography import (HistogramSet, MleResult, ProjectorSet, build_projectors,
                         histograms_from_samples, mle_reconstruct)
from .trajectory import Ensemble, simulate_ensemble
from .wigner import WignerGrid, integrated_negativity, wigner_grid, wln

SWEEP_WLN_FLOOR = 1e-4
_BOOT_STREAM = 0xB0075


# closed forms (semi-infinite waveguide, drive on the monitored channel)

def _lorentz(omega, gamma, gamma_phi):
    return gamma + 2.0 * gamma_phi + 8.0 * omega * omega


def coherent_reflectance(omega: float, gamma: float = 1.0, gamma_phi: float = 0.0) -> float:
    """``r = |<a_out>| / omega = |1 - 2 gamma / (gamma + 2 gamma_phi + 8 omega^2)|``."""
    if not omega > 0:
        raise ValueError("coherent reflectance is undefined for omega <= 0")
    if not gamma > 0 or gamma_phi < 0:
        raise ValueError("need gamma > 0 and gamma_phi >= 0")
    # numerator 8 omega^2 - (gamma - 2 gamma_phi) in factored form, so the
    # root omega = 1/sqrt(8) evaluates to exactly 0 in floating point
    c = gamma - 2.0 * gamma_phi
    a = math.sqrt(8.0) * omega
    num = (a - math.sqrt(c)) * (a + math.sqrt(c)) if c > 0 else a * a - c
    return abs(num) / _lorentz(omega, gamma, gamma_phi)


def incoherent_point(gamma: float = 1.0, gamma_phi: float = 0.0) -> float:
    """Drive strength where the coherent reflectance vanishes, ``sqrt((gamma - 2 gamma_phi) / 8)``."""
    if not gamma > 0 or gamma_phi < 0:
        raise ValueError("need gamma > 0 and gamma_phi >= 0")
    if 2.0 * gamma_phi >= gamma:
        raise ValueError("no incoherent point for gamma_phi >= gamma / 2")
    return math.sqrt((gamma - 2.0 * gamma_phi) / 8.0)


def reflectance_root(gamma: float = 1.0, gamma_phi: float = 0.0) -> float:
    """Root of the signed reflectance found by bracketing, independent of :func:`incoherent_point`."""
    f = lambda w: 1.0 - 2.0 * gamma / _lorentz(w, gamma, gamma_phi)
    hi = 1.0
    while f(hi) <= 0:
        hi *= 2.0
    return brentq(f, 0.0, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps)


def displacement(omega_mag: float, phase: float, T: float) -> complex:
    """Centroid ``x + ip`` of the boxcar-mode state including the reflected drive.

    ``sqrt(2T) (|omega| - 2|omega| / (1 + 8|omega|^2)) exp(i phase)``; the
    bracket is negative below the incoherent point, placing the state opposite
    to the drive phase.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    w = abs(omega_mag)
    return math.sqrt(2.0 * T) * (w - 2.0 * w / (1.0 + 8.0 * w * w)) * complex(math.cos(phase), math.sin(phase))


def coherence_parameter(rho) -> float:
    """``f = |rho_01| / sqrt(rho_0 rho_1)``."""
    rho = np.asarray(rho)
    p0, p1 = rho[0, 0].real, rho[1, 1].real
    if p0 <= 1e-12 or p1 <= 1e-12:
        raise ValueError("coherence parameter undefined: vanishing population")
    return float(abs(rho[0, 1]) / math.sqrt(p0 * p1))


def centroid(rho) -> complex:
    """Phase-space centroid ``x + ip = sqrt(2) <a>``."""
    rho = np.asarray(rho, dtype=complex)
    return complex(math.sqrt(2.0) * np.trace(rho @ annihilation(rho.shape[0])))


def matching_coherent_state(rho) -> np.ndarray:
    """Coherent state with the same centroid as ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    return coherent_state(centroid(rho) / math.sqrt(2.0), rho.shape[0])


# pipeline

@functools.lru_cache(maxsize=8)
def _projectors(thetas: tuple, edges: tuple, cutoff: int, subdivisions: int) -> ProjectorSet:
    return build_projectors(np.array(thetas), np.array(edges), cutoff, subdivisions)


def projectors_for(cfg: RunConfig) -> ProjectorSet:
    return _projectors(tuple(cfg.thetas()), tuple(cfg.edges()), cfg.cutoff, cfg.subdivisions)


def simulate(cfg: RunConfig, seed: int | None = None) -> Ensemble:
    return simulate_ensemble(cfg.sme_config(seed), cfg.mode_filter(), cfg.trajectories,
                             cfg.thetas(), workers=cfg.workers)


def reconstruct(cfg: RunConfig, thetas, J) -> tuple[HistogramSet, MleResult]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        h = histograms_from_samples(thetas, J, cfg.edges())
    p = projectors_for(cfg)
    if h.thetas.shape != p.thetas.shape or not np.allclose(h.thetas, p.thetas, atol=1e-12):
        raise ValueError("record angles do not match the configured angle grid")
    return h, mle_reconstruct(h, p, tol=cfg.tol, max_iter=cfg.max_iter)


def wigner_of(cfg: RunConfig, rho) -> WignerGrid:
    return wigner_grid(rho, (cfg.x_min, cfg.x_max), (cfg.x_min, cfg.x_max),
                       cfg.grid_points, cfg.grid_points)


@dataclass
class PointResult:
    config: RunConfig
    seed: int
    mle: MleResult
    wln: float
    negativity: float
    overflow: int

    @property
    def rho(self) -> np.ndarray:
        return self.mle.rho

    def summary(self) -> dict:
        rho = self.rho
        c = centroid(rho)
        return {"omega": self.config.omega, "T": self.config.T, "seed": self.seed,
                "wln": self.wln, "integrated_negativity": self.negativity,
                "rho0": float(rho[0, 0].real), "rho1": float(rho[1, 1].real),
                "rho2": float(rho[2, 2].real) if rho.shape[0] > 2 else 0.0,
                "purity": purity(rho), "centroid": [c.real, c.imag],
                "overflow": self.overflow, **self.mle.metadata()}


def run_point(cfg: RunConfig, seed: int | None = None) -> PointResult:
    """Full pipeline for one configuration."""
    seed = cfg.seed if seed is None else seed
    ens = simulate(cfg, seed)
    h, res = reconstruct(cfg, ens.thetas, ens.J)
    g = wigner_of(cfg, res.rho)
    return PointResult(cfg, seed, res, wln(g), integrated_negativity(g), int(h.overflow.sum()))


# sweeps

@dataclass
class SweepResult:
    omegas: list
    Ts: list
    wln: np.ndarray  # (len(omegas), len(Ts)), NaN where a point failed
    metadata: dict = field(default_factory=dict)

    def write(self, csv_path, json_path) -> None:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["omega", "T", "wln"])
            for i, o in enumerate(self.omegas):
                for j, t in enumerate(self.Ts):
                    w.writerow([repr(float(o)), repr(float(t)), repr(float(self.wln[i, j]))])
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(self.metadata, fh, indent=1)


def _config_digest(cfg: RunConfig) -> str:
    d = cfg.to_dict()
    for k in ("omega", "T", "output_dir", "workers"):
        d.pop(k)
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def _point_path(checkpoint_dir, omega, T) -> str:
    return os.path.join(checkpoint_dir, f"point_w{omega!r}_T{T!r}.json")


def run_sweep(omegas, Ts, cfg: RunConfig, checkpoint_dir=None) -> SweepResult:
    """WLN on the ``omegas x Ts`` grid.

    Every point uses ``cfg.seed``. With ``checkpoint_dir`` each finished point
    is stored as one JSON file and reused on a later call with the same
    configuration; failed points are stored as missing (NaN) and retried.
    """
    omegas = [float(o) for o in omegas]
    Ts = [float(t) for t in Ts]
    if not omegas or not Ts:
        raise ValueError("sweep ranges must be nonempty")
    digest = _config_digest(cfg)
    if checkpoint_dir is not None:
        os.makedirs(checkpoint_dir, exist_ok=True)
    out = np.full((len(omegas), len(Ts)), np.nan)
    failures = {}
    for i, o in enumerate(omegas):
        for j, t in enumerate(Ts):
            path = None if checkpoint_dir is None else _point_path(checkpoint_dir, o, t)
            if path and os.path.exists(path):
                with open(path, encoding="utf-8") as fh:
                    saved = json.load(fh)
                if saved.get("digest") == digest and saved.get("status") == "ok":
                    out[i, j] = saved["wln"]
                    continue
            try:
                res = run_point(cfg.replace(omega=o, T=t))
                value = res.wln if res.wln >= SWEEP_WLN_FLOOR else 0.0
                entry = {**res.summary(), "status": "ok", "wln": value, "wln_raw": res.wln}
                out[i, j] = value
            except Exception as exc:  # a failed point is recorded, not fatal
                entry = {"status": "failed", "error": f"{type(exc).__name__}: {exc}",
                         "omega": o, "T": t}
                failures[f"{o!r},{t!r}"] = entry["error"]
            if path:
                entry["digest"] = digest
                tmp = path + ".tmp"
                with open(tmp, "w", encoding="utf-8") as fh:
                    json.dump(entry, fh, indent=1)
                os.replace(tmp, path)
    meta = {"trajectories_per_angle": cfg.trajectories, "angles": cfg.angles,
            "seed": cfg.seed, "wln_floor": SWEEP_WLN_FLOOR, "config": cfg.to_dict(),
            "failed_points": failures}
    return SweepResult(omegas, Ts, out, meta)


# bootstrap

def repeat_seed(seed: int, r: int) -> int:
    return rng.split_seed(seed, _BOOT_STREAM, r)


@dataclass
class BootstrapReport:
    states: list
    pairwise_fidelities: list
    wln_values: list
    rho1_values: list
    purity_values: list
    correlations: dict
    seeds: list = field(default_factory=list)
    summaries: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def mean_std(self, values) -> tuple[float, float]:
        v = np.asarray(values, dtype=float)
        return float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0

    @property
    def wln_mean(self) -> float:
        return self.mean_std(self.wln_values)[0]

    @property
    def wln_std(self) -> float:
        return self.mean_std(self.wln_values)[1]

    def to_dict(self) -> dict:
        return {"states": [density_matrix_to_dict(s) for s in self.states],
                "pairwise_fidelities": list(map(float, self.pairwise_fidelities)),
                "wln_values": list(map(float, self.wln_values)),
                "rho1_values": list(map(float, self.rho1_values)),
                "purity_values": list(map(float, self.purity_values)),
                "correlations": self.correlations, "seeds": [str(s) for s in self.seeds],
                "summaries": self.summaries, "metadata": self.metadata}

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)


def _safe_pearson(a, b) -> float:
    try:
        return pearson(a, b)
    except ValueError:
        return float("nan")


def report_from_results(results: list[PointResult], metadata=None) -> BootstrapReport:
    states = [r.rho for r in results]
    pairs = [fidelity(states[i], states[j])
             for i in range(len(states)) for j in range(i + 1, len(states))]
    w = [r.wln for r in results]
    r1 = [float(s[1, 1].real) for s in states]
    pu = [purity(s) for s in states]
    corr = {"wln_vs_rho1": _safe_pearson(w, r1), "wln_vs_purity": _safe_pearson(w, pu)}
    return BootstrapReport(states, pairs, w, r1, pu, corr, [r.seed for r in results],
                           [r.summary() for r in results], dict(metadata or {}))


def bootstrap(cfg: RunConfig, k: int = 20, progress=None) -> BootstrapReport:
    """``k`` reconstructions at identical parameters with independent seeds.

    Repeat ``r`` uses ``repeat_seed(cfg.seed, r)``, so two configurations
    bootstrapped from the same master seed share their noise realizations.
    """
    if k < 2:
        raise ValueError("bootstrap needs k >= 2 repeats")
    results = []
    for r in range(k):
        results.append(run_point(cfg, repeat_seed(cfg.seed, r)))
        if progress is not None:
            progress(r, results[-1])
    return report_from_results(results, {"k": k, "seed": cfg.seed, "config": cfg.to_dict()})
