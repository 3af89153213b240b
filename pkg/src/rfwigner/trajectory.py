"""Homodyne quantum trajectories of the driven atom.

Integration of the Ito stochastic master equation with the first channel
monitored at local-oscillator angle ``theta``. The default integrator is the
first-order Kraus-form step ``rho -> M rho M^+ + sum_k L_k rho L_k^+ dt``
(normalized) with ``M = 1 - (iH + sum L^+L/2) dt + sqrt(g1) L_theta dy``,
which keeps the conditional state positive; plain Euler-Maruyama is
available as ``integrator="euler"`` and raises on lost positivity. The filtered
photocurrent ``J = sum_i f(t_i) dj_i`` over the window ``[t0, t0 + T)`` is the
quadrature sample of one trajectory.

Two implementations are kept: :func:`sme_step` / :func:`photocurrent_increment`
work on dense matrices and serve as reference, while the compiled batch
kernel used by :func:`run_trajectory` and :func:`run_ensemble` works on the
three real parameters of a 2x2 density matrix.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from . import rng
from .dynamics import (ChannelSet, DriveParams, drive_hamiltonian, lindblad_rhs,
                       steady_state_numeric)
from .modefilter import ModeFilter
from .qcore import hermitian_part, pauli_lowering, pauli_z

EIGEN_STEP_FLOOR = -1e-6


class StepSizeError(RuntimeError):
    """Conditional state lost positivity; use a smaller ``dt``."""


@dataclass(frozen=True)
class SmeConfig:
    drive: DriveParams
    channels: ChannelSet
    theta: float = 0.0
    dt: float = 1e-3
    t0: float = 15.0
    T: float = 4.0
    seed: int = 0
    # "ground", "excited", "steady" (exact steady state of drive + channels)
    # or an explicit 2x2 density matrix
    initial: object = "ground"
    # add the reflected coherent drive to the recorded signal
    drive_offset: bool = False
    integrator: str = "kraus"
    # Wiener increment of step i is sum_j z[i k + j] sqrt(dt / k), j < k, so a
    # run at dt with k = 2 follows the same Brownian path as a run at dt / 2
    noise_substeps: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t0 < 0:
            raise ValueError("t0 must be >= 0")
        if not self.T > 0:
            raise ValueError("T must be positive")
        for name in ("t0", "T"):
            v = getattr(self, name)
            if abs(round(v / self.dt) * self.dt - v) > 1e-9 * max(v, 1.0):
                raise ValueError(f"dt={self.dt} does not divide {name}={v}")
        if self.integrator not in ("kraus", "euler"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.noise_substeps) < 1:
            raise ValueError("noise_substeps must be >= 1")

    @property
    def n_wait(self) -> int:
        return round(self.t0 / self.dt)

    @property
    def n_window(self) -> int:
        return round(self.T / self.dt)

    def initial_state(self) -> np.ndarray:
        if isinstance(self.initial, str):
            if self.initial == "ground":
                return np.diag([1.0, 0.0]).astype(complex)
            if self.initial == "excited":
                return np.diag([0.0, 1.0]).astype(complex)
            if self.initial == "steady":
                return steady_state_numeric(self.drive, self.channels)
            raise ValueError(f"unknown initial state {self.initial!r}")
        rho = np.asarray(self.initial, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError("initial state must be 2x2")
        return rho


@dataclass
class TrajectoryRecord:
    theta: float
    J: float
    seed: int
    final_state: np.ndarray = field(repr=False)


def _measurement_term(rho, cfg: SmeConfig) -> np.ndarray:
    L = np.exp(-1j * cfg.theta) * pauli_lowering()
    Ld = L.conj().T
    m = np.trace((L + Ld) @ rho)
    return L @ rho + rho @ Ld - m * rho


def sme_step(rho_c, cfg: SmeConfig, dW: float) -> np.ndarray:
    """One Euler-Maruyama step of the conditional state, renormalized and Hermitized."""
    rho_c = np.asarray(rho_c, dtype=complex)
    drho = lindblad_rhs(rho_c, cfg.drive, cfg.channels) * cfg.dt
    drho += math.sqrt(cfg.channels.gamma1) * _measurement_term(rho_c, cfg) * dW
    out = hermitian_part(rho_c + drho)
    out /= np.trace(out).real
    lam = np.linalg.eigvalsh(out).min()
    if lam < EIGEN_STEP_FLOOR:
        raise StepSizeError(f"eigenvalue {lam:.2e} after step; reduce dt (now {cfg.dt})")
    return out


def kraus_step(rho_c, cfg: SmeConfig, dW: float) -> np.ndarray:
    """Positivity-preserving step with the same first-order Ito expansion as :func:`sme_step`."""
    rho_c = np.asarray(rho_c, dtype=complex)
    ch = cfg.channels
    sm = pauli_lowering()
    sz = pauli_z()
    L = np.exp(-1j * cfg.theta) * sm
    m = np.trace((L + L.conj().T) @ rho_c).real
    dy = dW + math.sqrt(ch.gamma1) * m * cfg.dt
    H = drive_hamiltonian(cfg.drive, ch)
    K = -1j * H - 0.5 * (ch.total_decay * sm.conj().T @ sm + 0.5 * ch.gamma_phi * sz @ sz)
    M = np.eye(2) + K * cfg.dt + math.sqrt(ch.gamma1) * L * dy
    out = M @ rho_c @ M.conj().T
    out += (ch.gamma2 + ch.gamma_nr) * cfg.dt * sm @ rho_c @ sm.conj().T
    out += 0.5 * ch.gamma_phi * cfg.dt * sz @ rho_c @ sz
    out = hermitian_part(out)
    return out / np.trace(out).real


def wiener_increments(cfg: SmeConfig, key: int, n: int) -> np.ndarray:
    """The ``n`` Wiener increments the compiled kernel uses for stream ``key``."""
    k = int(cfg.noise_substeps)
    z = rng.gaussians(key, n * k).reshape(n, k).sum(axis=1) / math.sqrt(k)
    return math.sqrt(cfg.dt) * z


def _drive_offset(cfg: SmeConfig) -> float:
    """Reflected-drive contribution per unit time, ``sqrt(2) Re(Omega e^{-i theta})``."""
    if not cfg.drive_offset:
        return 0.0
    return math.sqrt(2.0) * (cfg.drive.omega * np.exp(-1j * cfg.theta)).real


def photocurrent_increment(rho_c, cfg: SmeConfig, dW: float) -> float:
    """``j dt`` for the pre-step state ``rho_c`` and the same ``dW`` given to :func:`sme_step`."""
    sm = pauli_lowering()
    e = np.exp(-1j * cfg.theta)
    m = np.trace((np.conj(e) * sm.conj().T + e * sm) @ np.asarray(rho_c)).real
    signal = (math.sqrt(cfg.channels.gamma1) * m * cfg.dt + dW) / math.sqrt(2.0)
    return signal + _drive_offset(cfg) * cfg.dt


@numba.njit(cache=True, nogil=True, fastmath=True, error_model="numpy")
def _simulate(seeds, theta, h, g1, gdec, gunmon, gphi, dt, n_wait, weights, offset,
              euler, substeps, a0, b0, d0, J, states, status):
    """Integrate one trajectory per seed.

    State is ``rho = [[a, b], [conj(b), d]]`` in the ``(g, e)`` basis;
    ``h`` is the Hamiltonian element ``<g|H|e>``, ``gdec`` the total
    ``sigma_-`` rate and ``gunmon`` its unmonitored part.
    """
    e = complex(math.cos(theta), -math.sin(theta))
    sg1 = math.sqrt(g1)
    sdt = math.sqrt(dt)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    coh_decay = 0.5 * gdec + gphi
    m00 = 1.0 - 0.25 * gphi * dt
    m11 = m00 - 0.5 * gdec * dt
    m10 = -1j * h.conjugate() * dt
    deph = 0.5 * gphi * dt
    n_win = weights.shape[0]
    n_total = n_wait + n_win
    for k in range(seeds.shape[0]):
        key = seeds[k]
        a = a0
        b = b0
        d = d0
        acc = 0.0
        bad = 0
        z0 = 0.0
        z1 = 0.0
        z2 = 0.0
        z3 = 0.0
        for i in range(n_total):
            if substeps == 1:
                r = i & 3
                if r == 0:
                    z0, z1, z2, z3 = rng.gaussian_block(key, i >> 2)
                    z = z0
                elif r == 1:
                    z = z1
                elif r == 2:
                    z = z2
                else:
                    z = z3
            else:
                z = 0.0
                for j in range(substeps):
                    idx = i * substeps + j
                    z += rng.gaussian_block(key, idx >> 2)[idx & 3]
                z /= math.sqrt(substeps)
            dW = sdt * z
            bc = b.conjugate()
            m = 2.0 * (e * bc).real
            if i >= n_wait:
                incr = (sg1 * m * dt + dW) * inv_sqrt2 + offset * dt
                acc += weights[i - n_wait] * incr
            if euler:
                da = 2.0 * (h * bc).imag + gdec * d
                db = -1j * h * (d - a) - coh_decay * b
                da_m = m * d
                db_m = e * d - m * b
                na = a + da * dt + sg1 * da_m * dW
                nd = d - da * dt - sg1 * da_m * dW
                nb = b + db * dt + sg1 * db_m * dW
            else:
                dy = dW + sg1 * m * dt
                m01 = -1j * h * dt + sg1 * e * dy
                x00 = m00 * a + m01 * bc
                x01 = m00 * b + m01 * d
                x10 = m10 * a + m11 * bc
                x11 = m10 * b + m11 * d
                na = (x00 * m00 + x01 * m01.conjugate()).real + gunmon * dt * d + deph * a
                nb = x00 * m10.conjugate() + x01 * m11 - deph * b
                nd = (x10 * m10.conjugate() + x11 * m11).real + deph * d
            tr = na + nd
            a = na / tr
            d = nd / tr
            b = nb / tr
            disc = (a - d) * (a - d) + 4.0 * (b.real * b.real + b.imag * b.imag)
            if 0.5 * (1.0 - math.sqrt(disc)) < -1e-6:
                bad = 1
                break
        J[k] = acc
        states[k, 0] = a
        states[k, 1] = b
        states[k, 2] = d
        status[k] = bad


def _window_weights(cfg: SmeConfig, filt: ModeFilter) -> np.ndarray:
    if abs(filt.T - cfg.T) > 1e-9 * max(cfg.T, 1.0) or abs(filt.t0 - cfg.t0) > 1e-9 * max(cfg.t0, 1.0):
        raise ValueError(f"filter window [{filt.t0}, +{filt.T}] does not match [{cfg.t0}, +{cfg.T}]")
    return np.ascontiguousarray(filt.weights(cfg.dt))


def _run_batch(cfg: SmeConfig, theta: float, seeds: np.ndarray, weights: np.ndarray):
    rho0 = cfg.initial_state()
    h = complex(drive_hamiltonian(cfg.drive, cfg.channels)[0, 1])
    ch = cfg.channels
    n = seeds.shape[0]
    J = np.empty(n)
    states = np.empty((n, 3), dtype=complex)
    status = np.zeros(n, dtype=np.int64)
    offset = _drive_offset(dataclasses.replace(cfg, theta=theta))
    _simulate(seeds, float(theta), h, ch.gamma1, ch.total_decay, ch.gamma2 + ch.gamma_nr,
              ch.gamma_phi, cfg.dt, cfg.n_wait, weights, offset, cfg.integrator == "euler",
              int(cfg.noise_substeps),
              complex(rho0[0, 0]).real, complex(rho0[0, 1]),
              complex(rho0[1, 1]).real, J, states, status)
    if status.any():
        raise StepSizeError(f"{int(status.sum())} trajectories lost positivity; reduce dt (now {cfg.dt})")
    return J, states


def _as_matrices(states: np.ndarray) -> np.ndarray:
    rho = np.empty((states.shape[0], 2, 2), dtype=complex)
    rho[:, 0, 0] = states[:, 0]
    rho[:, 0, 1] = states[:, 1]
    rho[:, 1, 0] = states[:, 1].conj()
    rho[:, 1, 1] = states[:, 2]
    return rho


def run_trajectory(cfg: SmeConfig, filt: ModeFilter) -> TrajectoryRecord:
    """Wait ``t0`` unrecorded, then integrate the filtered signal over ``T``."""
    seeds = np.array([cfg.seed], dtype=np.uint64)
    J, states = _run_batch(cfg, cfg.theta, seeds, _window_weights(cfg, filt))
    return TrajectoryRecord(cfg.theta, float(J[0]), int(cfg.seed), _as_matrices(states)[0])


@dataclass
class Ensemble:
    """Columnar form of a batch of trajectory records."""

    thetas: np.ndarray
    J: np.ndarray
    seeds: np.ndarray
    states: np.ndarray  # (n, 2, 2)

    def records(self) -> list[TrajectoryRecord]:
        return [TrajectoryRecord(float(t), float(j), int(s), r)
                for t, j, s, r in zip(self.thetas, self.J, self.seeds, self.states)]

    def __len__(self):
        return self.J.shape[0]


def simulate_ensemble(cfg: SmeConfig, filt: ModeFilter, n_traj: int, thetas,
                      workers: int = 1, chunk: int = 250) -> Ensemble:
    """``n_traj`` trajectories per angle.

    Trajectory ``i`` at angle index ``a`` runs under the child seed
    ``split_seed(cfg.seed, a, i)``, so the output does not depend on
    ``workers`` or ``chunk``.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    weights = _window_weights(cfg, filt)
    jobs = []
    for a, theta in enumerate(thetas):
        seeds = rng.trajectory_seeds(cfg.seed, a, n_traj)
        for lo in range(0, n_traj, chunk):
            jobs.append((theta, seeds[lo:lo + chunk]))

    def work(job):
        return _run_batch(cfg, job[0], job[1], weights)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]
    return Ensemble(
        thetas=np.repeat(thetas, n_traj),
        J=np.concatenate([r[0] for r in results]),
        seeds=np.concatenate([j[1] for j in jobs]),
        states=_as_matrices(np.concatenate([r[1] for r in results])),
    )


def run_ensemble(cfg: SmeConfig, filt: ModeFilter, n_traj: int, thetas,
                 workers: int = 1) -> list[TrajectoryRecord]:
    return simulate_ensemble(cfg, filt, n_traj, thetas, workers).records()


def write_records(path, records) -> None:
    """CSV with header ``theta_rad,J,seed``; floats in round-trip precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theta_rad", "J", "seed"])
        for r in records:
            w.writerow([repr(float(r.theta)), repr(float(r.J)), int(r.seed)])


def read_records(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(thetas, J, seeds)`` columns of a record file."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["theta_rad", "J", "seed"]:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        rows = list(reader)
    thetas = np.array([float(r["theta_rad"]) for r in rows])
    J = np.array([float(r["J"]) for r in rows])
    seeds = np.array([int(r["seed"]) for r in rows], dtype=np.uint64)
    return thetas, J, seeds
