"""Lindblad dynamics of the driven two-level atom.

All rates are in units of the radiative rate (gamma = 1 in the default
semi-infinite setup). Superoperators act on column-stacked density
matrices: ``vec(A rho B) = (B.T kron A) vec(rho)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .qcore import DimensionError, hermitian_part, pauli_lowering, pauli_raising, pauli_z


class Setup(str, enum.Enum):
    SEMI_INFINITE = "semi-infinite"
    INFINITE = "infinite"


class DegenerateSteadyStateError(RuntimeError):
    pass


class UnsupportedConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelSet:
    """Decay channels of one physical setup.

    ``gamma1`` is the monitored waveguide channel, ``gamma2`` the unmonitored
    transmitted channel of an infinite waveguide, ``gamma_nr`` nonradiative
    decay (unmonitored ``sigma_-`` channel) and ``gamma_phi`` pure dephasing.
    """

    gamma1: float = 1.0
    gamma2: float = 0.0
    gamma_phi: float = 0.0
    gamma_nr: float = 0.0
    setup: Setup = Setup.SEMI_INFINITE

    def __post_init__(self):
        object.__setattr__(self, "setup", Setup(self.setup))
        for name in ("gamma1", "gamma2", "gamma_phi", "gamma_nr"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a finite rate >= 0, got {v}")
        if self.setup is Setup.SEMI_INFINITE and self.gamma2 != 0:
            raise ValueError("gamma2 must be 0 for the semi-infinite setup")
        if self.setup is Setup.INFINITE and self.gamma2 <= 0:
            raise ValueError("gamma2 must be > 0 for the infinite setup")

    @property
    def total_decay(self) -> float:
        """Total rate of all ``sigma_-`` channels."""
        return self.gamma1 + self.gamma2 + self.gamma_nr

    @classmethod
    def semi_infinite(cls, gamma=1.0, gamma_phi=0.0, gamma_nr=0.0):
        return cls(gamma1=gamma, gamma_phi=gamma_phi, gamma_nr=gamma_nr)

    @classmethod
    def infinite(cls, gamma1=0.5, gamma2=0.5, gamma_phi=0.0, gamma_nr=0.0):
        return cls(gamma1, gamma2, gamma_phi, gamma_nr, Setup.INFINITE)


@dataclass(frozen=True)
class DriveParams:
    omega_mag: float
    phase: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.omega_mag) and self.omega_mag >= 0):
            raise ValueError(f"omega_mag must be finite and >= 0, got {self.omega_mag}")
        object.__setattr__(self, "phase", float(self.phase) % (2 * math.pi))

    @property
    def omega(self) -> complex:
        return self.omega_mag * complex(math.cos(self.phase), math.sin(self.phase))


def dissipator(L, rho) -> np.ndarray:
    """``L rho L^+ - (L^+ L rho + rho L^+ L) / 2``."""
    L = np.asarray(L, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if L.shape != rho.shape:
        raise DimensionError(f"dimension mismatch: {L.shape} vs {rho.shape}")
    Ld = L.conj().T
    LdL = Ld @ L
    return L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL)


def drive_hamiltonian(d: DriveParams, c: ChannelSet) -> np.ndarray:
    """Resonant drive in the atom frame, ``-i sqrt(gamma1) (Omega s+ - Omega* s-)``."""
    om = d.omega
    return -1j * math.sqrt(c.gamma1) * (om * pauli_raising() - np.conj(om) * pauli_lowering())


def lindblad_rhs(rho, d: DriveParams, c: ChannelSet) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DimensionError(f"atom state must be 2x2, got {rho.shape}")
    H = drive_hamiltonian(d, c)
    sm = pauli_lowering()
    out = -1j * (H @ rho - rho @ H)
    out += c.total_decay * dissipator(sm, rho)
    if c.gamma_phi:
        out += 0.5 * c.gamma_phi * dissipator(pauli_z(), rho)
    return out


def _lindblad_super(L: np.ndarray) -> np.ndarray:
    eye = np.eye(L.shape[0])
    LdL = L.conj().T @ L
    return np.kron(L.conj(), L) - 0.5 * np.kron(eye, LdL) - 0.5 * np.kron(LdL.T, eye)


def liouvillian(d: DriveParams, c: ChannelSet) -> np.ndarray:
    """4x4 generator acting on column-stacked atom density matrices."""
    H = drive_hamiltonian(d, c)
    eye = np.eye(2)
    out = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    out += c.total_decay * _lindblad_super(pauli_lowering())
    out += 0.5 * c.gamma_phi * _lindblad_super(pauli_z())
    return out


def evolve(rho0, d: DriveParams, c: ChannelSet, t: float) -> np.ndarray:
    """Exact unconditional state at time ``t``."""
    v = np.asarray(rho0, dtype=complex).reshape(-1, order="F")
    v = scipy.linalg.expm(liouvillian(d, c) * t) @ v
    return hermitian_part(v.reshape(2, 2, order="F"))


def steady_state_numeric(d: DriveParams, c: ChannelSet) -> np.ndarray:
    L = liouvillian(d, c)
    s = scipy.linalg.svdvals(L)
    n_null = int(np.sum(s < 1e-10 * max(s.max(), 1.0)))
    if n_null != 1:
        raise DegenerateSteadyStateError(f"null space of the Liouvillian has dimension {n_null}")
    v = scipy.linalg.null_space(L, rcond=1e-10)[:, 0]
    rho = v.reshape(2, 2, order="F")
    rho = hermitian_part(rho / np.trace(rho))
    return rho / np.trace(rho).real


def expect(op, rho) -> complex:
    return complex(np.trace(np.asarray(op) @ np.asarray(rho)))


def sigma_minus_ss_analytic(d: DriveParams, c: ChannelSet) -> complex:
    """Closed-form steady-state ``<sigma_->`` of the atom in front of a mirror.

    ``-2 sqrt(g) Omega / (g + 2 Gphi + 8 |Omega|^2)``, which reduces to
    ``-2 Omega / (8 Omega^2 + 2 Gphi + 1)`` at ``g = 1``.
    """
    if c.setup is not Setup.SEMI_INFINITE:
        raise UnsupportedConfigurationError("closed form only for the semi-infinite setup")
    if c.gamma_nr > 0:
        raise UnsupportedConfigurationError("no closed form with nonradiative decay")
    g = c.gamma1
    return -2 * math.sqrt(g) * d.omega / (g + 2 * c.gamma_phi + 8 * d.omega_mag**2)
