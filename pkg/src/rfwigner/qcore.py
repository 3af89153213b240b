"""Dense linear algebra and state primitives.

Operators and density matrices are plain complex ``numpy`` arrays. The atom
basis is fixed as index 0 = ground ``|g>``, index 1 = excited ``|e>``.
"""

from __future__ import annotations

import json

import numpy as np
from scipy.special import gammaln

HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-9
EIGEN_FLOOR = -1e-9


class DimensionError(ValueError):
    """Operands have incompatible or non-square shapes."""


class InvalidStateError(ValueError):
    """Matrix is not a valid density matrix within tolerance."""


def _square(a, name="matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def _same_dims(a, b):
    a = _square(a, "a")
    b = _square(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def pauli_lowering() -> np.ndarray:
    """Atomic lowering operator ``|g><e|``."""
    return np.array([[0, 1], [0, 0]], dtype=complex)


def pauli_raising() -> np.ndarray:
    return pauli_lowering().conj().T


def pauli_z() -> np.ndarray:
    """``|e><e| - |g><g|``."""
    return np.diag([-1.0, 1.0]).astype(complex)


def ket(n: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def projector(n: int, dim: int) -> np.ndarray:
    v = ket(n, dim)
    return np.outer(v, v.conj())


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def annihilation(dim: int) -> np.ndarray:
    """Truncated bosonic annihilation operator on Fock states ``0..dim-1``."""
    return np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)


def coherent_state(alpha: complex, dim: int) -> np.ndarray:
    """Density matrix of ``|alpha>`` truncated to ``dim`` Fock states and renormalized."""
    if alpha == 0:
        return projector(0, dim)
    n = np.arange(dim)
    log_mag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    psi = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    return pure_state(psi)


def dagger(a) -> np.ndarray:
    return np.asarray(a).conj().T


def hermitian_part(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().T)


def check_density_matrix(rho, tol: float = HERMITIAN_TOL, floor: float = EIGEN_FLOOR) -> np.ndarray:
    """Validate and return ``rho`` as a complex array.

    Raises
    ------
    DimensionError
        If ``rho`` is not square.
    InvalidStateError
        If the trace, Hermiticity, or eigenvalue floor is violated.
    """
    rho = _square(rho, "rho")
    if abs(np.trace(rho) - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace {np.trace(rho)} differs from 1")
    if np.linalg.norm(rho - rho.conj().T) > tol:
        raise InvalidStateError("matrix is not Hermitian")
    lam = np.linalg.eigvalsh(hermitian_part(rho))
    if lam.min() < floor:
        raise InvalidStateError(f"negative eigenvalue {lam.min():.3e}")
    return rho


def normalize(rho) -> np.ndarray:
    """Hermitize and rescale to unit trace."""
    rho = hermitian_part(_square(rho, "rho"))
    return rho / np.trace(rho).real


def purity(rho) -> float:
    rho = _square(rho, "rho")
    return float(np.real(np.trace(rho @ rho)))


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(hermitian_part(a))
    # round-off eigenvalues would contribute sqrt(eps) to the result
    lam = np.where(lam > 10 * np.finfo(float).eps * max(lam.max(), 0.0), lam, 0.0)
    return (vec * np.sqrt(lam)) @ vec.conj().T


def fidelity(a, b) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(a) b sqrt(a)))**2 = ||sqrt(a) sqrt(b)||_1**2``."""
    a, b = _same_dims(a, b)
    f = np.sum(np.linalg.svd(_psd_sqrt(a) @ _psd_sqrt(b), compute_uv=False)) ** 2
    return float(min(max(f, 0.0), 1.0))


def frobenius_distance(a, b) -> float:
    a, b = _same_dims(a, b)
    return float(np.linalg.norm(a - b))


def pearson(xs, ys) -> float:
    """Sample Pearson correlation coefficient.

    Raises ``ValueError`` for unequal lengths, fewer than two points, or
    a zero-variance input.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-D and of equal length")
    if x.size < 2:
        raise ValueError("need at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = np.dot(dx, dx)
    syy = np.dot(dy, dy)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("correlation undefined for zero variance")
    r = np.dot(dx, dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def density_matrix_to_dict(rho, **metadata) -> dict:
    rho = _square(rho, "rho")
    out = {
        "dim": int(rho.shape[0]),
        "re": rho.real.tolist(),
        "im": rho.imag.tolist(),
    }
    out.update(metadata)
    return out


def density_matrix_from_dict(d: dict) -> np.ndarray:
    rho = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
    if rho.shape != (d["dim"], d["dim"]):
        raise DimensionError(f"declared dim {d['dim']} does not match entries {rho.shape}")
    return rho


def dump_density_matrix(rho, path, **metadata) -> None:
    # json writes floats with repr(), i.e. 17 significant digits
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(density_matrix_to_dict(rho, **metadata), fh, indent=1)


def load_density_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return density_matrix_from_dict(json.load(fh))
