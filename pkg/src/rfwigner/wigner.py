"""Wigner functions of Fock-basis density matrices and their negativity.

Phase-space coordinates follow ``x + ip = sqrt(2) alpha``, so the vacuum is
``exp(-(x^2 + p^2)) / pi``. Logarithms are natural.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import gammaln

IMAG_RESIDUE_TOL = 1e-8
NORMALIZATION_TOL = 1e-2


class HermiticityError(ValueError):
    pass


class UnnormalizedGridError(ValueError):
    pass


def laguerre(m: int, k: int, u) -> np.ndarray:
    """Associated Laguerre polynomial ``L_m^k(u)`` by upward recurrence in ``m``."""
    u = np.asarray(u, dtype=float)
    prev = np.ones_like(u)
    if m == 0:
        return prev
    cur = 1.0 + k - u
    for j in range(1, m):
        prev, cur = cur, ((2 * j + 1 + k - u) * cur - (j + k) * prev) / (j + 1)
    return cur


def wigner_element(m: int, n: int, x, p):
    """Wigner function ``W_mn(x, p)`` of the operator ``|m><n|``, so ``W = sum_mn rho_mn W_mn``."""
    if m < 0 or n < 0:
        raise ValueError("Fock indices must be non-negative")
    if n < m:
        return np.conj(wigner_element(n, m, x, p))
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    r2 = x * x + p * p
    k = n - m
    log_pref = 0.5 * (k * math.log(2.0) + gammaln(m + 1) - gammaln(n + 1))
    sign = -1.0 if m % 2 else 1.0
    z = (x + 1j * p) ** k
    return sign * math.exp(log_pref) / math.pi * np.exp(-r2) * z * laguerre(m, k, 2.0 * r2)


def _wigner_values(rho, x, p) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    D = rho.shape[0]
    r2 = x * x + p * p
    u = 2.0 * r2
    gauss = np.exp(-r2) / math.pi
    total = np.zeros(np.broadcast(x, p).shape, dtype=complex)
    z = np.ones_like(total)
    zk = x + 1j * p
    for k in range(D):
        # L_m^k for m = 0 .. D-1-k by recurrence in m
        prev = np.ones_like(u)
        cur = None
        for m in range(D - k):
            if m == 0:
                L = prev
            elif m == 1:
                cur = 1.0 + k - u
                L = cur
            else:
                prev, cur = cur, ((2 * (m - 1) + 1 + k - u) * cur - (m - 1 + k) * prev) / m
                L = cur
            n = m + k
            coef = (-1.0) ** m * math.exp(0.5 * (k * math.log(2.0) + gammaln(m + 1) - gammaln(n + 1)))
            w = coef * z * L
            if k == 0:
                total += rho[m, m] * w
            else:
                total += rho[m, n] * w + rho[n, m] * np.conj(w)
        z = z * zk
    return total * gauss


def wigner_values(rho, x, p) -> np.ndarray:
    """Real Wigner function of ``rho`` at points ``(x, p)`` (broadcast)."""
    vals = _wigner_values(rho, np.asarray(x, dtype=float), np.asarray(p, dtype=float))
    if np.max(np.abs(vals.imag), initial=0.0) > IMAG_RESIDUE_TOL:
        raise HermiticityError("density matrix is not Hermitian: Wigner function has an imaginary part")
    return vals.real


@dataclass
class WignerGrid:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # (len(x), len(p))

    @property
    def spec(self) -> dict:
        return {"x_min": float(self.x[0]), "x_max": float(self.x[-1]),
                "p_min": float(self.p[0]), "p_max": float(self.p[-1]),
                "nx": int(self.x.size), "np": int(self.p.size)}

    def integrate(self, f=None) -> float:
        v = self.values if f is None else f
        return float(trapezoid(trapezoid(v, self.p, axis=1), self.x))

    def marginal_x(self) -> np.ndarray:
        return trapezoid(self.values, self.p, axis=1)


def wigner_grid(rho, x_range=(-5.0, 5.0), p_range=(-5.0, 5.0), nx: int = 201,
                np_: int = 201) -> WignerGrid:
    x = np.linspace(*x_range, nx)
    p = np.linspace(*p_range, np_)
    X, P = np.meshgrid(x, p, indexing="ij")
    return WignerGrid(x, p, wigner_values(rho, X, P))


def _abs_and_total(g: WignerGrid) -> tuple[float, float]:
    total = g.integrate()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise UnnormalizedGridError(f"grid integral {total:.4f} deviates from 1")
    return g.integrate(np.abs(g.values)), total


def wln(g: WignerGrid) -> float:
    """Wigner logarithmic negativity ``log int |W|``.

    Both integrals are taken relative to the grid's own integral of ``W``, so
    truncation of the grid cancels and ``wln = log(1 + integrated_negativity)``
    holds exactly.
    """
    a, total = _abs_and_total(g)
    return max(math.log(a / total), 0.0)


def integrated_negativity(g: WignerGrid) -> float:
    """``int (|W| - W)``, relative to the grid integral of ``W``."""
    a, total = _abs_and_total(g)
    return max((a - total) / total, 0.0)


def mixture_wigner(rho1: float, x, p):
    """Wigner function of ``(1 - rho1)|0><0| + rho1 |1><1|``."""
    if not 0.0 <= rho1 <= 1.0:
        raise ValueError("single-photon probability must lie in [0, 1]")
    r2 = np.asarray(x, dtype=float) ** 2 + np.asarray(p, dtype=float) ** 2
    return np.exp(-r2) / math.pi * (1.0 + 2.0 * rho1 * (r2 - 1.0))


def write_grid(path, g: WignerGrid, sidecar=None) -> None:
    """``x,p,W`` rows plus a JSON sidecar with the grid spec and negativities."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "p", "W"])
        for i, xv in enumerate(g.x):
            for j, pv in enumerate(g.p):
                w.writerow([repr(float(xv)), repr(float(pv)), repr(float(g.values[i, j]))])
    if sidecar is not None:
        meta = {"grid": g.spec, "wln": wln(g), "integrated_negativity": integrated_negativity(g)}
        with open(sidecar, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=1)
