"""Quadrature histograms and iterative maximum-likelihood state reconstruction."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .qcore import frobenius_distance, hermitian_part

DEFAULT_ANGLES = np.deg2rad(4.5 * np.arange(20))
DEFAULT_EDGES = np.linspace(-5.0, 5.0, 101)
DEFAULT_SUBDIVISIONS = 256
OVERFLOW_WARN_FRACTION = 1e-3
PROB_FLOOR = 1e-300


@dataclass
class HistogramSet:
    thetas: np.ndarray
    edges: np.ndarray
    counts: np.ndarray  # (n_angles, n_bins)
    overflow: np.ndarray = None  # samples outside the bin range, per angle

    def __post_init__(self):
        self.thetas = np.asarray(self.thetas, dtype=float)
        self.edges = np.asarray(self.edges, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.overflow is None:
            self.overflow = np.zeros(len(self.thetas), dtype=np.int64)
        if np.any(np.diff(self.edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if self.counts.shape != (len(self.thetas), len(self.edges) - 1):
            raise ValueError(f"counts shape {self.counts.shape} does not match angles x bins")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def normalized(self) -> np.ndarray:
        """Counts divided by per-angle totals and bin widths (a probability density)."""
        return self.counts / self.totals[:, None] / np.diff(self.edges)[None, :]


def histograms_from_samples(thetas, J, edges=DEFAULT_EDGES) -> HistogramSet:
    """Bin samples ``J`` per distinct angle into ``[edge_j, edge_{j+1})``."""
    thetas = np.asarray(thetas, dtype=float)
    J = np.asarray(J, dtype=float)
    edges = np.asarray(edges, dtype=float)
    if J.size == 0:
        raise ValueError("no samples")
    angles, inverse = np.unique(thetas, return_inverse=True)
    idx = np.searchsorted(edges, J, side="right") - 1
    inside = (idx >= 0) & (idx < len(edges) - 1)
    if not inside.any():
        raise ValueError("all samples fall outside the histogram range")
    counts = np.zeros((len(angles), len(edges) - 1), dtype=np.int64)
    np.add.at(counts, (inverse[inside], idx[inside]), 1)
    overflow = np.bincount(inverse[~inside], minlength=len(angles))
    frac = overflow.sum() / J.size
    if frac > OVERFLOW_WARN_FRACTION:
        warnings.warn(f"{frac:.2%} of samples fall outside [{edges[0]}, {edges[-1]}]",
                      RuntimeWarning, stacklevel=2)
    return HistogramSet(angles, edges, counts, overflow)


def build_histograms(records, edges=DEFAULT_EDGES) -> HistogramSet:
    records = list(records)
    if not records:
        raise ValueError("no records")
    return histograms_from_samples([r.theta for r in records], [r.J for r in records], edges)


def oscillator_wavefunctions(nmax: int, x) -> np.ndarray:
    """``psi_0..psi_nmax`` at ``x``, stacked along a new leading axis."""
    if nmax < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, nmax):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * x * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def oscillator_wavefunction(n: int, x):
    """Harmonic-oscillator eigenfunction ``psi_n(x)`` (real, no LO phase)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return oscillator_wavefunctions(n, x)[n]


@dataclass
class ProjectorSet:
    """Binned quadrature projectors ``Pi^{theta,j}_{mn} = e^{i(m-n)theta} int_bin psi_m psi_n dx``."""

    cutoff: int
    thetas: np.ndarray
    edges: np.ndarray
    bin_integrals: np.ndarray  # (n_bins, D, D), real
    subdivisions: int = DEFAULT_SUBDIVISIONS
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    def phases(self) -> np.ndarray:
        k = np.arange(self.dim)
        return np.exp(1j * (k[:, None] - k[None, :])[None] * self.thetas[:, None, None])

    @property
    def projectors(self) -> np.ndarray:
        """Dense ``(n_angles, n_bins, D, D)`` array of projector matrices."""
        if "full" not in self._cache:
            self._cache["full"] = self.phases()[:, None] * self.bin_integrals[None]
        return self._cache["full"]

    def probabilities(self, rho) -> np.ndarray:
        """``Tr[Pi^{theta,j} rho]`` for every angle and bin."""
        rho = np.asarray(rho, dtype=complex)
        weighted = self.phases() * rho.T[None]
        return np.einsum("jmn,amn->aj", self.bin_integrals, weighted).real


def build_projectors(thetas=DEFAULT_ANGLES, edges=DEFAULT_EDGES, cutoff: int = 10,
                     subdivisions: int = DEFAULT_SUBDIVISIONS) -> ProjectorSet:
    """Projectors by the trapezoidal rule with ``subdivisions`` points per bin."""
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    if subdivisions < 2:
        raise ValueError("need at least 2 points per bin")
    edges = np.asarray(edges, dtype=float)
    s = np.linspace(0.0, 1.0, subdivisions)
    widths = np.diff(edges)
    x = edges[:-1, None] + widths[:, None] * s[None, :]
    w = np.full(subdivisions, 1.0)
    w[[0, -1]] = 0.5
    w = widths[:, None] * w[None, :] / (subdivisions - 1)
    psi = oscillator_wavefunctions(cutoff, x)
    integrals = np.einsum("mbs,nbs,bs->bmn", psi, psi, w)
    return ProjectorSet(cutoff, np.asarray(thetas, dtype=float), edges, integrals, subdivisions)


@dataclass
class MleResult:
    rho: np.ndarray
    iterations: int
    converged: bool
    final_step: float
    loglikelihood: float
    clamped: bool = False
    history: list = field(default_factory=list, repr=False)

    def metadata(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "final_frobenius_step": self.final_step,
            "loglikelihood": self.loglikelihood,
            "clamped_probabilities": self.clamped,
        }


def _check_angles(h: HistogramSet, p: ProjectorSet):
    if h.thetas.shape != p.thetas.shape or not np.allclose(h.thetas, p.thetas, atol=1e-12):
        raise ValueError("histogram angles do not match projector angles")
    if h.edges.shape != p.edges.shape or not np.allclose(h.edges, p.edges, atol=1e-12):
        raise ValueError("histogram bins do not match projector bins")


def loglikelihood(h: HistogramSet, p: ProjectorSet, rho) -> float:
    """``sum n log Pr`` over occupied bins."""
    _check_angles(h, p)
    pr = p.probabilities(rho)
    mask = h.counts > 0
    return float(np.sum(h.counts[mask] * np.log(np.maximum(pr[mask], PROB_FLOOR))))


def mle_reconstruct(h: HistogramSet, p: ProjectorSet, tol: float = 1e-6,
                    max_iter: int = 20000, keep_history: bool = False) -> MleResult:
    """Iterative ``R rho R`` maximum-likelihood reconstruction.

    Starts from the maximally mixed state and stops once consecutive iterates
    differ by less than ``tol`` in Frobenius norm. A step that would lower the
    likelihood is replaced by the diluted update ``(1 + eps R) rho (1 + eps R)``
    with halved ``eps`` until the likelihood does not decrease.
    """
    _check_angles(h, p)
    D = p.dim
    mask = h.counts > 0
    n = h.counts[mask].astype(float)
    n_total = n.sum()
    # rows: occupied (angle, bin) pairs; columns: flattened (m, n) entries
    P = p.projectors[mask].reshape(-1, D * D)

    def probs(rho):
        return (P @ rho.T.reshape(-1)).real

    def score(pr):
        return float(np.dot(n, np.log(np.maximum(pr, PROB_FLOOR))) / n_total)

    rho = np.eye(D, dtype=complex) / D
    pr = probs(rho)
    clamped = bool(np.any(pr < PROB_FLOOR))
    ll = score(pr)
    history = [ll] if keep_history else []
    step = math.inf
    converged = False
    it = 0
    eye = np.eye(D)
    while it < max_iter:
        it += 1
        safe = np.maximum(pr, PROB_FLOOR)
        clamped |= bool(np.any(pr < PROB_FLOOR))
        R = ((n / safe) @ P).reshape(D, D) / n_total
        new = R @ rho @ R
        new = hermitian_part(new / np.trace(new).real)
        new_pr = probs(new)
        new_ll = score(new_pr)
        eps = 1.0
        while new_ll < ll - 1e-12 and eps > 1e-8:
            G = eye + eps * R
            new = G @ rho @ G
            new = hermitian_part(new / np.trace(new).real)
            new_pr = probs(new)
            new_ll = score(new_pr)
            eps *= 0.5
        step = frobenius_distance(new, rho)
        rho, pr, ll = new, new_pr, new_ll
        if keep_history:
            history.append(ll)
        if step < tol:
            converged = True
            break
    return MleResult(rho, it if max_iter > 0 else 0, converged if max_iter > 0 else False,
                     step, ll * n_total, clamped, history)


def synthesize_histograms(rho, thetas=DEFAULT_ANGLES, edges=DEFAULT_EDGES,
                          samples_per_angle: int = 100_000, seed: int = 0,
                          subdivisions: int = DEFAULT_SUBDIVISIONS) -> HistogramSet:
    """Multinomial histograms drawn from the exact binned Born probabilities of ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    p = build_projectors(thetas, edges, rho.shape[0] - 1, subdivisions)
    pr = np.clip(p.probabilities(rho), 0.0, None)
    gen = np.random.default_rng(seed)
    counts = np.empty(pr.shape, dtype=np.int64)
    overflow = np.empty(pr.shape[0], dtype=np.int64)
    for a, row in enumerate(pr):
        tail = max(1.0 - row.sum(), 0.0)
        draw = gen.multinomial(samples_per_angle, np.append(row, tail) / (row.sum() + tail))
        counts[a] = draw[:-1]
        overflow[a] = draw[-1]
    return HistogramSet(np.asarray(thetas, dtype=float), edges, counts, overflow)


def write_histograms(path, h: HistogramSet) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theta_rad", "bin_left", "bin_right", "count"])
        for a, theta in enumerate(h.thetas):
            for j in range(h.counts.shape[1]):
                w.writerow([repr(float(theta)), repr(float(h.edges[j])),
                            repr(float(h.edges[j + 1])), int(h.counts[a, j])])


def read_histograms(path) -> HistogramSet:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    thetas = sorted({float(r["theta_rad"]) for r in rows})
    lefts = sorted({float(r["bin_left"]) for r in rows})
    rights = sorted({float(r["bin_right"]) for r in rows})
    edges = np.array(lefts + [rights[-1]])
    counts = np.zeros((len(thetas), len(lefts)), dtype=np.int64)
    ai = {t: i for i, t in enumerate(thetas)}
    bi = {x: j for j, x in enumerate(lefts)}
    for r in rows:
        counts[ai[float(r["theta_rad"])], bi[float(r["bin_left"])]] = int(r["count"])
    return HistogramSet(np.array(thetas), edges, counts)
