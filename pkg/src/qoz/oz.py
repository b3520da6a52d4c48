"""Quantum Ornstein-Zernike equation with hypernetted-chain closure in 1D phase space.

Fields are functions of the relative position ``q = q1 - q2`` and the two
momenta, stored as arrays ``(n_p, n_p, n_q)`` indexed ``[p1, p2, q]``.  The
q axis is the symmetric grid ``q_n = n dq`` (``n = -M..M``).  The OZ
convolution is

    (c * h)(q; p1, p2) = sum_p3 rho(p3) w(p3) int dq' c(q'; p1, p3) h(q - q'; p3, p2)

with ``rho(p) = n exp(-beta p^2/2m) / sqrt(2 pi m / beta)`` and momentum
quadrature weights ``w`` scaled so that ``sum rho w = n`` exactly.  The bond
exponent ``E = -beta u + w + eta`` enters the Mayer function ``f = e^E - 1``
and the closure ``h = -1 + exp(h - c + E)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .linear_fourier import linear_solution

BOLTZMANN = "boltzmann"
STATISTICS = ("bose", "fermi", BOLTZMANN)


@dataclass(frozen=True)
class PhaseSpaceAxes:
    """Symmetric relative-position grid and symmetric momentum grid."""

    q_max: float
    n_half: int
    p_nodes: np.ndarray

    @property
    def q(self):
        return np.linspace(-self.q_max, self.q_max, 2 * self.n_half + 1)

    @property
    def dq(self):
        return self.q_max / self.n_half

    @property
    def p(self):
        return np.asarray(self.p_nodes, dtype=float)

    @classmethod
    def build(cls, q_max, n_half, sys, n_p=9, max_kinetic=8.0):
        """Momenta spanning ``beta p^2 / 2m <= max_kinetic`` (``n_p`` odd)."""
        if n_p == 1:
            return cls(q_max, n_half, np.zeros(1))
        p_max = float(sys.momentum_for_kinetic(max_kinetic))
        return cls(q_max, n_half, np.linspace(-p_max, p_max, n_p))


def momentum_density(axes, sys, density):
    """``rho(p) w(p)``: singlet momentum density times quadrature weight, summing to ``density``."""
    p = axes.p
    rho = density * np.exp(-sys.beta * p * p / (2 * sys.mass)) / math.sqrt(2 * math.pi * sys.mass / sys.beta)
    if p.size == 1:
        return np.array([float(density)])
    w = np.full(p.size, p[1] - p[0])
    w[[0, -1]] *= 0.5
    rw = rho * w
    return rw * (density / rw.sum())


@dataclass
class MayerField:
    """Bond exponent ``E`` and Mayer function ``f = e^E - 1`` on ``[p1, p2, q]``."""

    axes: PhaseSpaceAxes
    exponent: np.ndarray
    statistics: str = BOLTZMANN

    @property
    def values(self):
        with np.errstate(over="ignore"):
            return np.exp(self.exponent) - 1


@dataclass
class CorrelationSet:
    """Total and direct correlation functions plus the weighted momentum density."""

    axes: PhaseSpaceAxes
    h: np.ndarray
    c: np.ndarray
    rho_weights: np.ndarray
    statistics: str = BOLTZMANN
    converged: bool = False
    iterations: int = 0
    history: list = field(default_factory=list)

    @property
    def g(self):
        return 1 + self.h


def pair_w_linear_1d(u_hat_1d, axes, sys, beta, padding=4):
    """Linearized homogeneous pair function ``w(q; p1, p2) = w~_lin + beta u``.

    ``u_hat_1d(k)`` is the one-dimensional transform of the (regularized)
    pair potential.  The relative equation is taken with ``(hbar^2/m) d^2/dq^2``
    and first-derivative coefficient ``i hbar p12 / m``, the 1D reduction of the
    pair equation, so ``b = -hbar p12 k/m - hbar^2 k^2/m``.  Returns only the
    transform part ``w~_lin``; add ``beta u_reg`` to obtain ``w``.
    """
    n = axes.q.size
    half = n // 2
    m_fft = padding * n + (padding * n) % 2
    k = 2 * np.pi * sfft.fftfreq(m_fft, axes.dq)
    uh = u_hat_1d(np.abs(k))
    uh[m_fft // 2] = 0
    p = axes.p
    keep = np.r_[m_fft - half:m_fft, 0:half + 1]
    out = np.empty((p.size, p.size, n), dtype=complex)
    for a, p1 in enumerate(p):
        for b, p2 in enumerate(p):
            bb = -sys.hbar * (p1 - p2) * k / sys.mass - sys.hbar**2 * k * k / sys.mass
            # continuous inverse transform sampled at q_j = j dq
            out[a, b] = sfft.ifft(linear_solution(uh, bb, beta))[keep] / axes.dq
    return out


def mayer_f(axes, sys, potential=None, w=None, statistics=BOLTZMANN, damping_length=None):
    """Bond exponent ``-beta u(|q|) + w + eta`` and its Mayer function.

    ``w`` is an array ``[p1, p2, q]`` or ``None``.  The dimer phase
    ``eta = +-exp(i (p1 - p2) q / hbar)`` is unimodular and would keep ``f``
    from decaying, so it is multiplied by ``exp(-(q/q_c)^2)``; ``q_c``
    defaults to the thermal wavelength.
    """
    if statistics not in STATISTICS:
        raise ValueError(f"statistics must be one of {STATISTICS}")
    q, p = axes.q, axes.p
    shape = (p.size, p.size, q.size)
    expo = np.zeros(shape, dtype=complex)
    if potential is not None:
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            u = potential(np.abs(q))
        u = np.where(np.isnan(u), np.inf, u)
        expo += -sys.beta * u[None, None, :]
    if w is not None:
        w = np.asarray(w, dtype=complex)
        if w.shape != shape:
            raise ValueError(f"w has shape {w.shape}, axes need {shape}")
        expo = expo + w
    if statistics != BOLTZMANN:
        qc = sys.thermal_wavelength if damping_length is None else damping_length
        sign = 1.0 if statistics == "bose" else -1.0
        p12 = p[:, None, None] - p[None, :, None]
        expo = expo + sign * np.exp(1j * p12 * q[None, None, :] / sys.hbar) * np.exp(-(q / qc) ** 2)
    return MayerField(axes, expo, statistics)


def oz_convolve(c, h, rho_weights, axes):
    """``sum_p3 rho w(p3) int dq' c(q'; p1, p3) h(q - q'; p3, p2)`` (linear convolution)."""
    n = axes.q.size
    size = sfft.next_fast_len(2 * n - 1)
    ch = sfft.fft(c, size, axis=-1)
    hh = sfft.fft(h, size, axis=-1)
    prod = np.einsum("acq,c,cbq->abq", ch, np.asarray(rho_weights, dtype=complex), hh)
    full = sfft.ifft(prod, axis=-1)
    half = n // 2
    return axes.dq * full[..., half:half + n]


def hnc_closure(h, c, exponent):
    """``-1 + exp(h - c + E)``; exp is entire, so no branch issues arise."""
    with np.errstate(over="ignore"):
        return np.exp(h - c + exponent) - 1


def initial_guess(mayer, rho_weights):
    """``h = c = f``."""
    f = mayer.values
    return CorrelationSet(mayer.axes, f.copy(), f.copy(), np.asarray(rho_weights), mayer.statistics)


def picard_solve(initial, mayer, alpha=0.2, max_iter=5000, tol=1e-8):
    """Mixed Picard iteration of ``c <- h - (c*h + h*c)/2`` and ``h <- HNC(h, c)``.

    Particle exchange maps ``c*h`` to ``h*c``; the two orderings agree at the
    OZ solution but not at intermediate iterates, so the update uses their
    mean to keep every iterate exchange symmetric.  Converged when the largest change of either field (after mixing) falls
    below ``tol``.  Non-convergence returns the last iterate with
    ``converged=False``; the residual history is kept either way.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    axes = initial.axes
    h, c = initial.h.astype(complex), initial.c.astype(complex)
    rw = initial.rho_weights
    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        ch = oz_convolve(c, h, rw, axes)
        if h.shape[0] > 1:
            ch = 0.5 * (ch + oz_convolve(h, c, rw, axes))
        c_new = h - ch
        h_new = hnc_closure(h, c, mayer.exponent)
        c_next = (1 - alpha) * c + alpha * c_new
        h_next = (1 - alpha) * h + alpha * h_new
        change = float(max(np.max(np.abs(c_next - c)), np.max(np.abs(h_next - h))))
        history.append(change)
        h, c = h_next, c_next
        if not np.isfinite(change):
            break
        if change < tol:
            converged = True
            break
    return CorrelationSet(axes, h, c, rw, initial.statistics, converged, it, history)


def asymptote_check(result, mayer, q_probe=None):
    """Large-separation residual ``c - E`` over the outer third of the q axis.

    Returns a dict with the worst residual modulus, the modulus profile over
    the outer third (averaged over momenta, positive ``q`` side), whether that
    profile decreases monotonically, and, if ``q_probe`` is given, the
    residual and ``|E|`` at the node nearest ``q_probe``.
    """
    q = result.axes.q
    resid = result.c - mayer.exponent
    outer = np.abs(q) >= (2.0 / 3.0) * q.max()
    report = {"max_residual": float(np.max(np.abs(resid[..., outer]))) if outer.any() else 0.0}
    pos = outer & (q > 0)
    profile = np.mean(np.abs(resid[..., pos]), axis=(0, 1))
    report["profile"] = profile
    report["monotone"] = bool(np.all(np.diff(profile) <= 1e-15 * max(1.0, profile.max(initial=0.0))))
    if q_probe is not None:
        i = int(np.argmin(np.abs(q - q_probe)))
        report["q"] = float(q[i])
        report["residual"] = float(np.max(np.abs(resid[..., i])))
        report["bond"] = float(np.max(np.abs(mayer.exponent[..., i])))
    return report
