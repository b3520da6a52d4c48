"""Linearized Fourier-space solution for the pair commutation function.

In the relative coordinate of a pair, rotated so that the relative momentum
``p = p_z`` lies along z, the combined pair function obeys

    d w^/d beta = -u^(k) + b(p, k) w^(k) + Q[w^](k),
    b = -hbar p k_z / m - hbar^2 k^2 / m,

with ``Q`` the transform of ``(hbar^2/m) |grad w|^2``.  The coefficients use the
relative-coordinate operator ``(hbar^2/m) grad^2`` (twice the one-particle
``hbar^2/2m``: both particles contribute to the Laplacian of ``q_jk``), and
``p`` is the momentum difference ``p_j - p_k`` with first derivative
coefficient ``i hbar p / m``.  Dropping ``Q`` gives the closed-form linear
solution ``w^_lin = (-u^/b)(exp(beta b) - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import j0

from .grid import Axis, ComplexGrid
from .potentials import PotentialModel, SmoothedCore
from .spectral import SpectralGrid, gradient_square_hat

SERIES_THRESHOLD = 1e-8


@dataclass
class SpectralPairField:
    """``w^(p_z, k_x, k_z)`` on ``len(p_axis)`` momentum slices of a spectral grid."""

    p_axis: np.ndarray
    grid: SpectralGrid
    data: np.ndarray
    beta: float = 0.0

    def __post_init__(self):
        self.p_axis = np.asarray(self.p_axis, dtype=float)
        self.data = np.asarray(self.data, dtype=complex)
        want = (self.p_axis.size, self.grid.n, self.grid.n)
        if self.data.shape != want:
            raise ValueError(f"spectral data has shape {self.data.shape}, expected {want}")

    @property
    def k_axes(self):
        return self.grid.k, self.grid.k


def _radial_potential(potential):
    if isinstance(potential, PotentialModel):
        potential = potential.pair
    return potential


def pair_potential_ft(potential, k, regularization=None, r_max=None, panels=400, order=16, dim=2):
    """Two-dimensional transform ``u^(k) = 2 pi int_0^inf r u(r) J0(k r) dr``.

    Composite Gauss-Legendre quadrature on ``[0, r_max]``.  A singular (hard
    core) potential must be regularized, e.g. by :class:`SmoothedCore`;
    ``regularization`` may be such an instance or a dict of its arguments.
    ``dim=1`` gives the one-dimensional ``2 int_0^inf u(r) cos(k r) dr``.
    """
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    pot = _radial_potential(potential)
    k = np.asarray(k, dtype=float)
    if pot is None:
        return np.zeros_like(k)
    if regularization is not None:
        reg = regularization if isinstance(regularization, SmoothedCore) else SmoothedCore(pot, **regularization)
        pot = reg
    if getattr(pot, "singular", False):
        raise ValueError(
            "the Fourier route does not work for a bare hard-core potential such as "
            "Lennard-Jones; pass a regularization (smoothed core)"
        )
    if r_max is None:
        width = getattr(pot, "width", None)
        if width is not None:
            r_max = 14.0 * width
        else:
            base = getattr(pot, "base", pot)
            r_max = 60.0 * getattr(base, "sigma", 1.0)
    x, wts = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, r_max, panels + 1)
    half = 0.5 * np.diff(edges)
    r = (edges[:-1, None] + half[:, None] * (x[None, :] + 1)).ravel()
    wr = (half[:, None] * wts[None, :]).ravel()
    kernel = j0 if dim == 2 else np.cos
    weight = (2 * np.pi * r if dim == 2 else 2.0) * pot(r) * wr
    flat, inverse = np.unique(np.abs(k.ravel()), return_inverse=True)
    out = np.empty(flat.size)
    # chunk over k to bound memory
    for s in range(0, flat.size, 512):
        out[s:s + 512] = kernel(np.outer(flat[s:s + 512], r)) @ weight
    return out[inverse].reshape(k.shape)


def b_factor(p_z, k, sys):
    """``b = -hbar p_z k_z / m - hbar^2 (k_x^2 + k_z^2) / m``.

    ``k`` is a ``(k_x, k_z)`` pair of arrays.
    """
    kx, kz = k
    hb, m = sys.hbar, sys.mass
    return -hb * np.asarray(p_z) * kz / m - hb**2 * (kx * kx + kz * kz) / m


def linear_solution(u_hat, b, beta):
    """``(-u^/b)(exp(beta b) - 1)``, with a cubic series for ``|beta b| < 1e-8``."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    u_hat, b = np.broadcast_arrays(np.asarray(u_hat), np.asarray(b, dtype=float))
    x = beta * b
    small = np.abs(x) < SERIES_THRESHOLD
    safe_b = np.where(small, 1.0, b)
    full = -u_hat / safe_b * np.expm1(x)
    series = -u_hat * beta * (1 + x / 2 + x * x / 6)
    return np.where(small, series, full)


def default_momentum_axis(sys, n=33, max_kinetic=25.0):
    """Symmetric momentum slices covering ``beta p^2 / 2m <= max_kinetic``."""
    p_max = float(sys.momentum_for_kinetic(max_kinetic))
    return np.linspace(-p_max, p_max, n)


def linear_field(potential, sys, beta, grid=None, p_axis=None, regularization=None):
    """Spectral linear solution on every momentum slice."""
    grid = SpectralGrid() if grid is None else grid
    p_axis = default_momentum_axis(sys) if p_axis is None else np.asarray(p_axis, dtype=float)
    kx, kz = grid.mesh_k()
    u_hat = pair_potential_ft(potential, np.hypot(kx, kz), regularization) * grid.nyquist_mask()
    data = np.stack([linear_solution(u_hat, b_factor(p, (kx, kz), sys), beta) for p in p_axis])
    return SpectralPairField(p_axis, grid, data, beta)


def inverse_to_table(spectral):
    """Position-space ``w(p_z, q_x, q_z)`` as a rank-3 :class:`ComplexGrid`."""
    if not isinstance(spectral, SpectralPairField):
        raise TypeError("inverse_to_table expects a SpectralPairField")
    grid = spectral.grid
    w = grid.inverse(spectral.data)
    p_ax = Axis.from_nodes(spectral.p_axis)
    q_ax = Axis(grid.q0, grid.dq, grid.n)
    return ComplexGrid([p_ax, q_ax, q_ax], w, names=["p", "qx", "qz"])


def first_nonlinear_correction(spectral, u_hat, sys, n_gauss=12):
    """First nonlinear correction to the linear solution at ``spectral.beta``.

    ``delta(beta) = int_0^beta exp(b (beta - s)) Q[w_lin(s)] ds`` by Gauss-Legendre
    quadrature over ``s``, where ``Q`` is the transform of ``(hbar^2/m)|grad w|^2``.
    Returns ``(correction field, max|delta| / max|w_lin|)``.
    """
    grid = spectral.grid
    beta = spectral.beta
    kx, kz = grid.mesh_k()
    x, wts = np.polynomial.legendre.leggauss(n_gauss)
    s_nodes = 0.5 * beta * (x + 1)
    s_wts = 0.5 * beta * wts
    out = np.zeros_like(spectral.data)
    coef = sys.hbar**2 / sys.mass
    for i, p in enumerate(spectral.p_axis):
        b = b_factor(p, (kx, kz), sys)
        acc = np.zeros((grid.n, grid.n), dtype=complex)
        for s, ws in zip(s_nodes, s_wts):
            w_s = linear_solution(u_hat, b, s)
            acc += ws * np.exp(b * (beta - s)) * coef * gradient_square_hat(w_s, grid)
        out[i] = acc
    scale = np.max(np.abs(spectral.data))
    ratio = float(np.max(np.abs(out)) / scale) if scale > 0 else 0.0
    return SpectralPairField(spectral.p_axis, grid, out, beta), ratio


def asymptote_diagnostics(spectral, u_hat, sys):
    """Per-slice small-k and large-k checks of the linear solution.

    Returns a list of dicts with the worst ``|w^/(-beta u^) - 1|`` over modes with
    ``|beta b| < 1e-4`` and ``|w^ b / u^ - 1|`` at the largest-``|k|`` mode
    with ``beta b < -10``.
    """
    grid = spectral.grid
    kx, kz = grid.mesh_k()
    kk = np.hypot(kx, kz)
    mask = grid.nyquist_mask() & (np.abs(u_hat) > 0)
    rows = []
    for p, w in zip(spectral.p_axis, spectral.data):
        b = b_factor(p, (kx, kz), sys)
        x = spectral.beta * b
        small = mask & (np.abs(x) < 1e-4)
        small_err = float(np.max(np.abs(w[small] / (-spectral.beta * u_hat[small]) - 1))) if small.any() else np.nan
        large = mask & (x < -10)
        if large.any():
            sel = np.where(large, kk, -1.0)
            idx = np.unravel_index(np.argmax(sel), sel.shape)
            large_err = float(abs(w[idx] * b[idx] / u_hat[idx] - 1))
            k_large = float(kk[idx])
        else:
            large_err, k_large = np.nan, np.nan
        rows.append({"p": float(p), "small_k_error": small_err, "large_k_error": large_err,
                     "k_large": k_large})
    return rows
