"""Inverse-temperature stepping of the full nonlinear equations for w~.

Singlet (one dimension, fixed momentum ``p``)::

    dw/dbeta = -p^2/2m - u(q) + (i hbar p/m) w' + (hbar^2/2m) w'' + (hbar^2/2m) (w')^2

Pair (relative plane, spectral form)::

    dw^/dbeta = -u^ + b w^ + (hbar^2/m) FT[|grad w|^2]
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linear_fourier import b_factor, linear_solution
from .spectral import gradient_square_hat

BLOWUP = 50.0


@dataclass
class BetaTrajectory:
    """Fields at increasing inverse temperatures plus per-node diagnostics."""

    beta_nodes: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    max_norm: list = field(default_factory=list)
    blowup: bool = False

    @property
    def final(self):
        return self.fields[-1]

    @property
    def final_beta(self):
        return self.beta_nodes[-1]


def integrate_beta(initial, rhs, beta0, beta_final, steps, method="rk4", blowup=BLOWUP,
                   monitor=None, keep_every=1):
    """Fixed-step Euler or RK4 integration of ``dy/dbeta = rhs(y, beta)``.

    ``monitor(y)`` maps the state to the array whose ``max |Re|`` is compared
    with ``blowup`` (default: the state itself).  On blowup the partial
    trajectory is returned with ``blowup=True``.  Every ``keep_every``-th
    node (and always the last) is stored.
    """
    if not beta0 < beta_final:
        raise ValueError("beta0 must be smaller than beta_final")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if method not in ("euler", "rk4"):
        raise ValueError(f"method must be 'euler' or 'rk4', got {method!r}")
    monitor = monitor or (lambda y: y)
    h = (beta_final - beta0) / steps
    y = np.array(initial, dtype=complex)
    traj = BetaTrajectory()

    def record(b, y):
        traj.beta_nodes.append(b)
        traj.fields.append(y.copy())
        traj.max_norm.append(float(np.max(np.abs(monitor(y)))))

    record(beta0, y)
    for n in range(steps):
        b = beta0 + n * h
        if method == "euler":
            y = y + h * rhs(y, b)
        else:
            k1 = rhs(y, b)
            k2 = rhs(y + 0.5 * h * k1, b + 0.5 * h)
            k3 = rhs(y + 0.5 * h * k2, b + 0.5 * h)
            k4 = rhs(y + h * k3, b + h)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        b_next = beta0 + (n + 1) * h
        mon = monitor(y)
        if not np.all(np.isfinite(mon)) or np.max(np.abs(np.real(mon))) > blowup:
            record(b_next, y)
            traj.blowup = True
            return traj
        if (n + 1) % keep_every == 0 or n == steps - 1:
            record(b_next, y)
    return traj


# -- pair ---------------------------------------------------------------------


def rhs_pair_spectral(w_hat, p_z, u_hat, grid, sys, nonlinear=True):
    """``-u^ + b w^ + (hbar^2/m) FT[|grad w|^2]`` on one momentum slice."""
    kx, kz = grid.mesh_k()
    out = -u_hat + b_factor(p_z, (kx, kz), sys) * w_hat
    if nonlinear:
        out = out + sys.hbar**2 / sys.mass * gradient_square_hat(w_hat, grid)
    return out * grid.nyquist_mask()


def integrate_pair_slice(u_hat, p_z, grid, sys, beta0, beta_final, steps, method="rk4",
                         nonlinear=True, blowup=BLOWUP, keep_every=1):
    """Start from the linear solution at ``beta0`` and step to ``beta_final``.

    The blowup monitor is the position-space field.
    """
    kx, kz = grid.mesh_k()
    start = linear_solution(u_hat, b_factor(p_z, (kx, kz), sys), beta0)
    return integrate_beta(
        start, lambda w, b: rhs_pair_spectral(w, p_z, u_hat, grid, sys, nonlinear),
        beta0, beta_final, steps, method, blowup, monitor=grid.inverse, keep_every=keep_every,
    )


# -- singlet ------------------------------------------------------------------


def _first(f, h):
    return np.gradient(f, h, axis=-1, edge_order=2)


def _second(f, h):
    out = np.empty_like(f)
    out[..., 1:-1] = (f[..., 2:] - 2 * f[..., 1:-1] + f[..., :-2]) / (h * h)
    out[..., 0] = (2 * f[..., 0] - 5 * f[..., 1] + 4 * f[..., 2] - f[..., 3]) / (h * h)
    out[..., -1] = (2 * f[..., -1] - 5 * f[..., -2] + 4 * f[..., -3] - f[..., -4]) / (h * h)
    return out


def rhs_singlet_1d(w, q, p, u, sys):
    """Right-hand side of the singlet equation by central differences.

    ``u`` is the singlet potential sampled on ``q`` (or a callable).  ``w`` may
    be ``(len(q),)`` or ``(len(p), len(q))`` with ``p`` an array.
    """
    q = np.asarray(q, dtype=float)
    h = q[1] - q[0]
    u = np.asarray(u(q) if callable(u) else u, dtype=float)
    p = np.asarray(p, dtype=float)
    hb, m = sys.hbar, sys.mass
    p_col = p[..., None] if p.ndim else p
    d1 = _first(w, h)
    d2 = _second(w, h)
    return (-p_col**2 / (2 * m) - u + 1j * hb * p_col / m * d1
            + hb**2 / (2 * m) * (d2 + d1 * d1))


def integrate_singlet(q, p, u, sys, beta_final, steps, beta0=None, method="rk4",
                      blowup=BLOWUP, keep_every=None):
    """Integrate ``w~(q; p)`` for every momentum in ``p`` from ``-beta0 H`` at ``beta0``.

    ``beta0`` defaults to ``beta_final / steps / 100``.
    """
    q = np.asarray(q, dtype=float)
    p = np.atleast_1d(np.asarray(p, dtype=float))
    u_vals = np.asarray(u(q) if callable(u) else u, dtype=float)
    beta0 = beta_final / steps / 100 if beta0 is None else beta0
    start = -beta0 * (p[:, None] ** 2 / (2 * sys.mass) + u_vals[None, :])
    keep = steps if keep_every is None else keep_every
    return integrate_beta(start.astype(complex), lambda w, b: rhs_singlet_1d(w, q, p, u_vals, sys),
                          beta0, beta_final, steps, method, blowup, keep_every=keep)
