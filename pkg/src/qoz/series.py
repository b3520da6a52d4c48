"""High-temperature and Planck-constant expansions of the commutation function.

``omega = sum_n omega_n beta^n`` (with ``omega_0 = 1``, ``omega_1 = 0``) and
``W = ln omega = sum_n W_n hbar^n``.  Closed forms are evaluated at a single
phase-space point from the derivative tensors of the total potential; the
one-dimensional recursion builds ``omega_n`` on a grid with finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Axis, ComplexGrid
from .system import classical_hamiltonian

MAX_W_ORDER = 4


@dataclass
class SeriesResult:
    """Truncated series: ``value == sum(terms)``."""

    order: int
    value: complex
    terms: list
    coefficients: list = field(default_factory=list)


class _Contractions:
    """Every tensor contraction that appears in omega_2, omega_3 and W_1..W_4."""

    def __init__(self, config, model):
        u, g, h, t3, t4 = model.total_tensors(config.positions, 4)
        p = config.momenta.ravel()
        self.U = u
        self.p_g = p @ g
        self.g_g = g @ g
        self.lap = np.trace(h)
        grad_lap = np.einsum("ijj->i", t3)
        self.p_grad_lap = p @ grad_lap
        self.g_grad_lap = g @ grad_lap
        self.lap_lap = np.einsum("iijj->", t4)
        self.pp_h = p @ h @ p
        self.pg_h = p @ h @ g
        self.gg_h = g @ h @ g
        self.hp_hp = float((h @ p) @ (h @ p))
        self.ppp_t3 = np.einsum("ijk,i,j,k->", t3, p, p, p)
        self.gpp_t3 = np.einsum("ijk,i,j,k->", t3, g, p, p)
        self.pp_lap_t4 = np.einsum("ijkk,i,j->", t4, p, p)
        self.pppp_t4 = np.einsum("ijkl,i,j,k,l->", t4, p, p, p, p)
        # laplacian of |grad U|^2
        self.lap_gg = 2 * (self.g_grad_lap + float(np.sum(h * h)))


def omega_coefficients(config, model, sys, up_to=3):
    """``omega_0 .. omega_{up_to}`` (``up_to`` is 2 or 3) at one phase point.

    The returned :class:`SeriesResult` holds the bare coefficients in
    ``coefficients`` and the contributions ``omega_n beta^n`` in ``terms``.
    """
    if up_to not in (2, 3):
        raise ValueError("omega closed forms exist for up_to = 2 or 3")
    c = _Contractions(config, model)
    hb, m = sys.hbar, sys.mass
    w2 = -hb**2 / (4 * m) * c.lap - 1j * hb / (2 * m) * c.p_g
    coeffs = [1.0 + 0j, 0j, complex(w2)]
    if up_to == 3:
        w3 = (hb**2 / (6 * m) * c.g_g
              - hb**4 / (24 * m**2) * c.lap_lap
              - 1j * hb**3 / (6 * m**2) * c.p_grad_lap
              + hb**2 / (6 * m**2) * c.pp_h)
        coeffs.append(complex(w3))
    terms = [cn * sys.beta**n for n, cn in enumerate(coeffs)]
    return SeriesResult(up_to, complex(sum(terms)), terms, coeffs)


def w_coefficients(config, model, sys):
    """The coefficient functions ``W_1 .. W_4`` of ``hbar^n`` (``hbar`` excluded)."""
    c = _Contractions(config, model)
    b, m = sys.beta, sys.mass
    w1 = -1j * b**2 / (2 * m) * c.p_g
    w2 = b**3 / (6 * m**2) * c.pp_h + (b**3 / 3 * c.g_g - b**2 / 2 * c.lap) / (2 * m)
    w3 = (1j * b**4 / (24 * m**3) * c.ppp_t3
          + 5j * b**4 / (24 * m**2) * c.pg_h
          - 1j * b**3 / (6 * m**2) * c.p_grad_lap)
    w4 = (-b**5 / (120 * m**4) * c.pppp_t4
          - 3 * b**5 / (40 * m**3) * c.gpp_t3
          - b**5 / (15 * m**2) * c.gg_h
          + b**4 / (16 * m**2) * c.g_grad_lap
          + b**4 / (16 * m**3) * c.pp_lap_t4
          + b**4 / (48 * m**2) * c.lap_gg
          - b**3 / (24 * m**2) * c.lap_lap
          - b**5 / (15 * m**3) * c.hp_hp)
    return np.array([w1, w2, w3, w4], dtype=complex)


def w_series_eval(config, model, sys, order=MAX_W_ORDER):
    """``sum_{n=1}^{order} W_n hbar^n``; ``order = 0`` is the classical limit."""
    if not 0 <= order <= MAX_W_ORDER:
        raise ValueError(f"W series is available to order {MAX_W_ORDER}, got {order}")
    if order == 0:
        return SeriesResult(0, 0j, [], [])
    coeffs = w_coefficients(config, model, sys)[:order]
    terms = [complex(cn * sys.hbar ** (n + 1)) for n, cn in enumerate(coeffs)]
    return SeriesResult(order, complex(sum(terms)), terms, list(coeffs))


def combined_series(config, model, sys, order=MAX_W_ORDER):
    """``W - beta H`` from the truncated series, comparable to eigensum tables."""
    return w_series_eval(config, model, sys, order).value - sys.beta * classical_hamiltonian(config, model, sys)


def _d1(f, h):
    return np.gradient(f, h, edge_order=2)


def _d2(f, h):
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
    out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
    out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    return out


def omega_recursion_1d(u_grid, p, sys, n_max):
    """Build ``omega_0 .. omega_{n_max}`` on a 1D grid by the recursion in ``n``.

    ``u_grid`` is a real :class:`~qoz.grid.ComplexGrid` (or ``(q, u)`` pair) of
    the total potential.  Spatial derivatives are second-order central
    differences with one-sided second-order stencils on the two end nodes, so
    the first and last node of every output are lower accuracy.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    if isinstance(u_grid, tuple):
        q, u = (np.asarray(a, dtype=float) for a in u_grid)
    else:
        q = u_grid.coordinates(0)
        u = u_grid.data.real
    if q.size < 4:
        raise ValueError("recursion needs at least four grid nodes")
    h = q[1] - q[0]
    hb, m = sys.hbar, sys.mass
    du, lap_u = _d1(u, h), _d2(u, h)
    du2 = du * du
    omega = [np.ones_like(u, dtype=complex), np.zeros_like(u, dtype=complex)]
    for n in range(1, n_max):
        prev, cur = omega[n - 1], omega[n]
        prev2 = omega[n - 2] if n >= 2 else np.zeros_like(cur)
        nxt = (-hb**2 / 2 * lap_u * prev
               - hb**2 * du * _d1(prev, h)
               + hb**2 / 2 * du2 * prev2
               + hb**2 / 2 * _d2(cur, h)
               + 1j * hb * p * _d1(cur, h)
               - 1j * hb * p * du * prev) / ((n + 1) * m)
        omega.append(nxt)
    axis = Axis.from_nodes(q)
    return [ComplexGrid([axis], w, names=["q"]) for w in omega]
