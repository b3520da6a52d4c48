"""Eigenstate-sum evaluation of the singlet and pair commutation functions.

For one particle the combined function ``w1 = W - beta H`` follows from

    exp(w1(q, p)) = <q|p>^-1 sum_l exp(-beta E_l) <q|l> <l|p>

with ``<q|p> = exp(i p q / hbar)``.  For two particles in a harmonic trap the
Hamiltonian separates into centre-of-mass (mass 2m) and interaction (mass m/2)
coordinates, so the two-particle sum is a product of two one-dimensional
sums, and the pair function is what remains after removing both singlets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .grid import Axis, ComplexGrid
from .potentials import Harmonic

VANISH_BOTH = "vanish_both"
PARITY_EXTENSION = "lj_core_vanish_with_parity_extension"
UNDERFLOW = math.log(1e-300)


@dataclass
class EigenBasis:
    """Energies (ascending) and orthonormal real wavefunctions on a uniform grid."""

    grid: np.ndarray
    energies: np.ndarray
    wavefunctions: np.ndarray
    boundary: str = VANISH_BOTH
    mass: float = 1.0
    evaluator: Optional[Callable] = field(default=None, repr=False)
    momentum_evaluator: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        order = np.argsort(self.energies, kind="stable")
        self.energies = np.asarray(self.energies, dtype=float)[order]
        self.wavefunctions = np.asarray(self.wavefunctions, dtype=float)[order]

    @property
    def n_states(self):
        return self.energies.size

    @property
    def spacing(self):
        return self.grid[1] - self.grid[0]

    def weights(self):
        w = np.full(self.grid.size, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w

    def overlap_matrix(self):
        return (self.wavefunctions * self.weights()) @ self.wavefunctions.T

    def evaluate(self, q):
        """Wavefunction values ``(n_states, len(q))`` at arbitrary positions."""
        q = np.atleast_1d(np.asarray(q, dtype=float))
        if self.evaluator is not None:
            return self.evaluator(q)
        lo, hi = self.grid[0], self.grid[-1]
        out = np.zeros((self.n_states, q.size))
        inside = (q >= lo) & (q <= hi)
        spline = CubicSpline(self.grid, self.wavefunctions, axis=1)
        out[:, inside] = spline(q[inside])
        return out

    def momentum_overlaps(self, p, hbar=1.0):
        """``integral phi_l(r) exp(i p r / hbar) dr``, analytic when available, else trapezoid."""
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if self.momentum_evaluator is not None:
            return self.momentum_evaluator(p, hbar)
        phase = np.exp(1j * np.outer(self.grid, p) / hbar)
        return (self.wavefunctions * self.weights()) @ phase


def _hermite_functions(xi, n_states):
    """Normalized Hermite functions of the dimensionless coordinate, ``(n, len(xi))``."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty((n_states, xi.size))
    # carry exp(-xi^2/2) as a log scale to survive large |xi| at high order
    log_scale = -0.5 * xi * xi - 0.25 * math.log(math.pi)
    prev = np.zeros_like(xi)
    cur = np.ones_like(xi)
    for n in range(n_states):
        out[n] = cur * np.exp(log_scale)
        nxt = math.sqrt(2.0 / (n + 1)) * xi * cur - math.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e100
        if np.any(big):
            cur = np.where(big, cur * 1e-100, cur)
            prev = np.where(big, prev * 1e-100, prev)
            log_scale = np.where(big, log_scale + 100 * math.log(10), log_scale)
    return out


def sho_eigenstates(sys, omega, n_states, grid, mass=None):
    """Analytic harmonic-oscillator eigenstates ``E_l = hbar omega (l + 1/2)``.

    ``grid`` carries the tabulated wavefunctions; it must be wide enough that
    every requested state has decayed below 1e-12 at both ends.  Momentum
    overlaps use the closed form: the plane-wave transform of a Hermite
    function is ``sqrt(2 pi) i^l`` times the same function of ``p L / hbar``.
    """
    mass = sys.mass if mass is None else mass
    grid = np.asarray(grid, dtype=float)
    length = math.sqrt(sys.hbar / (mass * omega))

    def evaluator(q):
        return _hermite_functions(np.asarray(q) / length, n_states) / math.sqrt(length)

    psi = evaluator(grid)
    tail = np.maximum(np.abs(psi[:, 0]), np.abs(psi[:, -1]))
    bad = np.nonzero(tail > 1e-12)[0]
    if bad.size:
        raise ValueError(
            f"grid [{grid[0]:g}, {grid[-1]:g}] too narrow: state {bad[0]} has "
            f"boundary amplitude {tail[bad[0]]:.3g}"
        )
    def momentum_evaluator(p, hbar):
        if not math.isclose(hbar, sys.hbar):
            raise ValueError("momentum overlaps requested with a different hbar")
        phases = (1j) ** (np.arange(n_states) % 4)
        return (math.sqrt(2 * math.pi * length) * phases[:, None]
                * _hermite_functions(np.asarray(p) * length / sys.hbar, n_states))

    energies = sys.hbar * omega * (np.arange(n_states) + 0.5)
    return EigenBasis(grid, energies, psi, VANISH_BOTH, mass, evaluator, momentum_evaluator)


def solve_eigen_1d(potential, grid, sys, n_states, boundary=VANISH_BOTH, mass=None,
                   max_potential=1e8):
    """Lowest eigenpairs of ``-hbar^2/2m d^2/dq^2 + u(q)`` by central differences.

    The wavefunction is zero on the two end nodes of ``grid`` (values beyond
    the boundary enter the stencil as zero).  With
    ``boundary=PARITY_EXTENSION`` the grid must start at ``q = 0``; every state
    is then mirrored into an even and an odd state on ``[-q_max, q_max]``
    with the same energy.
    """
    mass = sys.mass if mass is None else mass
    grid = np.asarray(grid, dtype=float)
    u = np.asarray(potential(grid) if callable(potential) else potential, dtype=float)
    h = grid[1] - grid[0]
    if boundary == PARITY_EXTENSION and abs(grid[0]) > 1e-12 * max(1.0, abs(grid[-1])):
        raise ValueError("parity extension needs a grid starting at q = 0")
    inner = u[1:-1]
    if np.any(np.isnan(inner)) or np.any(inner == -np.inf):
        raise ValueError("potential must be bounded below on the interior grid nodes")
    inner = np.minimum(inner, max_potential)
    if n_states > inner.size:
        raise ValueError(f"only {inner.size} interior nodes for {n_states} states")
    t = sys.hbar**2 / (2 * mass * h * h)
    diag = inner + 2 * t
    off = np.full(inner.size - 1, -t)
    try:
        energies, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_states - 1))
    except LinAlgError as exc:
        raise LinAlgError(f"tridiagonal eigensolve failed: {exc}") from exc
    resid = diag[:, None] * vecs - energies * vecs
    resid[1:] += off[:, None] * vecs[:-1]
    resid[:-1] += off[:, None] * vecs[1:]
    norms = np.linalg.norm(resid, axis=0)
    if np.any(norms > 1e-6 * max(1.0, np.max(np.abs(energies)))):
        raise LinAlgError(f"eigenvectors did not converge; residual norms {norms}")
    psi = np.zeros((n_states, grid.size))
    psi[:, 1:-1] = vecs.T / math.sqrt(h)
    # fix the sign so the first significant lobe is positive
    for row in psi:
        k = np.argmax(np.abs(row) > 1e-3 * np.abs(row).max())
        if row[k] < 0:
            row *= -1
    if boundary == VANISH_BOTH:
        return EigenBasis(grid, energies, psi, VANISH_BOTH, mass)
    if boundary != PARITY_EXTENSION:
        raise ValueError(f"unknown boundary {boundary!r}")
    full = np.concatenate([-grid[:0:-1], grid])
    mirror = psi[:, :0:-1]
    even = np.concatenate([mirror, psi], axis=1) / math.sqrt(2)
    odd = np.concatenate([-mirror, psi], axis=1) / math.sqrt(2)
    waves = np.empty((2 * n_states, full.size))
    waves[0::2], waves[1::2] = even, odd
    return EigenBasis(full, np.repeat(energies, 2), waves, PARITY_EXTENSION, mass)


# -- tables -----------------------------------------------------------------


def _unwrap_outward(phase, anchor, axis=0):
    """Phase continuity along ``axis`` starting from index ``anchor`` in both directions.

    NaN entries are skipped and do not move the reference.
    """
    ph = np.moveaxis(np.array(phase, dtype=float), axis, 0)
    out = ph.copy()
    two_pi = 2 * np.pi
    for step in (1, -1):
        ref = out[anchor].copy()
        stop = ph.shape[0] if step == 1 else -1
        for i in range(anchor + step, stop, step):
            cur = ph[i]
            adj = cur + two_pi * np.round((ref - cur) / two_pi)
            ok = np.isfinite(adj)
            out[i] = np.where(ok, adj, np.nan)
            ref = np.where(ok, adj, ref)
    return np.moveaxis(out, 0, axis)


def _boltzmann(basis, beta):
    shift = basis.energies[0]
    boltz = np.exp(-beta * (basis.energies - shift))
    total = boltz.sum()
    if boltz[-1] / total > 1e-10:
        raise ValueError(
            f"eigensum not converged: last of {basis.n_states} states carries "
            f"{boltz[-1] / total:.2e} of the partition sum"
        )
    return boltz, shift


def _split_log(s, offset):
    with np.errstate(divide="ignore"):
        logmod = np.log(np.abs(s)) + offset
    phase = np.angle(s)
    bad = logmod < UNDERFLOW
    logmod[bad] = np.nan
    phase[bad] = np.nan
    return logmod, phase


def _eigensum_log(basis, beta, hbar, q, p):
    """``ln |S|`` and the principal phase of the eigensum on a ``(q, p)`` mesh."""
    boltz, shift = _boltzmann(basis, beta)
    phi_q = basis.evaluate(q)
    c = basis.momentum_overlaps(p, hbar)
    s = (phi_q.T * boltz) @ c
    s *= np.exp(-1j * np.outer(q, p) / hbar)
    return _split_log(s, -beta * shift)


def _eigensum_log_points(basis, beta, hbar, q, p):
    """Same as :func:`_eigensum_log` at scattered points ``(q_i, p_i)``."""
    boltz, shift = _boltzmann(basis, beta)
    q, p = np.broadcast_arrays(np.atleast_1d(np.asarray(q, dtype=float)),
                               np.atleast_1d(np.asarray(p, dtype=float)))
    shape = q.shape
    q, p = q.ravel(), p.ravel()
    phi_q = basis.evaluate(q)
    c = basis.momentum_overlaps(p, hbar)
    s = np.einsum("l,li,li->i", boltz, phi_q, c) * np.exp(-1j * q * p / hbar)
    logmod, phase = _split_log(s, -beta * shift)
    return (logmod + 1j * phase).reshape(shape)


def _nearest(nodes, value):
    return int(np.argmin(np.abs(np.asarray(nodes) - value)))


@dataclass
class CommutationTable:
    """Tabulated combined commutation function ``w~(q, p)`` on a uniform grid.

    Invalid nodes (eigensum below the representable range) hold NaN.
    """

    kind: str
    grid: ComplexGrid
    beta: float
    lmax: int
    mass: float = 1.0
    basis: Optional[EigenBasis] = field(default=None, repr=False)
    hbar: float = 1.0
    core_radius: float = 0.0

    @property
    def q(self):
        return self.grid.coordinates(0)

    @property
    def p(self):
        return self.grid.coordinates(1)

    @property
    def values(self):
        return self.grid.data

    @property
    def valid(self):
        return np.isfinite(self.grid.data)

    @property
    def reliable(self):
        """Valid nodes outside the low-accuracy core ``|q| < core_radius``."""
        return self.valid & (np.abs(self.q) >= self.core_radius)[:, None]

    def __call__(self, q, p):
        q, p = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(p, dtype=float))
        pts = np.stack([q.ravel(), p.ravel()], axis=1)
        return self.grid.interpolate(pts).reshape(q.shape)

    def direct(self, q, p):
        """Eigensum evaluated exactly at ``(q, p)``; the branch of the imaginary
        part is the one closest to the interpolated table value."""
        if self.basis is None:
            raise ValueError("table was built without its basis; use interpolation")
        ref = self(q, p)
        val = _eigensum_log_points(self.basis, self.beta, self.hbar, q, p)
        two_pi = 2 * np.pi
        turns = np.round((ref.imag - val.imag) / two_pi)
        return val + 1j * two_pi * np.where(np.isfinite(turns), turns, 0.0)

    def derivative_table(self):
        """``d w~ / dq`` on the same grid (second-order differences)."""
        d = np.gradient(self.grid.data, self.grid.axes[0].spacing, axis=0, edge_order=2)
        return CommutationTable(self.kind + "-dq", ComplexGrid(self.grid.axes, d, self.grid.names),
                                self.beta, self.lmax, self.mass)


def singlet_w_table(basis, sys, beta, p_axis, q_axis, branch="spatial",
                    q_anchor=0.0, ladder_steps=8, kind="singlet", inversion_symmetric=False,
                    core_radius=0.0):
    """Eigensum table of ``w~(q, p) = ln[<q|p>^-1 sum_l e^{-beta E_l} <q|l><l|p>]``.

    ``branch="spatial"`` fixes the logarithm's branch by phase continuity, first
    along ``q`` on the ``p = 0`` column (anchored at ``q_anchor``), then along
    ``p`` outward from ``p = 0``.  ``branch="ladder"`` instead follows each node
    from ``beta / 10^3`` up to ``beta`` through ``ladder_steps`` geometric steps.
    A sequence of anchors may be passed to treat disconnected ``q`` ranges
    (split at ``q = 0``) separately.

    With ``inversion_symmetric`` (a parity-symmetric Hamiltonian on symmetric
    axes) the ``q < 0`` half is filled from ``w~(-q, -p) = w~(q, p)`` so that the
    chosen branch respects the symmetry as well.  Nodes with ``|q| <
    core_radius`` are marked low-accuracy in :attr:`CommutationTable.reliable`.
    """
    q = Axis.from_nodes(q_axis) if not isinstance(q_axis, Axis) else q_axis
    p = Axis.from_nodes(p_axis) if not isinstance(p_axis, Axis) else p_axis
    qn, pn = q.nodes, p.nodes
    logmod, phase = _eigensum_log(basis, beta, sys.hbar, qn, pn)
    if branch == "spatial":
        ip = _nearest(pn, 0.0)
        anchors = np.atleast_1d(q_anchor)
        if anchors.size == 1:
            segments = [(slice(None), _nearest(qn, anchors[0]))]
        else:
            neg = qn < 0
            segments = [(neg, _nearest(qn[neg], anchors.min())),
                        (~neg, _nearest(qn[~neg], anchors.max()))]
        for mask, iq in segments:
            sub = phase[mask]
            col = _unwrap_outward(sub[:, ip], iq, axis=0)
            sub[:, ip] = col
            phase[mask] = _unwrap_outward(sub, ip, axis=1)
    elif branch == "ladder":
        betas = beta * np.geomspace(1e-3, 1.0, ladder_steps)
        track = None
        for b in betas:
            _, ph = _eigensum_log(basis, b, sys.hbar, qn, pn)
            if track is None:
                track = ph
            else:
                track = ph + 2 * np.pi * np.round((track - ph) / (2 * np.pi))
        phase = np.where(np.isfinite(logmod), track, np.nan)
    else:
        raise ValueError(f"unknown branch rule {branch!r}")
    if np.allclose(pn, -pn[::-1], atol=1e-12 * max(1.0, abs(pn[0]))):
        # the defining sum is conjugation symmetric; impose it on the chosen
        # branch too (where S(q, 0) < 0 it only holds mod 2 pi on p = 0)
        half = pn.size // 2
        phase[:, :half] = -phase[:, ::-1][:, :half]
        logmod[:, :half] = logmod[:, ::-1][:, :half]
        if inversion_symmetric:
            if not np.allclose(qn, -qn[::-1], atol=1e-12 * max(1.0, abs(qn[0]))):
                raise ValueError("inversion symmetry needs a symmetric q axis")
            hq = qn.size // 2
            phase[:hq] = phase[::-1, ::-1][:hq]
            logmod[:hq] = logmod[::-1, ::-1][:hq]
    grid = ComplexGrid([q, p], logmod + 1j * phase, names=["q", "p"])
    return CommutationTable(kind, grid, beta, basis.n_states, basis.mass, basis, sys.hbar,
                            core_radius)


def trace_integral(table):
    """``(1/2 pi hbar) int dq dp exp(w~)`` by the trapezoid rule.

    Since ``w~ = W - beta H`` this is the phase-space form of the partition
    function and should equal ``sum_l exp(-beta E_l)``.
    """
    vals = np.exp(np.nan_to_num(table.values, nan=-np.inf))
    wq = np.full(table.q.size, table.grid.axes[0].spacing)
    wp = np.full(table.p.size, table.grid.axes[1].spacing)
    wq[[0, -1]] *= 0.5
    wp[[0, -1]] *= 0.5
    return wq @ vals @ wp / (2 * np.pi * table.hbar)


# -- pairs ------------------------------------------------------------------


@dataclass
class PairBasis:
    """Centre-of-mass (mass 2m) and interaction-coordinate (mass m/2) bases."""

    com: EigenBasis
    interaction: EigenBasis


def trapped_pair_basis(sys, omega, pair_potential=None, n_com=120, n_interaction=120,
                       q_max=8.0, n_nodes=2401, com_half_width=None):
    """Bases for two particles in the trap ``m omega^2 q^2 / 2`` with a pair potential.

    The interaction coordinate ``r = q1 - q2`` feels ``mu omega^2 r^2/2 + u(|r|)``
    with ``mu = m/2``.  A singular pair potential makes the wavefunction vanish at
    ``r = 0``; the problem is then solved on ``[0, q_max]`` and mirrored.
    """
    m = sys.mass
    com_mass, mu = 2 * m, 0.5 * m
    if com_half_width is None:
        length = math.sqrt(sys.hbar / (com_mass * omega))
        com_half_width = length * (math.sqrt(2 * n_com + 1) + 12)
    com_grid = np.linspace(-com_half_width, com_half_width, 2 * n_nodes - 1)
    com = sho_eigenstates(sys, omega, n_com, com_grid, mass=com_mass)
    trap = Harmonic(mu, omega)
    if pair_potential is None:
        grid = np.linspace(-q_max, q_max, 2 * n_nodes - 1)
        inter = solve_eigen_1d(trap(grid), grid, sys, n_interaction, VANISH_BOTH, mass=mu)
    elif getattr(pair_potential, "singular", False):
        grid = np.linspace(0.0, q_max, n_nodes)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            u = trap(grid) + pair_potential(grid)
        inter = solve_eigen_1d(np.where(np.isnan(u), np.inf, u), grid, sys,
                               (n_interaction + 1) // 2, PARITY_EXTENSION, mass=mu)
    else:
        grid = np.linspace(-q_max, q_max, 2 * n_nodes - 1)
        u = trap(grid) + pair_potential(np.abs(grid))
        inter = solve_eigen_1d(u, grid, sys, n_interaction, VANISH_BOTH, mass=mu)
    return PairBasis(com, inter)


@dataclass
class PairCommutationTable:
    """Pair function ``w~2(q1,p1;q2,p2)`` assembled from three 2D tables.

    ``w~2 = ln S_com(Q, P) + ln S_int(r, k) - w~1(q1,p1) - w~1(q2,p2)`` with
    ``Q = (q1+q2)/2``, ``P = p1+p2``, ``r = q1-q2``, ``k = (p1-p2)/2``.
    """

    singlet: CommutationTable
    com: CommutationTable
    interaction: CommutationTable
    beta: float

    def __call__(self, q1, p1, q2, p2, method="interpolate"):
        q1, p1, q2, p2 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (q1, p1, q2, p2)))
        if method == "interpolate":
            f = lambda t, q, p: t(q, p)  # noqa: E731
        elif method == "direct":
            f = lambda t, q, p: t.direct(q, p)  # noqa: E731
        else:
            raise ValueError(f"unknown evaluation method {method!r}")
        return (f(self.com, 0.5 * (q1 + q2), p1 + p2)
                + f(self.interaction, q1 - q2, 0.5 * (p1 - p2))
                - f(self.singlet, q1, p1) - f(self.singlet, q2, p2))

    def gradients(self, q1, p1, q2, p2):
        """``(d w~2/d q1, d w~2/d q2)`` from differentiated component tables."""
        if not hasattr(self, "_d"):
            self._d = tuple(t.derivative_table() for t in (self.com, self.interaction, self.singlet))
        dcom, dint, dsing = self._d
        q1, p1, q2, p2 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (q1, p1, q2, p2)))
        c = dcom(0.5 * (q1 + q2), p1 + p2)
        i = dint(q1 - q2, 0.5 * (p1 - p2))
        return 0.5 * c + i - dsing(q1, p1), 0.5 * c - i - dsing(q2, p2)


def pair_w_table(pair_basis, singlet_table, sys, beta, com_axes, interaction_axes,
                 r_anchor=None, core_radius=0.0):
    """Build the pair table from the COM and interaction eigensums.

    ``com_axes`` and ``interaction_axes`` are ``(position_axis, momentum_axis)``
    pairs.  For a parity-extended interaction basis the branch is anchored
    separately on each side of the core at ``+-r_anchor``; nodes with ``|r| <
    core_radius`` are flagged low-accuracy.
    """
    com = singlet_w_table(pair_basis.com, sys, beta, com_axes[1], com_axes[0], kind="com")
    inter_basis = pair_basis.interaction
    if inter_basis.boundary == PARITY_EXTENSION:
        anchor = r_anchor if r_anchor is not None else 0.5 * inter_basis.grid[-1]
        anchors = (-anchor, anchor)
    else:
        anchors = 0.0
    inter = singlet_w_table(inter_basis, sys, beta, interaction_axes[1], interaction_axes[0],
                            q_anchor=anchors, kind="interaction", inversion_symmetric=True,
                            core_radius=core_radius)
    return PairCommutationTable(singlet_table, com, inter, beta)


def assemble_weight(config, singlet_table, pair_table=None):
    """Total ``W~ = sum_j w~1_j + sum_{j<k} w~2_jk`` and ``Omega = exp(W~)`` (1D)."""
    q = config.positions[:, 0]
    p = config.momenta[:, 0]
    n = q.size
    outside = []
    for j in range(n):
        qa, pa = singlet_table.grid.axes
        if not (qa.origin <= q[j] <= qa.end and pa.origin <= p[j] <= pa.end):
            outside.append(j)
    if pair_table is not None:
        ca, cpa = pair_table.com.grid.axes
        ia, ipa = pair_table.interaction.grid.axes
        for j in range(n):
            for k in range(j + 1, n):
                Q, P = 0.5 * (q[j] + q[k]), p[j] + p[k]
                r, kk = q[j] - q[k], 0.5 * (p[j] - p[k])
                if not (ca.origin <= Q <= ca.end and cpa.origin <= P <= cpa.end
                        and ia.origin <= r <= ia.end and ipa.origin <= kk <= ipa.end):
                    outside.extend([j, k])
    if outside:
        raise ValueError(f"particles {sorted(set(outside))} lie outside the tables")
    total = complex(np.sum(singlet_table(q, p)))
    if pair_table is not None:
        for j in range(n):
            for k in range(j + 1, n):
                total += complex(pair_table(q[j], p[j], q[k], p[k]))
    return total, np.exp(total)


def n3_gradient_decomposition(config, pair_table):
    """All terms of ``grad W~ . grad W~`` for three particles on a line (pairs only).

    Returns ``(terms, retained, neglected)`` where ``terms`` maps labels like
    ``"1:12*13"`` to ``grad_1 w12 . grad_1 w13`` (times 2 for cross terms),
    ``retained`` holds the four nearest-neighbour squares and ``neglected`` the
    cross term ``2 grad_2 w21 . grad_2 w23``; also reports the magnitude ratio.
    """
    q = config.positions[:, 0]
    p = config.momenta[:, 0]
    if q.size != 3:
        raise ValueError("the decomposition is written for N = 3")
    grads = {}
    for j in range(3):
        for k in range(3):
            if j < k:
                gj, gk = pair_table.gradients(q[j], p[j], q[k], p[k])
                grads[(j, k)] = complex(gj)
                grads[(k, j)] = complex(gk)
    terms = {}
    for l in range(3):
        a, b = [k for k in range(3) if k != l]
        ga, gb = grads[(l, a)], grads[(l, b)]
        terms[f"{l+1}:{l+1}{a+1}^2"] = ga * ga
        terms[f"{l+1}:2*{l+1}{a+1}*{l+1}{b+1}"] = 2 * ga * gb
        terms[f"{l+1}:{l+1}{b+1}^2"] = gb * gb
    retained = [terms["1:12^2"], terms["2:21^2"], terms["2:23^2"], terms["3:32^2"]]
    neglected = terms["2:2*21*23"]
    denom = sum(abs(t) for t in retained)
    ratio = abs(neglected) / denom if denom > 0 else 0.0
    return {"terms": terms, "retained": retained, "neglected": neglected, "ratio": ratio,
            "gradients": grads}
