"""Three Lennard-Jones particles in a harmonic trap: weight curves and tables.

Units are ``hbar = m = r_e = 1`` where ``r_e`` is the Lennard-Jones minimum,
so ``sigma = 2^(-1/6)``.  The trap frequency is :data:`FIGURE_TRAP_OMEGA`
and the temperature is fixed by ``beta hbar omega``.  The well depth is not
known from the original study and must be supplied.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .eigensolver import (PairCommutationTable, assemble_weight, n3_gradient_decomposition,
                          pair_w_table, sho_eigenstates, singlet_w_table, trapped_pair_basis)
from .grid import Axis
from .potentials import FIGURE_TRAP_OMEGA, Harmonic, LennardJones, PotentialModel
from .system import Configuration, ThermalSystem, classical_hamiltonian

FIG1_KINETIC = (0.0, 2.0, 8.0)
FIG2_P1, FIG2_P3 = 8.38, -11.85
FIG2_P2 = (0.0, 5.24, 10.5, 18.7)


@dataclass
class TrapSetup:
    """Tables and parameters for the trapped Lennard-Jones system."""

    sys: ThermalSystem
    omega: float
    lj: LennardJones
    singlet: object
    pair: PairCommutationTable

    @property
    def model(self):
        return PotentialModel(Harmonic(self.sys.mass, self.omega), self.lj)


def build_trap_tables(epsilon, beta_hbar_omega=0.5, omega=FIGURE_TRAP_OMEGA, n_states=140,
                      q_max=9.0, n_nodes=3001, q_half=2.5, p_half=25.0, table_nodes=(201, 401)):
    """Build singlet and pair tables for ``u = LJ(epsilon, r_e = 1)`` plus the trap."""
    if not epsilon > 0:
        raise ValueError("the Lennard-Jones depth epsilon must be positive")
    beta = beta_hbar_omega / omega
    sys = ThermalSystem(beta)
    lj = LennardJones(epsilon, 2 ** (-1 / 6))
    length = math.sqrt(1 / omega)
    half = length * (math.sqrt(2 * n_states + 1) + 12)
    basis = sho_eigenstates(sys, omega, n_states, np.linspace(-half, half, 2 * n_nodes - 1))
    nq, npts = table_nodes
    singlet = singlet_w_table(basis, sys, beta, Axis.symmetric(p_half, npts), Axis.symmetric(q_half, nq))
    pb = trapped_pair_basis(sys, omega, lj, n_com=n_states, n_interaction=n_states,
                            q_max=q_max, n_nodes=n_nodes)
    com_axes = (Axis.symmetric(q_half, nq), Axis.symmetric(2 * p_half, 2 * npts - 1))
    int_axes = (Axis.symmetric(2 * q_half, 2 * nq - 1), Axis.symmetric(p_half, npts))
    pair = pair_w_table(pb, singlet, sys, beta, com_axes, int_axes, r_anchor=1.0,
                        core_radius=0.5 * lj.sigma)
    return TrapSetup(sys, omega, lj, singlet, pair)


def _three(q2, p2, q1=-1.0, p1=0.0, q3=1.0, p3=0.0):
    return Configuration.from_1d([q1, q2, q3], [p1, p2, p3])


def _total(setup, config, method):
    q = config.positions[:, 0]
    p = config.momenta[:, 0]
    if method == "interpolate":
        return assemble_weight(config, setup.singlet, setup.pair)[0]
    total = complex(np.sum(setup.singlet.direct(q, p)))
    for j in range(3):
        for k in range(j + 1, 3):
            total += complex(np.asarray(setup.pair(q[j], p[j], q[k], p[k], method="direct")).item())
    return total


def figure1_data(setup, q2, kinetic=FIG1_KINETIC, method="direct"):
    """Re W~ and the classical exponent -beta H against ``q2`` for each momentum.

    Returns ``(columns, quantum, classical)`` where ``quantum`` and ``classical``
    have shape ``(len(q2), len(kinetic))``.  ``quantum`` has the additive
    constant that sets its value at ``(q2, p2) = (0, 0)`` to zero; so does
    ``classical`` with its own constant.  The raw (unnormalized) arrays are
    returned as ``raw_quantum`` and ``raw_classical`` in the info dict.
    """
    q2 = np.asarray(q2, dtype=float)
    p2 = setup.sys.momentum_for_kinetic(np.asarray(kinetic, dtype=float))
    quantum = np.empty((q2.size, p2.size))
    classical = np.empty_like(quantum)
    for j, pv in enumerate(p2):
        for i, qv in enumerate(q2):
            cfg = _three(qv, pv)
            quantum[i, j] = _total(setup, cfg, method).real
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                classical[i, j] = -setup.sys.beta * classical_hamiltonian(cfg, setup.model, setup.sys)
    ref_q = _total(setup, _three(0.0, 0.0), method).real
    ref_c = -setup.sys.beta * classical_hamiltonian(_three(0.0, 0.0), setup.model, setup.sys)
    info = {"raw_quantum": quantum.copy(), "raw_classical": classical.copy(), "p2": p2}
    return quantum - ref_q, classical - ref_c, info


def figure2_data(setup, q2, p2_values=FIG2_P2, method="direct"):
    """Re Omega = Re exp(W~) against ``q2`` for each ``p2`` (one shared scale).

    The curves are divided by ``max |Omega|`` over all curves, since the
    absolute normalization of the weight is arbitrary.
    """
    q2 = np.asarray(q2, dtype=float)
    w = np.empty((q2.size, len(p2_values)), dtype=complex)
    for j, pv in enumerate(p2_values):
        for i, qv in enumerate(q2):
            w[i, j] = _total(setup, _three(qv, pv, p1=FIG2_P1, p3=FIG2_P3), method)
    finite = np.isfinite(w.real)
    shift = np.max(w.real[finite])
    omega = np.exp(np.where(finite, w - shift, -np.inf))
    return omega.real, w


def decomposition_scan(setup, q2, p2=0.0):
    """Neglected-to-retained ratio of the N = 3 gradient expansion along ``q2``."""
    out = []
    for qv in np.asarray(q2, dtype=float):
        out.append(n3_gradient_decomposition(_three(qv, p2), setup.pair)["ratio"])
    return np.array(out)
