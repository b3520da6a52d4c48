"""Fast invariant suite behind ``qoz selfcheck``.

Each check returns ``(name, passed, detail)``; the whole suite runs in a few
seconds and uses a fixed seed.
"""

from __future__ import annotations

import io
import math

import numpy as np

from .eigensolver import sho_eigenstates, singlet_w_table, solve_eigen_1d, trace_integral
from .grid import Axis, ComplexGrid
from .linear_fourier import b_factor, linear_solution, pair_potential_ft
from .nonlinear_pde import integrate_pair_slice
from .potentials import GaussianWell, Harmonic, PotentialModel
from .series import w_series_eval
from .spectral import SpectralGrid, index_convolution, index_convolution_direct
from .symmetrization import (double_dimer_identity_check, eta_bruteforce, loop_specs, loop_sums,
                             permutation_count)
from .system import Configuration, ThermalSystem

SEED = 20240


def sho_singlet_exact(q, p, beta, omega=1.0, hbar=1.0, mass=1.0):
    """Closed-form harmonic-oscillator ``w~(q, p)``."""
    x = beta * hbar * omega
    t = math.tanh(x)
    return (-0.5 * math.log(math.cosh(x))
            - mass * omega * q * q / (2 * hbar) * t
            - p * p / (2 * mass * hbar * omega) * t
            + 1j * p * q / hbar * (1 / math.cosh(x) - 1))


def _check(name, err, tol):
    return name, bool(err <= tol), f"err={err:.2e} tol={tol:.0e}"


def check_sho_eigensum(seed=SEED):
    sys = ThermalSystem(0.5)
    half = math.sqrt(2 * 80 + 1) + 12
    basis = sho_eigenstates(sys, 1.0, 80, np.linspace(-half, half, 2001))
    tab = singlet_w_table(basis, sys, 0.5, Axis.symmetric(4.0, 41), Axis.symmetric(2.0, 21))
    q, p = np.meshgrid(tab.q, tab.p, indexing="ij")
    exact = np.vectorize(sho_singlet_exact)(q, p, 0.5)
    return _check("sho eigensum vs closed form", float(np.max(np.abs(tab.values - exact))), 1e-8)


def check_trace(seed=SEED):
    sys = ThermalSystem(0.5)
    half = math.sqrt(2 * 80 + 1) + 12
    basis = sho_eigenstates(sys, 1.0, 80, np.linspace(-half, half, 2001))
    tab = singlet_w_table(basis, sys, 0.5, Axis.symmetric(12.0, 161), Axis.symmetric(12.0, 161))
    z = 1 / (2 * math.sinh(0.25))
    return _check("trace identity", abs(trace_integral(tab).real / z - 1), 1e-4)


def check_fd_box(seed=SEED):
    sys = ThermalSystem(1.0)
    grid = np.linspace(0.0, 1.0, 2001)
    basis = solve_eigen_1d(lambda x: np.zeros_like(x), grid, sys, 5)
    exact = (np.pi * np.arange(1, 6)) ** 2 / 2
    return _check("finite-difference box spectrum", float(np.max(np.abs(basis.energies / exact - 1))), 1e-5)


def check_series(seed=SEED):
    sys = ThermalSystem(0.1)
    model = PotentialModel(Harmonic(1.0, 1.0))
    worst = 0.0
    for q, p in ((0.5, 1.0), (-1.0, 2.0), (1.5, -0.7)):
        cfg = Configuration.from_1d([q], [p])
        approx = w_series_eval(cfg, model, sys, 4).value - 0.1 * (p * p / 2 + q * q / 2)
        worst = max(worst, abs(approx - sho_singlet_exact(q, p, 0.1)))
    return _check("hbar series vs closed form", worst, 1e-5)


def check_symmetrization(seed=SEED):
    rng = np.random.default_rng(seed)
    sys = ThermalSystem(1.0)
    worst = 0.0
    for stats in ("bose", "fermi"):
        for _ in range(20):
            cfg = Configuration.from_1d(rng.uniform(-2, 2, 3), rng.uniform(-2, 2, 3))
            brute = eta_bruteforce(cfg, sys, stats)
            worst = max(worst, abs(brute - loop_sums(cfg, sys, stats, 3).truncated_sum))
    return _check("N=3 loop expansion is exact", worst, 1e-13)


def check_double_dimer(seed=SEED):
    rng = np.random.default_rng(seed + 1)
    cfg = Configuration.from_1d(rng.uniform(-2, 2, 5), rng.uniform(-2, 2, 5))
    lhs, rhs, _ = double_dimer_identity_check(cfg, ThermalSystem(1.0))
    return _check("double-dimer identity (N=5)", abs(lhs - rhs), 1e-12)


def check_loop_counts(seed=SEED):
    bad = [n for n in range(1, 7) if sum(permutation_count(s) for s in loop_specs(n)) != math.factorial(n)]
    return "loop counts sum to N!", not bad, f"failing N: {bad}" if bad else "N=1..6"


def check_convolution(seed=SEED):
    rng = np.random.default_rng(seed + 2)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    b = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    err = float(np.max(np.abs(index_convolution(a, b) - index_convolution_direct(a, b))))
    return _check("padded spectral convolution", err, 1e-12)


def check_linear_vs_rk4(seed=SEED):
    sys = ThermalSystem(1.0, dim=2)
    grid = SpectralGrid(32, 20.0)
    kx, kz = grid.mesh_k()
    u_hat = pair_potential_ft(GaussianWell(1.0, 1.0), np.hypot(kx, kz)) * grid.nyquist_mask()
    tr = integrate_pair_slice(u_hat, 1.0, grid, sys, 0.1, 1.0, 200, nonlinear=False, keep_every=200)
    exact = linear_solution(u_hat, b_factor(1.0, (kx, kz), sys), 1.0) * grid.nyquist_mask()
    return _check("linear solution vs RK4", float(np.max(np.abs(tr.final - exact))), 1e-8)


def check_grid_roundtrip(seed=SEED):
    rng = np.random.default_rng(seed + 3)
    g = ComplexGrid([Axis(-1.0, 0.5, 5), Axis(0.0, 0.25, 4)],
                    rng.normal(size=(5, 4)) + 1j * rng.normal(size=(5, 4)), ["q", "p"])
    back = ComplexGrid.from_bytes(g.to_bytes())
    buf = io.StringIO()
    g.to_csv(buf)
    ok = np.array_equal(back.data, g.data) and back.axes == g.axes
    return "QOZGRID1 round trip", bool(ok), "bitwise" if ok else "mismatch"


def check_conjugacy(seed=SEED):
    sys = ThermalSystem(0.5)
    half = math.sqrt(2 * 80 + 1) + 12
    basis = sho_eigenstates(sys, 1.0, 80, np.linspace(-half, half, 2001))
    tab = singlet_w_table(basis, sys, 0.5, Axis.symmetric(4.0, 41), Axis.symmetric(2.0, 21))
    v = tab.values
    return _check("conjugacy F(-p) = F(p)*", float(np.max(np.abs(v[:, ::-1] - np.conj(v)))), 1e-10)


CHECKS = (check_sho_eigensum, check_trace, check_fd_box, check_series, check_symmetrization,
          check_double_dimer, check_loop_counts, check_convolution, check_linear_vs_rk4,
          check_grid_roundtrip, check_conjugacy)


def run_checks(seed=SEED):
    rows = []
    for check in CHECKS:
        try:
            rows.append(check(seed))
        except Exception as exc:  # report, never abort the table
            rows.append((check.__name__, False, f"{type(exc).__name__}: {exc}"))
    return rows
