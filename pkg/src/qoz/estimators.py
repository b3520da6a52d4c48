"""scikit-learn style wrappers around the numerical routes.

Each estimator takes its physical parameters in ``__init__`` (so
``get_params``/``set_params``/``clone`` work), builds its tables in ``fit`` and
evaluates the commutation or correlation function in ``predict``.  ``X``
holds one phase-space point per row.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .eigensolver import sho_eigenstates, singlet_w_table
from .grid import Axis
from .linear_fourier import inverse_to_table, linear_field
from .oz import PhaseSpaceAxes, initial_guess, mayer_f, momentum_density, picard_solve
from .potentials import Harmonic, PotentialModel
from .series import combined_series
from .spectral import SpectralGrid
from .system import Configuration, ThermalSystem


def _system(est, dim=1):
    return ThermalSystem(est.beta, est.hbar, est.mass, dim)


class SeriesCommutation(BaseEstimator):
    """Order-``order`` hbar series of ``W - beta H`` for 1D configurations.

    ``X`` rows are ``(q_1..q_N, p_1..p_N)``.
    """

    def __init__(self, model=None, beta=1.0, hbar=1.0, mass=1.0, order=4):
        self.model = model
        self.beta = beta
        self.hbar = hbar
        self.mass = mass
        self.order = order

    def fit(self, X, y=None):
        X = check_array(X)
        if X.shape[1] % 2:
            raise ValueError("rows must hold N positions followed by N momenta")
        self.n_particles_ = X.shape[1] // 2
        self.system_ = _system(self)
        self.model_ = self.model if self.model is not None else PotentialModel(Harmonic(self.mass, 1.0))
        return self

    def predict(self, X):
        check_is_fitted(self, "system_")
        X = check_array(X)
        n = self.n_particles_
        if X.shape[1] != 2 * n:
            raise ValueError(f"expected {2 * n} columns, got {X.shape[1]}")
        out = np.empty(X.shape[0], dtype=complex)
        for i, row in enumerate(X):
            cfg = Configuration.from_1d(row[:n], row[n:])
            out[i] = combined_series(cfg, self.model_, self.system_, self.order)
        return out


class EigensumSinglet(BaseEstimator):
    """Harmonic-oscillator singlet table ``w~(q, p)`` from the eigenstate sum.

    ``X`` rows are ``(q, p)``; predictions interpolate the table, or evaluate
    the sum exactly when ``exact=True``.
    """

    def __init__(self, omega=1.0, beta=1.0, hbar=1.0, mass=1.0, n_states=200,
                 q_half=4.0, p_half=8.0, table_nodes=161, exact=False):
        self.omega = omega
        self.beta = beta
        self.hbar = hbar
        self.mass = mass
        self.n_states = n_states
        self.q_half = q_half
        self.p_half = p_half
        self.table_nodes = table_nodes
        self.exact = exact

    def fit(self, X=None, y=None):
        sys = _system(self)
        length = np.sqrt(self.hbar / (self.mass * self.omega))
        half = length * (np.sqrt(2 * self.n_states + 1) + 12)
        basis = sho_eigenstates(sys, self.omega, self.n_states, np.linspace(-half, half, 4001))
        self.table_ = singlet_w_table(basis, sys, self.beta,
                                      Axis.symmetric(self.p_half, self.table_nodes),
                                      Axis.symmetric(self.q_half, self.table_nodes))
        return self

    def predict(self, X):
        check_is_fitted(self, "table_")
        X = check_array(X)
        if X.shape[1] != 2:
            raise ValueError("rows must be (q, p)")
        if self.exact:
            return self.table_.direct(X[:, 0], X[:, 1])
        return self.table_(X[:, 0], X[:, 1])


class LinearPairCommutation(BaseEstimator):
    """Linearized pair function ``w~(p, q_x, q_z)`` from the Fourier route.

    ``X`` rows are ``(p, q_x, q_z)``; ``p`` must lie within the momentum slices.
    """

    def __init__(self, potential=None, beta=1.0, hbar=1.0, mass=1.0, n=256, extent=20.0,
                 p_axis=None, regularization=None):
        self.potential = potential
        self.beta = beta
        self.hbar = hbar
        self.mass = mass
        self.n = n
        self.extent = extent
        self.p_axis = p_axis
        self.regularization = regularization

    def fit(self, X=None, y=None):
        if self.potential is None:
            raise ValueError("a pair potential is required")
        sys = _system(self, 2)
        self.field_ = linear_field(self.potential, sys, self.beta, SpectralGrid(self.n, self.extent),
                                   self.p_axis, self.regularization)
        self.table_ = inverse_to_table(self.field_)
        return self

    def predict(self, X):
        check_is_fitted(self, "table_")
        X = check_array(X)
        if X.shape[1] != 3:
            raise ValueError("rows must be (p, q_x, q_z)")
        return self.table_.interpolate(X)


class QuantumHNC(BaseEstimator):
    """Homogeneous 1D phase-space OZ/HNC solver.

    ``w`` is an optional array ``[p1, p2, q]`` of pair commutation values on
    the solver grid.  ``predict`` takes rows ``(q, p1_index, p2_index)`` and
    interpolates ``h`` linearly in ``q``.
    """

    def __init__(self, potential=None, density=0.1, beta=1.0, hbar=1.0, mass=1.0,
                 statistics="boltzmann", q_max=20.0, n_half=1000, n_p=5, max_kinetic=8.0,
                 w=None, alpha=0.2, tol=1e-8, max_iter=5000):
        self.potential = potential
        self.density = density
        self.beta = beta
        self.hbar = hbar
        self.mass = mass
        self.statistics = statistics
        self.q_max = q_max
        self.n_half = n_half
        self.n_p = n_p
        self.max_kinetic = max_kinetic
        self.w = w
        self.alpha = alpha
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X=None, y=None):
        sys = _system(self)
        self.axes_ = PhaseSpaceAxes.build(self.q_max, self.n_half, sys, self.n_p, self.max_kinetic)
        self.rho_weights_ = momentum_density(self.axes_, sys, self.density)
        self.mayer_ = mayer_f(self.axes_, sys, self.potential, self.w, self.statistics)
        result = picard_solve(initial_guess(self.mayer_, self.rho_weights_), self.mayer_,
                              self.alpha, self.max_iter, self.tol)
        self.result_ = result
        self.h_, self.c_ = result.h, result.c
        self.converged_ = result.converged
        self.n_iter_ = result.iterations
        return self

    def predict(self, X):
        check_is_fitted(self, "h_")
        X = check_array(X)
        if X.shape[1] != 3:
            raise ValueError("rows must be (q, p1_index, p2_index)")
        q = self.axes_.q
        out = np.empty(X.shape[0], dtype=complex)
        for i, (qv, a, b) in enumerate(X):
            row = self.h_[int(a), int(b)]
            out[i] = np.interp(qv, q, row.real) + 1j * np.interp(qv, q, row.imag)
        return out
