"""Thermal parameters, phase-space configurations and the classical Hamiltonian."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ThermalSystem:
    """Inverse temperature, Planck constant, particle mass and dimensionality.

    Defaults are reduced units with ``hbar = m = 1``.
    """

    beta: float
    hbar: float = 1.0
    mass: float = 1.0
    dim: int = 1

    def __post_init__(self):
        for name in ("beta", "hbar", "mass"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be finite and positive, got {value!r}")
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim!r}")

    @property
    def thermal_length(self):
        """``hbar sqrt(beta / m)``."""
        return self.hbar * np.sqrt(self.beta / self.mass)

    @property
    def thermal_wavelength(self):
        """de Broglie wavelength ``sqrt(2 pi beta hbar^2 / m)``."""
        return np.sqrt(2 * np.pi * self.beta / self.mass) * self.hbar

    def with_beta(self, beta):
        return ThermalSystem(beta, self.hbar, self.mass, self.dim)

    def momentum_for_kinetic(self, reduced_kinetic):
        """Momentum magnitude with ``beta p^2 / 2m`` equal to ``reduced_kinetic``."""
        return np.sqrt(2 * self.mass * np.asarray(reduced_kinetic, dtype=float) / self.beta)


@dataclass(frozen=True)
class Configuration:
    """Positions and momenta of ``N`` particles, each an ``(N, d)`` array."""

    positions: np.ndarray
    momenta: np.ndarray

    def __post_init__(self):
        q = np.atleast_2d(np.asarray(self.positions, dtype=float))
        p = np.atleast_2d(np.asarray(self.momenta, dtype=float))
        if np.ndim(self.positions) == 1:
            q = q.T
        if np.ndim(self.momenta) == 1:
            p = p.T
        if q.shape != p.shape:
            raise ValueError(f"positions {q.shape} and momenta {p.shape} differ in shape")
        if q.shape[0] < 1:
            raise ValueError("a configuration needs at least one particle")
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "positions", q)
        object.__setattr__(self, "momenta", p)

    @property
    def n_particles(self):
        return self.positions.shape[0]

    @property
    def dim(self):
        return self.positions.shape[1]

    @classmethod
    def from_1d(cls, q, p):
        """Build a one-dimensional configuration from flat position/momentum lists."""
        return cls(np.asarray(q, dtype=float)[:, None], np.asarray(p, dtype=float)[:, None])


def classical_hamiltonian(config, model, sys):
    """``sum p^2/2m + sum u1(q_j) + sum_{j<k} u2(q_jk)``.

    Overlapping particles under a divergent pair potential give ``inf`` with a
    ``RuntimeWarning`` rather than an exception.
    """
    p = config.momenta
    energy = float(np.sum(p * p)) / (2 * sys.mass)
    if model.singlet is not None:
        energy += float(np.sum(model.singlet_value(config.positions)))
    if model.pair is not None:
        q = config.positions
        n = config.n_particles
        j, k = np.triu_indices(n, 1)
        r = np.linalg.norm(q[j] - q[k], axis=-1)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            pair = model.pair_value(r)
        pair = np.where(np.isnan(pair) & (r == 0), np.inf, pair)
        energy += float(np.sum(pair))
    if not np.isfinite(energy):
        warnings.warn("classical Hamiltonian diverges (overlapping particles)", RuntimeWarning,
                      stacklevel=2)
        return np.inf
    return energy
