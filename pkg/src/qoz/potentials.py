"""Singlet and pair potentials with analytic derivatives to fourth order.

Every potential here is a function of a squared distance ``s = |x|^2`` (the
pair separation for pair potentials, the distance from the trap centre for
singlet potentials).  Derivatives with respect to ``s`` are closed form, and
both the radial derivatives ``d^n u / dr^n`` and the Cartesian derivative
tensors are obtained from them by the chain rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

MAX_ORDER = 4

#: Harmonic trap frequency (units hbar = m = r_e = 1) for which the momenta
#: p r_e / hbar = 8.38 and -11.85 correspond to beta p^2 / 2m = 5 and 10 at
#: beta hbar omega = 0.5.  Least-squares value of m omega r_e^2 / hbar.
FIGURE_TRAP_OMEGA = 0.5 * (8.38**2 / 20.0 + 11.85**2 / 40.0)


class RadialPotential:
    """Base class: a potential ``u(s)`` of the squared distance ``s``."""

    #: True if the potential diverges at zero separation.
    singular = False

    def s_derivatives(self, s, order=MAX_ORDER):
        """Return ``[g(s), g'(s), ..., g^(order)(s)]`` as arrays."""
        raise NotImplementedError

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.s_derivatives(r * r, 0)[0]

    def r_derivative(self, r, order):
        """``d^n u / dr^n`` at distance ``r`` for ``n <= 4``."""
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"derivative order must be in 0..{MAX_ORDER}, got {order}")
        r = np.asarray(r, dtype=float)
        g = self.s_derivatives(r * r, max(order, 2) if order >= 2 else order)
        r2 = r * r
        if order == 0:
            return g[0]
        if order == 1:
            return 2 * r * g[1]
        if order == 2:
            return 2 * g[1] + 4 * r2 * g[2]
        if order == 3:
            return 12 * r * g[2] + 8 * r * r2 * g[3]
        return 12 * g[2] + 48 * r2 * g[3] + 16 * r2 * r2 * g[4]

    def tensors(self, x, order=MAX_ORDER):
        """Cartesian derivative tensors of ``u(|x|^2)`` at a d-vector ``x``.

        Returns a list ``[u, grad, hess, T3, T4]`` truncated at ``order``;
        ``T_n`` has shape ``(d,) * n``.
        """
        x = np.asarray(x, dtype=float)
        d = x.size
        g = self.s_derivatives(float(x @ x), order)
        eye = np.eye(d)
        out = [float(g[0])]
        if order >= 1:
            out.append(2 * g[1] * x)
        if order >= 2:
            out.append(2 * g[1] * eye + 4 * g[2] * np.outer(x, x))
        if order >= 3:
            sym = sum(np.einsum(f"{a},{b}->ijk", eye, x) for a, b in [("ij", "k"), ("ik", "j"), ("jk", "i")])
            out.append(4 * g[2] * sym + 8 * g[3] * np.einsum("i,j,k->ijk", x, x, x))
        if order >= 4:
            dd = sum(np.einsum(f"{a},{b}->ijkl", eye, eye) for a, b in [("ij", "kl"), ("ik", "jl"), ("il", "jk")])
            six = sum(
                np.einsum(f"{a},{b},{c}->ijkl", eye, x, x)
                for a, b, c in [("ij", "k", "l"), ("ik", "j", "l"), ("il", "j", "k"),
                                ("jk", "i", "l"), ("jl", "i", "k"), ("kl", "i", "j")]
            )
            xxxx = np.einsum("i,j,k,l->ijkl", x, x, x, x)
            out.append(4 * g[2] * dd + 8 * g[3] * six + 16 * g[4] * xxxx)
        return out


@dataclass(frozen=True)
class Harmonic(RadialPotential):
    """Harmonic trap ``u = m omega^2 |q|^2 / 2``."""

    mass: float = 1.0
    omega: float = 1.0

    def s_derivatives(self, s, order=MAX_ORDER):
        s = np.asarray(s, dtype=float)
        k = 0.5 * self.mass * self.omega**2
        out = [k * s, np.full_like(s, k)]
        out += [np.zeros_like(s)] * (MAX_ORDER - 1)
        return out[: order + 1]


@dataclass(frozen=True)
class GaussianWell(RadialPotential):
    """Gaussian well ``u = -depth * exp(-r^2 / 2 width^2)``."""

    depth: float = 1.0
    width: float = 1.0

    def s_derivatives(self, s, order=MAX_ORDER):
        s = np.asarray(s, dtype=float)
        a = -0.5 / self.width**2
        e = -self.depth * np.exp(a * s)
        return [e * a**n for n in range(order + 1)]

    def fourier_2d(self, k):
        """Closed-form two-dimensional Fourier transform."""
        k = np.asarray(k, dtype=float)
        s2 = self.width**2
        return -self.depth * 2 * np.pi * s2 * np.exp(-0.5 * k * k * s2)

    def fourier_1d(self, k):
        k = np.asarray(k, dtype=float)
        s = self.width
        return -self.depth * math.sqrt(2 * np.pi) * s * np.exp(-0.5 * k * k * s * s)


@dataclass(frozen=True)
class LennardJones(RadialPotential):
    """``u = 4 eps ((sigma/r)^12 - (sigma/r)^6)``."""

    epsilon: float = 1.0
    sigma: float = 1.0
    singular = True

    @property
    def r_min(self):
        return 2 ** (1 / 6) * self.sigma

    def s_derivatives(self, s, order=MAX_ORDER):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            a = 4 * self.epsilon * self.sigma**12
            b = -4 * self.epsilon * self.sigma**6
            out = []
            c6, c3 = 1.0, 1.0
            for n in range(order + 1):
                out.append(a * c6 * s ** (-6.0 - n) + b * c3 * s ** (-3.0 - n))
                c6 *= -(6 + n)
                c3 *= -(3 + n)
        return out

    def r_derivative(self, r, order):
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"derivative order must be in 0..{MAX_ORDER}, got {order}")
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("Lennard-Jones derivatives need r > 0")
        c12, c6 = 1.0, 1.0
        for n in range(order):
            c12 *= -(12 + n)
            c6 *= -(6 + n)
        e, s = self.epsilon, self.sigma
        return 4 * e * (c12 * s**12 * r ** (-12.0 - order) - c6 * s**6 * r ** (-6.0 - order))


@dataclass(frozen=True)
class SmoothedCore(RadialPotential):
    """Hard-core potential blended into a finite cap below ``r_cut``.

    ``u_reg = u (1 - e^{-(r/r_c)^12}) + cap e^{-(r/r_c)^12}``; finite at the
    origin, so it has a Fourier transform.
    """

    base: RadialPotential = field(default_factory=LennardJones)
    r_cut: float = 0.8
    cap: float = 0.0

    def s_derivatives(self, s, order=MAX_ORDER):
        s = np.asarray(s, dtype=float)
        if order > 0:
            raise NotImplementedError("smoothed cores are only used for Fourier transforms")
        x6 = (s / self.r_cut**2) ** 6
        damp = np.exp(-x6)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            u = self.base.s_derivatives(s, 0)[0]
            blended = u * -np.expm1(-x6)
            # r -> 0: u (1 - damp) ~ u x6, evaluated on a clipped s to avoid inf * 0
            small = x6 < 1e-8
            if np.any(small):
                s_safe = np.maximum(s, 1e-6 * self.r_cut**2)
                x6_safe = (s_safe / self.r_cut**2) ** 6
                u_safe = self.base.s_derivatives(s_safe, 0)[0]
                blended = np.where(small, u_safe * x6_safe, blended)
        return [blended + self.cap * damp]


@dataclass(frozen=True)
class PotentialModel:
    """A singlet (external) potential plus a pair potential; either may be absent."""

    singlet: Optional[RadialPotential] = None
    pair: Optional[RadialPotential] = None

    def singlet_value(self, q):
        if self.singlet is None:
            return np.zeros(np.shape(q)[:-1]) if np.ndim(q) > 1 else 0.0
        q = np.asarray(q, dtype=float)
        return self.singlet.s_derivatives(np.sum(q * q, axis=-1), 0)[0]

    def pair_value(self, r):
        if self.pair is None:
            return np.zeros_like(np.asarray(r, dtype=float))
        return self.pair(r)

    def total_tensors(self, positions, order=MAX_ORDER):
        """Derivative tensors of the total potential over all ``N*d`` coordinates.

        ``positions`` has shape ``(N, d)``.  Returns ``[U, grad, hess, T3, T4]``
        truncated at ``order``, with tensor axes of length ``N*d``.
        """
        q = np.atleast_2d(np.asarray(positions, dtype=float))
        n, d = q.shape
        dim = n * d
        out = [0.0] + [np.zeros((dim,) * k) for k in range(1, order + 1)]

        def add(local, embed):
            out[0] += local[0]
            for k in range(1, order + 1):
                t = local[k]
                for _ in range(k):
                    # contract the leading local axis, append a global one
                    t = np.tensordot(t, embed, axes=([0], [0]))
                out[k] += t

        if self.singlet is not None:
            for j in range(n):
                embed = np.zeros((d, dim))
                embed[:, j * d:(j + 1) * d] = np.eye(d)
                add(self.singlet.tensors(q[j], order), embed)
        if self.pair is not None:
            for j in range(n):
                for k in range(j + 1, n):
                    embed = np.zeros((d, dim))
                    embed[:, j * d:(j + 1) * d] = np.eye(d)
                    embed[:, k * d:(k + 1) * d] = -np.eye(d)
                    add(self.pair.tensors(q[j] - q[k], order), embed)
        return out


def lj_pair_derivatives(r, order, epsilon=1.0, sigma=1.0):
    """``d^n/dr^n`` of the Lennard-Jones pair potential; ``r`` must be positive."""
    return LennardJones(epsilon, sigma).r_derivative(r, order)


def sho_singlet_derivatives(q, order, mass=1.0, omega=1.0):
    """``d^n/dq^n`` of ``m omega^2 q^2 / 2``; zero from third order on."""
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"derivative order must be in 0..{MAX_ORDER}, got {order}")
    q = np.asarray(q, dtype=float)
    k = mass * omega**2
    if order == 0:
        return 0.5 * k * q * q
    if order == 1:
        return k * q
    if order == 2:
        return np.full_like(q, k)
    return np.zeros_like(q)
