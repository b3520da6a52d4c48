"""Loop expansion of the boson/fermion symmetrization function.

With ``<p|q> = exp(-i p.q / hbar)`` the symmetrization function is

    eta = sum_P (+-1)^P <P p|q> / <p|q> = sum_P (+-1)^P exp(-i (P p - p).q / hbar)

and decomposing each permutation into cycles ("loops") gives products of
specific loop factors.  A specific l-loop carries the sign ``(+-1)^(l-1)``.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

BOSE = "bose"
FERMI = "fermi"
MAX_LOOP = 4
MAX_BRUTE_FORCE = 8


def _sign(statistics):
    if statistics == BOSE:
        return 1.0
    if statistics == FERMI:
        return -1.0
    raise ValueError(f"statistics must be 'bose' or 'fermi', got {statistics!r}")


def dimer_eta(p_jk, q_jk, sys, statistics=BOSE):
    """``+-exp(i p_jk . q_jk / hbar)`` for one pair (arrays broadcast over pairs)."""
    dot = np.sum(np.atleast_1d(np.asarray(p_jk, dtype=float)) * np.atleast_1d(np.asarray(q_jk, dtype=float)),
                 axis=-1)
    val = _sign(statistics) * np.exp(1j * dot / sys.hbar)
    return complex(val) if np.ndim(val) == 0 else val


def loop_eta(indices, config, sys, statistics=BOSE):
    """Specific loop factor for the ordered particle labels ``j_1 .. j_l``.

    ``exp(p_{j1 jl}.q_{jl}/i hbar) prod_k exp(p_{j(k+1) jk}.q_{jk}/i hbar)``
    times ``(+-1)^(l-1)``.  The loop ``(j, k, l)`` is the reverse orientation of
    :func:`trimer_eta` ``(j, k, l)``; both orientations enter the loop sums.
    """
    idx = [int(i) for i in indices]
    if len(idx) < 2:
        raise ValueError("a loop needs at least two particles")
    if len(set(idx)) != len(idx):
        raise ValueError(f"loop indices must be distinct, got {idx}")
    q, p = config.positions, config.momenta
    ell = len(idx)
    expo = (p[idx[0]] - p[idx[-1]]) @ q[idx[-1]]
    for k in range(ell - 1):
        expo += (p[idx[k + 1]] - p[idx[k]]) @ q[idx[k]]
    return _sign(statistics) ** (ell - 1) * complex(np.exp(-1j * expo / sys.hbar))


def trimer_eta(j, k, l, config, sys):
    """Three-particle loop written as ``exp(p_lj.q_j + p_jk.q_k + p_kl.q_l)/i hbar``."""
    q, p = config.positions, config.momenta
    expo = (p[l] - p[j]) @ q[j] + (p[j] - p[k]) @ q[k] + (p[k] - p[l]) @ q[l]
    return complex(np.exp(-1j * expo / sys.hbar))


@dataclass
class LoopExpansion:
    """Loop sums ``eta^(l)`` for ``l = 2 .. lmax``."""

    statistics: str
    loop_sums: dict = field(default_factory=dict)

    @property
    def total_exponential(self):
        """``prod_l exp(eta^(l))``, the exponential resummation."""
        return complex(np.exp(sum(self.loop_sums.values())))

    @property
    def truncated_sum(self):
        """``1 + sum_l eta^(l)`` (exact for three particles)."""
        return 1 + sum(self.loop_sums.values())


def _loop_orderings(subset):
    """Every distinct cyclic ordering of ``subset``, starting at its first label."""
    first, rest = subset[0], subset[1:]
    for perm in itertools.permutations(rest):
        yield (first, *perm)


def _edge_weight(config, a, b, cutoff, damping):
    r = np.linalg.norm(config.positions[a] - config.positions[b])
    if cutoff is not None and r > cutoff:
        return 0.0
    if damping is not None:
        return math.exp(-((r / damping) ** 2))
    return 1.0


def loop_sums(config, sys, statistics=BOSE, lmax=MAX_LOOP, cutoff_radius=None, damping_length=None):
    """``eta^(l) = sum`` of specific l-loops over all particle subsets, ``l <= lmax``.

    ``cutoff_radius`` is in units of the thermal wavelength; loops with an edge
    longer than that are skipped.  ``damping_length`` (absolute units) multiplies
    each loop by ``exp(-(q_jk/q_c)^2)`` over its edges.
    """
    if lmax > MAX_LOOP:
        raise ValueError(f"loop orders above {MAX_LOOP} are not supported")
    if lmax < 2:
        raise ValueError("lmax must be at least 2")
    n = config.n_particles
    cutoff = None if cutoff_radius is None else cutoff_radius * sys.thermal_wavelength
    sums = {}
    for ell in range(2, lmax + 1):
        total = 0j
        for subset in itertools.combinations(range(n), ell):
            orderings = [subset] if ell == 2 else _loop_orderings(subset)
            for order in orderings:
                edges = zip(order, order[1:] + order[:1]) if ell > 2 else [order]
                weight = 1.0
                for a, b in edges:
                    weight *= _edge_weight(config, a, b, cutoff, damping_length)
                if weight:
                    total += weight * loop_eta(order, config, sys, statistics)
        sums[ell] = total
    return LoopExpansion(statistics, sums)


def _parity(perm):
    seen, parity = set(), 0
    for start in range(len(perm)):
        if start in seen:
            continue
        j, length = start, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        parity += length - 1
    return parity % 2


def eta_bruteforce(config, sys, statistics=BOSE):
    """Exact symmetrization function by enumerating all ``N!`` permutations."""
    n = config.n_particles
    if n > MAX_BRUTE_FORCE:
        raise ValueError(f"brute force limited to N <= {MAX_BRUTE_FORCE}, got {n}")
    sign = _sign(statistics)
    q, p = config.positions, config.momenta
    total = 0j
    for perm in itertools.permutations(range(n)):
        expo = np.sum((p[list(perm)] - p) * q)
        total += sign ** _parity(perm) * np.exp(-1j * expo / sys.hbar)
    return complex(total)


def dimer_matrix(config, sys, statistics=BOSE, cutoff_radius=None):
    """Symmetric matrix of dimer factors with zero diagonal (``eta-bar``)."""
    q, p = config.positions, config.momenta
    dq = q[:, None, :] - q[None, :, :]
    dp = p[:, None, :] - p[None, :, :]
    eta = dimer_eta(dp, dq, sys, statistics)
    eta = np.array(eta, dtype=complex).reshape(q.shape[0], q.shape[0])
    np.fill_diagonal(eta, 0)
    if cutoff_radius is not None:
        eta[np.linalg.norm(dq, axis=-1) > cutoff_radius * sys.thermal_wavelength] = 0
    return eta


def double_dimer_identity_check(config, sys, statistics=BOSE, cutoff_radius=None):
    """Both sides of the disjoint double-dimer identity.

    ``lhs`` enumerates every unordered pair of disjoint transpositions once.
    ``rhs = (1/8) sum eta eta - (1/2) sum_{jkl} eta_jk eta_jl + (1/4) sum_jk eta_jk^2``
    over unrestricted labels of the zero-diagonal dimer matrix.  Returns
    ``(lhs, rhs, (leading, three_label, two_label))``.
    """
    n = config.n_particles
    if n < 4:
        raise ValueError("the double-dimer identity needs N >= 4")
    eta = dimer_matrix(config, sys, statistics, cutoff_radius)
    pairs = list(itertools.combinations(range(n), 2))
    lhs = 0j
    for a, (j, k) in enumerate(pairs):
        for (l, m) in pairs[a + 1:]:
            if len({j, k, l, m}) == 4:
                lhs += eta[j, k] * eta[l, m]
    s = eta.sum()
    leading = s * s / 8
    row = eta.sum(axis=1)
    three = -0.5 * np.sum(row * row)
    two = 0.25 * np.sum(eta * eta)
    return complex(lhs), complex(leading + three + two), (complex(leading), complex(three), complex(two))


def permutation_count(loop_spec):
    """Number of permutations of ``N = sum l m_l`` objects with ``m_l`` l-loops.

    ``loop_spec`` maps loop length to multiplicity, or is a list of loop lengths.
    """
    if not isinstance(loop_spec, dict):
        loop_spec = Counter(int(l) for l in loop_spec)
    if any(int(l) < 1 or int(m) < 0 for l, m in loop_spec.items()):
        raise ValueError(f"invalid loop specification {dict(loop_spec)}")
    n = sum(int(l) * int(m) for l, m in loop_spec.items())
    if n < 1:
        raise ValueError("loop specification describes no particles")
    denom = 1
    for l, m in loop_spec.items():
        denom *= int(l) ** int(m) * math.factorial(int(m))
    return math.factorial(n) // denom


def loop_specs(n):
    """All cycle types of ``S_n`` as ``{length: multiplicity}`` dicts."""
    def parts(rem, largest):
        if rem == 0:
            yield []
            return
        for l in range(min(rem, largest), 0, -1):
            for rest in parts(rem - l, l):
                yield [l] + rest
    return [dict(Counter(p)) for p in parts(n, n)]
