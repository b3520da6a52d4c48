import math

import numpy as np
import pytest

from oracles import sho_partition, sho_w_exact
from qoz.eigensolver import (PARITY_EXTENSION, PairBasis, PairCommutationTable, assemble_weight, n3_gradient_decomposition,
                             pair_w_table, sho_eigenstates, singlet_w_table, solve_eigen_1d,
                             trace_integral, trapped_pair_basis)
from qoz.grid import Axis
from qoz.potentials import GaussianWell, Harmonic, LennardJones, PotentialModel
from qoz.series import w_series_eval
from qoz.system import Configuration, ThermalSystem


def sho_basis(beta, n_states, nodes=2001, omega=1.0):
    sys = ThermalSystem(beta)
    half = math.sqrt(2 * n_states + 1) + 12
    return sys, sho_eigenstates(sys, omega, n_states, np.linspace(-half, half, nodes))


# -- sho_eigenstates ------------------------------------------------------------


def test_sho_ground_energy():
    sys = ThermalSystem(1.0, hbar=0.7)
    basis = sho_eigenstates(sys, 2.0, 5, np.linspace(-15, 15, 3001))
    assert basis.energies[0] == pytest.approx(0.5 * 0.7 * 2.0, rel=1e-15)


def test_sho_orthonormal():
    _, basis = sho_basis(1.0, 60, nodes=4001)
    s = basis.overlap_matrix()
    assert abs(s[0, 2]) < 1e-10
    assert np.max(np.abs(s - np.eye(60))) < 1e-8
    assert np.all(np.diff(basis.energies) > 0)


def test_sho_narrow_grid_names_state():
    with pytest.raises(ValueError, match=r"state \d+"):
        sho_eigenstates(ThermalSystem(1.0), 1.0, 40, np.linspace(-5, 5, 501))


def test_sho_momentum_overlaps_match_quadrature():
    _, basis = sho_basis(1.0, 40, nodes=5001)
    p = np.linspace(-6, 6, 13)
    analytic = basis.momentum_overlaps(p)
    basis.momentum_evaluator = None
    assert np.max(np.abs(analytic - basis.momentum_overlaps(p))) < 1e-10


# -- solve_eigen_1d -------------------------------------------------------------


def test_fd_reproduces_sho():
    sys = ThermalSystem(1.0)
    grid = np.arange(-10.0, 10.0 + 2.5e-4, 5e-4)
    basis = solve_eigen_1d(Harmonic(1.0, 1.0), grid, sys, 11)
    exact = np.arange(11) + 0.5
    assert np.max(np.abs(basis.energies / exact - 1)) < 1e-6


def test_fd_box_spectrum():
    sys = ThermalSystem(1.0, hbar=1.3, mass=0.8)
    width = 2.0
    basis = solve_eigen_1d(lambda x: np.zeros_like(x), np.linspace(0, width, 2000), sys, 6)
    n = np.arange(1, 7)
    exact = sys.hbar**2 * np.pi**2 * n**2 / (2 * sys.mass * width**2)
    assert np.max(np.abs(basis.energies / exact - 1)) < 1e-4
    assert np.max(np.abs(basis.overlap_matrix() - np.eye(6))) < 1e-8


def test_fd_second_order_convergence():
    sys = ThermalSystem(1.0)
    exact = np.pi**2 / 2
    errs = []
    for nodes in (201, 401, 801):
        e0 = solve_eigen_1d(lambda x: np.zeros_like(x), np.linspace(0, 1, nodes), sys, 1).energies[0]
        errs.append(abs(e0 - exact))
    for a, b in zip(errs, errs[1:]):
        assert 3.8 < a / b < 4.2


def test_fd_rejects_unbounded_potential():
    grid = np.linspace(-1, 1, 101)
    u = np.zeros_like(grid)
    u[50] = -np.inf
    with pytest.raises(ValueError, match="bounded below"):
        solve_eigen_1d(u, grid, ThermalSystem(1.0), 3)


def test_parity_extension_pairs():
    sys = ThermalSystem(1.0)
    lj = LennardJones(1.0, 1.0)
    trap = Harmonic(0.5, 1.0)
    grid = np.linspace(0.0, 6.0, 1201)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        u = trap(grid) + lj(grid)
    basis = solve_eigen_1d(np.where(np.isnan(u), np.inf, u), grid, sys, 4, PARITY_EXTENSION, mass=0.5)
    assert basis.boundary == PARITY_EXTENSION
    assert basis.grid[0] == pytest.approx(-6.0)
    assert np.array_equal(basis.energies[0::2], basis.energies[1::2])
    assert np.max(np.abs(basis.overlap_matrix() - np.eye(8))) < 1e-8
    mid = basis.grid.size // 2
    assert np.all(basis.wavefunctions[:, mid] == 0)
    even, odd = basis.wavefunctions[0], basis.wavefunctions[1]
    np.testing.assert_allclose(even[:mid], even[::-1][:mid])
    np.testing.assert_allclose(odd[:mid], -odd[::-1][:mid])


def test_parity_extension_needs_origin():
    with pytest.raises(ValueError, match="q = 0"):
        solve_eigen_1d(lambda x: x * x, np.linspace(0.5, 3, 101), ThermalSystem(1.0), 2, PARITY_EXTENSION)


# -- singlet tables ---------------------------------------------------------------


def test_singlet_matches_closed_form():
    sys, basis = sho_basis(0.5, 80)
    tab = singlet_w_table(basis, sys, 0.5, Axis.symmetric(3.0, 31), Axis.symmetric(3.0, 31))
    q, p = np.meshgrid(tab.q, tab.p, indexing="ij")
    exact = np.vectorize(sho_w_exact)(q, p, 0.5)
    assert np.max(np.abs(tab.values - exact)) < 1e-8
    assert tab.kind == "singlet" and tab.lmax == 80


def test_high_temperature_limit():
    beta = 1e-3
    n = 24000
    sys = ThermalSystem(beta)
    half = math.sqrt(2 * n + 1) + 12
    basis = sho_eigenstates(sys, 1.0, n, np.linspace(-half, half, 401))
    p_core = math.sqrt(16 / beta)
    tab = singlet_w_table(basis, sys, beta, Axis.symmetric(p_core, 21), Axis.symmetric(2.0, 21))
    q, p = np.meshgrid(tab.q, tab.p, indexing="ij")
    bh = beta * 0.5 * (q * q + p * p)
    assert np.max(np.abs(tab.values + bh)) / np.max(bh) < 1e-2


def test_singlet_matches_series():
    sys, basis = sho_basis(0.1, 400)
    tab = singlet_w_table(basis, sys, 0.1, Axis.symmetric(3.0, 13), Axis.symmetric(2.0, 9))
    model = PotentialModel(Harmonic(1.0, 1.0))
    worst = 0.0
    for i, qv in enumerate(tab.q):
        for j, pv in enumerate(tab.p):
            cfg = Configuration.from_1d([qv], [pv])
            w = w_series_eval(cfg, model, sys, 4).value
            worst = max(worst, abs(w - (tab.values[i, j] + 0.1 * 0.5 * (qv * qv + pv * pv))))
    assert worst < 1e-3


def test_singlet_conjugacy_anharmonic():
    sys = ThermalSystem(0.7)
    grid = np.linspace(-8, 8, 1601)
    basis = solve_eigen_1d(lambda x: 0.25 * x**4 - x * x, grid, sys, 60)
    tab = singlet_w_table(basis, sys, 0.7, Axis.symmetric(3.0, 31), Axis.symmetric(2.0, 21))
    v = tab.values
    assert np.all(tab.valid)
    assert np.max(np.abs(v[:, ::-1] - np.conj(v))) < 1e-10


def test_lmax_convergence():
    sys, small = sho_basis(0.5, 48)
    _, large = sho_basis(0.5, 53)
    axes = (Axis.symmetric(3.0, 21), Axis.symmetric(2.5, 21))
    a = singlet_w_table(small, sys, 0.5, *axes).values
    b = singlet_w_table(large, sys, 0.5, *axes).values
    assert np.max(np.abs(a - b)) < 1e-6


def test_unconverged_sum_refused():
    sys, basis = sho_basis(0.5, 20)
    with pytest.raises(ValueError, match="not converged"):
        singlet_w_table(basis, sys, 0.5, Axis.symmetric(1.0, 5), Axis.symmetric(1.0, 5))


def test_trace_identity():
    sys, basis = sho_basis(0.5, 80)
    tab = singlet_w_table(basis, sys, 0.5, Axis.symmetric(12.0, 161), Axis.symmetric(12.0, 161))
    z = np.sum(np.exp(-0.5 * basis.energies))
    assert z == pytest.approx(sho_partition(0.5), rel=1e-12)
    assert abs(trace_integral(tab).real / z - 1) < 1e-4


def test_ladder_branch_agrees_with_spatial():
    # the ladder starts at beta / 1000, so the basis must converge there too
    sys, basis = sho_basis(2.0, 16000, nodes=401)
    axes = (Axis.symmetric(4.0, 41), Axis.symmetric(3.0, 31))
    spatial = singlet_w_table(basis, sys, 2.0, *axes).values
    ladder = singlet_w_table(basis, sys, 2.0, *axes, branch="ladder", ladder_steps=40).values
    assert np.max(np.abs(spatial - ladder)) < 1e-10
    q, p = np.meshgrid(axes[1].nodes, axes[0].nodes, indexing="ij")
    assert np.max(np.abs(spatial - np.vectorize(sho_w_exact)(q, p, 2.0))) < 1e-8
    # eight geometric steps jump by more than pi near beta and alias
    coarse = singlet_w_table(basis, sys, 2.0, *axes, branch="ladder").values
    assert np.max(np.abs(coarse - spatial)) == pytest.approx(2 * np.pi)


def test_direct_matches_interpolated_at_nodes():
    sys, basis = sho_basis(0.5, 60)
    tab = singlet_w_table(basis, sys, 0.5, Axis.symmetric(2.0, 21), Axis.symmetric(2.0, 21))
    q, p = np.meshgrid(tab.q[::4], tab.p[::4], indexing="ij")
    np.testing.assert_allclose(tab.direct(q.ravel(), p.ravel()), tab.values[::4, ::4].ravel(), atol=1e-12)


# -- pair tables ----------------------------------------------------------------


N_PAIR = 60


@pytest.fixture(scope="module")
def singlet_half():
    sys, basis = sho_basis(0.5, N_PAIR)
    return sys, singlet_w_table(basis, sys, 0.5, Axis.symmetric(4.0, 41), Axis.symmetric(4.0, 81))


def _pair(sys, singlet, pot):
    pb = trapped_pair_basis(sys, 1.0, pot, n_com=N_PAIR, n_interaction=N_PAIR, q_max=14, n_nodes=1401)
    return pb, pair_w_table(pb, singlet, sys, 0.5, (Axis.symmetric(4, 81), Axis.symmetric(8, 81)),
                            (Axis.symmetric(8, 161), Axis.symmetric(4, 41)))


@pytest.fixture(scope="module")
def gaussian_pair(singlet_half):
    sys, singlet = singlet_half
    return _pair(sys, singlet, GaussianWell(1.0, 0.5))[1]


def test_pair_factorizes_without_interaction(singlet_half):
    sys, singlet = singlet_half
    pb, _ = _pair(sys, singlet, None)
    # analytic interaction basis: the identity then holds to roundoff
    com = pb.com
    half = math.sqrt(2 * N_PAIR + 1) * math.sqrt(2.0) + 20
    exact_int = sho_eigenstates(sys, 1.0, N_PAIR, np.linspace(-half, half, 2801), mass=0.5)
    for inter, tol in ((exact_int, 1e-10), (pb.interaction, 1e-4)):
        table = pair_w_table(PairBasis(com, inter), singlet, sys, 0.5,
                             (Axis.symmetric(4, 81), Axis.symmetric(8, 81)),
                             (Axis.symmetric(8, 161), Axis.symmetric(4, 41)))
        q1, q2 = np.meshgrid(np.linspace(-2.5, 2.5, 7), np.linspace(-2.5, 2.5, 7))
        v = table(q1.ravel(), 0.7, q2.ravel(), -1.3, method="direct")
        assert np.max(np.abs(v)) < tol


def test_pair_far_field(gaussian_pair):
    for r in (4.0, 5.0, 6.0):
        assert abs(gaussian_pair(r / 2, 0.3, -r / 2, -0.2, method="direct")[()]) < 1e-3
    near = abs(gaussian_pair(0.5, 0.3, -0.5, -0.2, method="direct")[()])
    assert near > 1e-2


def test_pair_exchange_symmetry(gaussian_pair):
    q1, q2 = np.meshgrid(np.linspace(-3, 3, 9), np.linspace(-3, 3, 9))
    a = gaussian_pair(q1, 0.7, q2, -1.3)
    b = gaussian_pair(q2, -1.3, q1, 0.7)
    assert np.max(np.abs(a - b)) < 1e-10
    c = gaussian_pair(q1, 0.7, q2, -1.3, method="direct")
    d = gaussian_pair(q2, -1.3, q1, 0.7, method="direct")
    assert np.max(np.abs(c - d)) < 1e-10


def test_pair_table_conjugacy(gaussian_pair):
    for t in (gaussian_pair.com, gaussian_pair.interaction):
        v = t.values
        assert np.max(np.abs(v[:, ::-1] - np.conj(v))) < 1e-10


# -- assembly ---------------------------------------------------------------------


def test_assemble_single_particle(singlet_half):
    _, singlet = singlet_half
    cfg = Configuration.from_1d([0.4], [-1.1])
    total, omega = assemble_weight(cfg, singlet)
    assert total == pytest.approx(complex(singlet(0.4, -1.1)), abs=1e-15)
    assert omega == pytest.approx(np.exp(total), rel=1e-15)


def test_assemble_sums_pairs(singlet_half, gaussian_pair):
    _, singlet = singlet_half
    q, p = [-1.0, 0.2, 1.5], [0.3, -0.4, 0.1]
    total, _ = assemble_weight(Configuration.from_1d(q, p), singlet, gaussian_pair)
    expect = sum(complex(singlet(a, b)) for a, b in zip(q, p))
    expect += sum(complex(gaussian_pair(q[j], p[j], q[k], p[k])) for j in range(3) for k in range(j + 1, 3))
    assert total == pytest.approx(expect, abs=1e-12)


def test_assemble_out_of_table(singlet_half, gaussian_pair):
    _, singlet = singlet_half
    with pytest.raises(ValueError, match=r"particles \[1\]"):
        assemble_weight(Configuration.from_1d([0.0, 9.0], [0.0, 0.0]), singlet)
    inter = gaussian_pair.interaction
    short = singlet_w_table(inter.basis, ThermalSystem(0.5), 0.5, Axis.symmetric(4.0, 41),
                            Axis.symmetric(2.0, 41), kind="interaction", inversion_symmetric=True)
    pair = PairCommutationTable(singlet, gaussian_pair.com, short, 0.5)
    with pytest.raises(ValueError, match=r"particles \[0, 2\]"):
        assemble_weight(Configuration.from_1d([-1.5, 0.0, 1.5], [0.0, 0.0, 0.0]), singlet, pair)


# -- N = 3 decomposition ----------------------------------------------------------


def test_decomposition_far_apart(gaussian_pair):
    near = n3_gradient_decomposition(Configuration.from_1d([-0.6, 0.0, 0.6], [0.0] * 3), gaussian_pair)
    far = n3_gradient_decomposition(Configuration.from_1d([-3.8, 0.0, 3.8], [0.0] * 3), gaussian_pair)
    scale = max(abs(t) for t in near["terms"].values())
    assert max(abs(t) for t in far["terms"].values()) < 1e-3 * scale


def test_decomposition_symmetric_midpoint(gaussian_pair):
    cfg = Configuration.from_1d([-1.2, 0.0, 1.2], [0.0, 0.0, 0.0])
    d = n3_gradient_decomposition(cfg, gaussian_pair)
    g21, g23 = d["gradients"][(1, 0)], d["gradients"][(1, 2)]
    assert abs(abs(g21) - abs(g23)) < 1e-8 * abs(g21)
    assert d["neglected"] == pytest.approx(2 * g21 * g23, rel=1e-14)
    # direct expansion of (g21 + g23)^2 for particle 2
    t = d["terms"]
    assert t["2:21^2"] + t["2:2*21*23"] + t["2:23^2"] == pytest.approx((g21 + g23) ** 2, abs=1e-12)
    assert d["ratio"] == pytest.approx(0.5, abs=1e-6)


def test_decomposition_requires_three(gaussian_pair):
    with pytest.raises(ValueError, match="N = 3"):
        n3_gradient_decomposition(Configuration.from_1d([0.0, 1.0], [0.0, 0.0]), gaussian_pair)
