import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from oracles import sho_w_exact
from qoz.estimators import EigensumSinglet, LinearPairCommutation, QuantumHNC, SeriesCommutation
from qoz.potentials import GaussianWell, Harmonic, LennardJones, PotentialModel
from qoz.series import w_series_eval
from qoz.system import Configuration, ThermalSystem


@pytest.mark.parametrize("est", [
    SeriesCommutation(order=2, beta=0.3),
    EigensumSinglet(n_states=50, beta=0.7),
    LinearPairCommutation(potential=GaussianWell(1.0, 1.0), n=32),
    QuantumHNC(potential=LennardJones(1.0, 1.0), density=0.05),
])
def test_clone_roundtrip(est):
    params = est.get_params()
    twin = clone(est)
    assert twin.get_params().keys() == params.keys()
    assert twin is not est
    with pytest.raises(NotFittedError):
        est.predict(np.zeros((1, 3)))


def test_series_estimator_matches_function():
    model = PotentialModel(Harmonic(1.0, 1.0))
    est = SeriesCommutation(model=model, beta=0.2, order=4)
    X = np.array([[0.5, 1.0], [-1.0, 0.3], [1.2, -0.8]])
    got = est.fit(X).predict(X)
    sys = ThermalSystem(0.2)
    for row, value in zip(X, got):
        cfg = Configuration.from_1d(row[:1], row[1:])
        h = 0.2 * 0.5 * (row[0] ** 2 + row[1] ** 2)
        assert value == pytest.approx(w_series_eval(cfg, model, sys, 4).value - h, abs=1e-12)
    with pytest.raises(ValueError, match="columns"):
        est.predict(np.zeros((1, 4)))


def test_series_estimator_rejects_odd_columns():
    with pytest.raises(ValueError, match="positions"):
        SeriesCommutation().fit(np.zeros((2, 3)))


def test_eigensum_estimator():
    est = EigensumSinglet(beta=0.5, n_states=80, q_half=3.0, p_half=3.0, table_nodes=61)
    X = np.array([[0.3, -1.0], [1.1, 2.0], [-2.0, 0.5]])
    exact = np.array([sho_w_exact(q, p, 0.5) for q, p in X])
    assert np.max(np.abs(est.fit().predict(X) - exact)) < 5e-3
    est.set_params(exact=True)
    assert np.max(np.abs(est.predict(X) - exact)) < 1e-8


def test_linear_pair_estimator():
    est = LinearPairCommutation(potential=GaussianWell(1.0, 1.0), beta=0.5, n=32, p_axis=[-1.0, 0.0, 1.0])
    est.fit()
    X = np.array([[0.0, 0.0, 0.0], [0.5, 1.0, -2.0]])
    out = est.predict(X)
    assert out.shape == (2,) and np.all(np.isfinite(out))
    # p = 0 slice is real
    assert abs(out[0].imag) < 1e-12
    with pytest.raises(ValueError):
        LinearPairCommutation().fit()


def test_quantum_hnc_estimator_classical():
    est = QuantumHNC(potential=LennardJones(1.0, 1.0), density=0.1, beta=0.5, q_max=10.0, n_half=200, n_p=1)
    est.fit()
    assert est.converged_ and est.n_iter_ > 1
    X = np.array([[0.0, 0, 0], [5.0, 0, 0]])
    h = est.predict(X)
    assert h[0] == pytest.approx(-1, abs=1e-12)
    assert abs(h[1]) < 1e-2
