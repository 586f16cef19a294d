import numpy as np
import pytest
from hypothesis import given, strategies as st

from bqobt.benchmarks import random_admissible, unobservable_system
from bqobt.errors import GridMismatch, NonFiniteState
from bqobt.gramians import numerical_kernel, obs_gramian_alternative, obs_gramian_standard, reach_gramian
from bqobt.lyapunov import SolverOptions
from bqobt.model import build
from bqobt.simulation import (
    cos_input,
    error_metrics,
    exp_input,
    integrate,
    simulate,
    table_input,
    unobservability_probe,
)

TIGHT = SolverOptions(residual_tol=1e-14, rel_diff_tol=0.0)


def scalar_linear():
    return build([[-1.0]], [[1.0]], [[1.0]], [[[0.0]]], [[[1.0]]])


def test_zero_input():
    sys = random_admissible(5, 2, 2, seed=0)
    traj = simulate(sys, lambda t: np.zeros(2), 3.0, 100)
    assert np.all(traj.states == 0) and np.all(traj.outputs == 0)
    assert traj.times.shape == (101,) and traj.outputs.shape == (101, 2)


def test_scalar_analytic():
    traj = simulate(scalar_linear(), exp_input(1), 1.0, 1000)
    x = np.exp(-1.0)
    assert traj.outputs[-1, 0] == pytest.approx(x + x**2, abs=1e-6)
    assert traj.outputs[-1, 0] == pytest.approx(0.50321, abs=1e-5)


def test_rk4_order():
    exact = np.exp(-1.0) + np.exp(-2.0)
    errs = [abs(simulate(scalar_linear(), exp_input(1), 1.0, s).outputs[-1, 0] - exact)
            for s in (10, 20, 40)]
    assert errs[0] / errs[1] >= 12 and errs[1] / errs[2] >= 12


def test_bilinear_steady_state():
    sys = build([[-1.0]], [[1.0]], [[1.0]], [[[0.5]]], [[[1.0]]])
    # x' = -0.5 x + 1 from rest: x(t) = 2 (1 - e^{-t/2}) -> x* = 2, y* = 2 + 4
    traj = simulate(sys, lambda t: np.ones(1), 30.0, 1000)
    np.testing.assert_allclose(traj.states[:, 0], 2 * (1 - np.exp(-0.5 * traj.times)),
                               rtol=0, atol=1e-9)
    assert traj.states[-1, 0] == pytest.approx(2.0, abs=1e-6)
    assert traj.outputs[-1, 0] == pytest.approx(6.0, abs=1e-5)


def test_error_metrics():
    sys = random_admissible(4, 1, 1, seed=1)
    full = simulate(sys, exp_input(1), 2.0, 50)
    rep = error_metrics(full, full)
    assert rep.frobenius_rel == 0 and np.all(rep.pointwise_rel == 0)
    zero = type(full)(full.times, full.states, np.zeros_like(full.outputs))
    assert error_metrics(full, zero).frobenius_rel == 1.0
    other = simulate(sys, exp_input(1), 2.0, 60)
    with pytest.raises(GridMismatch):
        error_metrics(full, other)


def test_blowup_guard():
    sys = build([[-1.0]], [[1.0]], [[1.0]], [[[5.0]]], [[[0.0]]])
    with pytest.raises(NonFiniteState):
        simulate(sys, lambda t: np.ones(1), 20.0, 200)


def test_inputs():
    np.testing.assert_allclose(cos_input(2)(1.0), [-1.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(exp_input(2)(0.0), [1.0, 1.0])
    u = table_input([0.0, 1.0], [[0.0, 1.0], [2.0, 3.0]])
    np.testing.assert_allclose(u(0.5), [1.0, 2.0])


@given(seed=st.integers(0, 1000), steps=st.integers(5, 60))
def test_output_consistency(seed, steps):
    sys = random_admissible(5, 2, 2, seed=seed)
    traj = simulate(sys, cos_input(2), 2.0, steps)
    assert len(traj.times) == len(traj.states) == len(traj.outputs) == steps + 1
    again = np.array([sys.output(x) for x in traj.states])
    np.testing.assert_allclose(again, traj.outputs, rtol=1e-12, atol=1e-15)


def test_probe_zero_state():
    sys, _ = unobservable_system(seed=0)
    Q = obs_gramian_standard(sys, reach_gramian(sys, TIGHT), TIGHT)
    assert unobservability_probe(sys, Q, np.zeros(sys.n), 2.0, 200, u=cos_input(2)) == 0.0


def test_probe_rejects_observable_state():
    sys, _ = unobservable_system(seed=0)
    Q = obs_gramian_standard(sys, reach_gramian(sys, TIGHT), TIGHT)
    with pytest.raises(ValueError):
        unobservability_probe(sys, Q, np.eye(sys.n)[0], 1.0, 10)


def test_probe_block_system():
    sys, basis = unobservable_system(seed=1)
    Q = obs_gramian_standard(sys, reach_gramian(sys, TIGHT), TIGHT)
    for x0 in basis.T:
        assert unobservability_probe(sys, Q, x0, 5.0, 1000, u=cos_input(2)) <= 1e-8


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_probe_rotated(seed):
    sys, _ = unobservable_system(seed=seed, rotate=True)
    Q = obs_gramian_standard(sys, reach_gramian(sys, TIGHT), TIGHT)
    K = numerical_kernel(Q)
    scale = np.linalg.norm(sys.C, 2) + np.linalg.norm(sys.m_stack(), 2)
    for x0 in K.T:
        y = unobservability_probe(sys, Q, x0, 5.0, 1000, u=cos_input(2))
        assert y <= 1e-6 * np.linalg.norm(x0) * scale


def test_probe_alternative_counterexample():
    sys, basis = unobservable_system(seed=0, couple_n=True)
    QA = obs_gramian_alternative(sys, reach_gramian(sys, TIGHT))
    x0 = basis[:, 0]
    assert unobservability_probe(sys, QA, x0, 5.0, 1000) <= 1e-8
    assert unobservability_probe(sys, QA, x0, 5.0, 1000, u=cos_input(2)) > 1e-4


def test_explicit_substeps():
    sys = scalar_linear()
    a = integrate(sys, exp_input(1), 1.0, 50, substeps=4)
    b = integrate(sys, exp_input(1), 1.0, 200, substeps=1)
    np.testing.assert_allclose(a.outputs, b.outputs[::4], rtol=1e-14)
