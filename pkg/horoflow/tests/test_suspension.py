import numpy as np
import nose.tools

from horoflow import cocycle
from horoflow import suspension
from horoflow import timechange
from horoflow.suspension import Suspension, SuspensionPoint

def test_constants():
    assert abs(suspension.LAMBDA - 2.618033988749895) < 1e-14
    assert abs(suspension.LOG_LAMBDA - 0.9624236501192069) < 1e-14
    expanded = suspension.CAT @ suspension.UNSTABLE
    assert np.allclose(expanded, suspension.LAMBDA * suspension.UNSTABLE)
    assert np.array_equal(suspension.CAT @ suspension.CAT_INVERSE, np.eye(2, dtype=np.int64))

def test_flow_crosses_roof():
    p = SuspensionPoint(0.1, 0.2, 0.7)
    q = suspension.susp_f(p, 0.5)
    assert abs(q.theta - 0.2) < 1e-12
    assert abs(q.x1 - 0.4) < 1e-12 and abs(q.x2 - 0.3) < 1e-12, "A applied once"
    back = suspension.susp_f(q, -0.5)
    assert Suspension().distance(back, p) < 1e-12

def test_unstable_flow_identity():
    p = SuspensionPoint(0.3, 0.6, 0.25)
    assert suspension.susp_wu(p, 0.0) == p
    moved = suspension.susp_wu(suspension.susp_wu(p, 0.4), -0.4)
    assert Suspension().distance(moved, p) < 1e-12

def test_flows_commute_with_lambda():
    model = Suspension()
    p = SuspensionPoint(0.15, 0.8, 0.3)
    for t, s in [(1.0, 1.0), (0.4, -2.0), (-1.3, 0.7)]:
        left = model.geodesic(model.horocycle(p, s), t)
        right = model.horocycle(model.geodesic(p, t), suspension.LAMBDA ** t * s)
        assert model.distance(left, right) < 1e-12

@nose.tools.raises(ValueError)
def test_flow_rejects_nan():
    suspension.susp_f(SuspensionPoint(0.0, 0.0, 0.0), float('nan'))

def test_distance_across_roof():
    model = Suspension()
    p = SuspensionPoint(0.5, 0.5, 0.999)
    q = model.geodesic(p, 0.002)
    assert q.theta < 0.01
    assert abs(model.distance(p, q) - 0.002) < 1e-12

def test_not_minimal():
    assert not Suspension.minimal
    assert Suspension().name == 'suspension'

def test_sample_is_uniform_cube():
    model = Suspension()
    arr = model.sample_array(1000, 3)
    assert arr.shape == (1000, 3)
    assert arr.min() >= 0.0 and arr.max() < 1.0
    assert np.array_equal(arr, model.sample_array(1000, 3))
    assert abs(arr.mean() - 0.5) < 0.05

def test_slice_observable_derivatives():
    model = Suspension()
    phi = model.slice_observable((1, 2), phase=0.3)
    arr = model.pack([SuspensionPoint(0.21, 0.64, 0.37)])
    delta = 1e-5
    for flow, exact in ((model.geodesic_many, phi.xf), (model.horocycle_many, phi.xh)):
        diff = (phi.values(flow(arr, delta)) - phi.values(flow(arr, -delta))) / (2.0 * delta)
        assert abs(diff[0] - exact(arr)[0]) < 1e-6

def test_slice_observable_continuous_across_roof():
    model = Suspension()
    phi = model.slice_observable((1, 1))
    below = model.pack([SuspensionPoint(0.3, 0.4, 1.0 - 1e-9)])
    above = model.geodesic_many(below, 2e-9)
    assert abs(phi.values(below)[0] - phi.values(above)[0]) < 1e-12

def test_s_star_is_exact_expansion():
    model = Suspension()
    rho = timechange.TimeChange.identity(model)
    x = SuspensionPoint(0.4, 0.1, 0.6)
    for t, s in [(1.0, 3.0), (-0.5, 10.0), (2.0, -1.5)]:
        expected = suspension.LAMBDA ** t * s
        assert abs(cocycle.s_star(t, s, x, rho) - expected) < 1e-12 * abs(expected)

def test_u00_is_log_lambda():
    model = Suspension()
    rho = timechange.TimeChange.identity(model)
    x = SuspensionPoint(0.4, 0.1, 0.6)
    u = cocycle.u_field(0.0, 0.0, x, rho)
    assert abs(u - suspension.LOG_LAMBDA) < 1e-6

def test_lambda_estimate_is_exact():
    model = Suspension()
    rho = timechange.TimeChange.identity(model)
    estimate = cocycle.estimate_lambda(SuspensionPoint(0.4, 0.1, 0.6), 1.0, 1e3, rho, rungs=2)
    assert abs(estimate.value - suspension.LAMBDA) < 1e-10
    assert [s for s, _ in estimate.ladder] == [100.0, 1000.0]

def test_time_changed_clock_round_trip():
    model = Suspension()
    rho = timechange.TimeChange.perturbation(model, model.slice_observable((1, 0)), 0.3)
    assert abs(rho.min_rho - 0.7) < 1e-15 and abs(rho.max_rho - 1.3) < 1e-15
    clock = timechange.Clock(SuspensionPoint(0.2, 0.3, 0.5), rho)
    for s in (0.5, 7.0, -4.0):
        assert abs(clock.tau_inverse(clock.tau(s)) - s) < 1e-9
