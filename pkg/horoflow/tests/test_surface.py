import math

import numpy as np
import nose.tools

from horoflow import sl2
from horoflow import surface
from horoflow.tests import mock_open

def _surface():
    return surface.Surface(surface.bolza())

def _near_centre():
    g = sl2.geodesic_step(sl2.horocycle_step(sl2.identity, 0.1), 0.15)
    return _surface().reduce(g)

def test_bolza_moves_closed_under_inverse():
    group = surface.bolza()
    assert len(group.moves) == 8, "eight side pairings"
    for move in group.moves:
        assert min(sl2.distance(move.inverse(), m) for m in group.moves) < 1e-9
        assert abs(move.det - 1.0) < 1e-12

def test_bolza_geometry():
    group = surface.bolza()
    assert abs(group.systole_trace - 2.0 * surface.BOLZA_ALPHA) < 1e-9
    # vertices of the regular octagon with angles pi/4: cosh R = (1 + sqrt 2)^2
    assert abs(group.circumradius - math.acosh((1.0 + math.sqrt(2.0)) ** 2)) < 1e-3
    assert abs(group.max_bump_width - 0.9239) < 1e-3
    assert abs(group.area - 4.0 * math.pi) < 1e-12
    assert abs(group.volume - 8.0 * math.pi ** 2) < 1e-12

def test_reduce_lands_in_domain():
    group = surface.bolza()
    g = sl2.from_iwasawa(3.0, 0.05, 1.0)
    p = group.reduce(g)
    assert p.reduced
    assert group.contains(p), "reduced point lies in the Dirichlet domain"
    again = group.reduce(p)
    assert sl2.distance(again.rep, p.rep) < 1e-12, "reduction is idempotent"

def test_reduce_is_invariant():
    group = surface.bolza()
    g = sl2.from_iwasawa(0.2, 0.9, 0.3)
    for move in group.moves[:3]:
        translated = sl2.compose(sl2.compose(move, group.moves[5]), g)
        assert sl2.distance(group.reduce(translated).rep, group.reduce(g).rep) < 1e-9

@nose.tools.raises(surface.NonTermination)
def test_reduction_depth_exhausted():
    group = surface.FuchsianGroup(surface.bolza_generators(), reduction_depth=1)
    group.reduce(sl2.geodesic_step(sl2.identity, 30.0))

@nose.tools.raises(ValueError)
def test_generator_determinant_checked():
    surface.FuchsianGroup([np.array([[2.0, 0.0], [0.0, 1.0]])])

@nose.tools.raises(ValueError)
def test_empty_group_rejected():
    surface.FuchsianGroup([])

def _generator_file():
    lines = ["# Bolza side pairings", ""]
    for g in surface.bolza_generators():
        lines.append(" ".join(repr(v) for v in g))
    return "\n".join(lines) + "\n"

def test_load_generators():
    opener = mock_open({"bolza.txt": _generator_file()})
    group = surface.FuchsianGroup.load("bolza.txt", opener=opener)
    assert len(group.moves) == 8
    assert abs(group.circumradius - surface.bolza().circumradius) < 1e-9

def test_load_rejects_short_lines():
    opener = mock_open({"bad.txt": "# header\n1.0 0.0 0.0\n"})
    try:
        surface.FuchsianGroup.load("bad.txt", opener=opener)
    except ValueError as e:
        assert "bad.txt:2" in str(e), "error names the file and line"
    else:
        assert False, "three fields must be rejected"

def test_neighbors_start_with_identity():
    group = surface.bolza()
    found = group.neighbors(3.0)
    assert np.allclose(found[0], np.eye(2))
    assert np.all(sl2.frobenius_sq_many(found) <= 2.0 * math.cosh(3.0) * (1.0 + 1e-12))
    assert group.neighbors(3.0) is found, "cached"

def test_sample_in_domain_and_deterministic():
    model = _surface()
    first = model.sample_array(50, 7)
    assert first.shape == (50, 2, 2)
    assert np.all(model.group.contains_array(first))
    assert np.array_equal(first, model.sample_array(50, 7))
    assert not np.array_equal(first, model.sample_array(50, 8))

def test_flows_commute_on_quotient():
    model = _surface()
    p = model.sample(1, 3)[0]
    for t, s in [(1.0, 2.0), (-0.5, 4.0)]:
        left = model.geodesic(model.horocycle(p, s), t)
        right = model.horocycle(model.geodesic(p, t), math.exp(t) * s)
        assert model.distance(left, right) < 1e-8

def test_leaf_matches_direct_step():
    model = _surface()
    p = model.sample(1, 4)[0]
    far = model.leaf(p).point(25.0)
    direct = model.reduce(sl2.horocycle_step(p.rep, 25.0))
    assert model.distance(far, direct) < 1e-8
    back = model.orbit(p, [-13.0])
    assert model.distance(model.unpack(back)[0],
                          model.reduce(sl2.horocycle_step(p.rep, -13.0))) < 1e-8

def test_distance_small_step():
    model = _surface()
    p = model.sample(1, 5)[0]
    assert model.distance(p, p) < 1e-12
    step = model.distance(p, model.geodesic(p, 1e-3))
    assert abs(step - 1e-3 / math.sqrt(2.0)) < 1e-6

def test_bump_peak_and_support():
    model = _surface()
    bump = model.bump(sl2.identity, 0.5)
    assert abs(bump(model.reduce(sl2.identity)) - 1.0) < 1e-12
    far = model.reduce(sl2.geodesic_step(sl2.identity, 1.0))
    assert bump(far) == 0.0, "outside the support"

def test_bump_derivatives_match_differences():
    model = _surface()
    bump = model.bump(sl2.identity, 0.5)
    arr = model.pack([_near_centre()])
    delta = 1e-5
    for flow, exact in ((model.geodesic_many, bump.xf), (model.horocycle_many, bump.xh)):
        diff = (bump.values(flow(arr, delta)) - bump.values(flow(arr, -delta))) / (2.0 * delta)
        assert abs(diff[0] - exact(arr)[0]) < 1e-6
    assert abs(bump.xf(arr)[0]) > 1e-3, "the sample point sits on the slope"

@nose.tools.raises(surface.WidthTooLarge)
def test_bump_width_too_large():
    _surface().bump(sl2.identity, 1.0)

@nose.tools.raises(ValueError)
def test_bump_width_positive():
    _surface().bump(sl2.identity, 0.0)

def test_smooth_bump():
    value, slope = surface.smooth_bump(np.array([0.0, 0.5, 1.0, 2.0]))
    assert value[0] == 1.0 and value[2] == 0.0 and value[3] == 0.0
    assert abs(value[1] - math.exp(-1.0)) < 1e-15
    assert abs(slope[1] + 4.0 * math.exp(-1.0)) < 1e-14

def test_bump_integral_converged():
    coarse = surface.bump_integral(0.6, nodes=48)
    fine = surface.bump_integral(0.6, nodes=64)
    assert fine > 0.0
    assert abs(coarse - fine) < 1e-2 * fine
    assert surface.bump_integral(0.4) < fine, "grows with the width"

def test_bump_mean_against_haar_samples():
    model = _surface()
    width = 0.8
    bump = model.bump(sl2.identity, width)
    values = bump.values(model.sample_array(20000, 11))
    stderr = values.std(ddof=1) / math.sqrt(len(values))
    exact = model.bump_mean(width)
    assert abs(values.mean() - exact) < 5.0 * stderr + 0.1 * exact

def test_observable_arithmetic():
    model = _surface()
    bump = model.bump(sl2.identity, 0.5)
    arr = model.pack([_near_centre()])
    shifted = bump + 1.0
    assert abs(shifted.values(arr)[0] - bump.values(arr)[0] - 1.0) < 1e-12
    assert abs(shifted.xf(arr)[0] - bump.xf(arr)[0]) < 1e-12
    doubled = 2 * bump
    assert abs(doubled.xh(arr)[0] - 2.0 * bump.xh(arr)[0]) < 1e-12
    assert abs((bump - bump).values(arr)[0]) < 1e-12
    assert abs(bump.centered(0.25).values(arr)[0] - bump.values(arr)[0] + 0.25) < 1e-12
    constant = model.constant(3.0)
    assert constant.grade == 'C1'
    assert constant.values(arr)[0] == 3.0 and constant.xf(arr)[0] == 0.0

@nose.tools.raises(ValueError)
def test_c0_observable_has_no_derivative():
    observable = surface.Observable(lambda p: np.ones(len(p)))
    assert observable.grade == 'C0'
    observable.xf(np.eye(2)[None])

def test_module_level_entry_points():
    g = sl2.from_iwasawa(3.0, 0.2, 1.0)
    p = surface.reduce(g)
    assert p.reduced and surface.bolza().contains(p)
    points = surface.sample_liouville(4, 5)
    assert len(points) == 4
    assert _surface().distance(points[0], _surface().sample(4, 5)[0]) < 1e-12
    bump = surface.invariant_bump(sl2.identity, 0.5)
    assert abs(bump.values(_surface().pack([surface.reduce(sl2.identity)]))[0] - 1.0) < 1e-12
