import math

import nose.tools

from horoflow import ergodic
from horoflow import sl2
from horoflow import surface
from horoflow import timechange
from horoflow.timechange import TimeChange

def _surface():
    return surface.Surface(surface.bolza())

def _bumps():
    return TimeChange.bump_sum(_surface(), [sl2.identity], [0.5], 0.3)

def _start(rho):
    return rho.model.reduce(sl2.horocycle_step(sl2.identity, -0.2))

def test_birkhoff_of_constant():
    rho = _bumps()
    result = ergodic.birkhoff(rho.model.constant(1.0), _start(rho), 20.0, 0.1, rho)
    # int_0^T 1 ds through the orbit clock gives back T
    assert abs(result.value - 1.0) < 1e-9
    assert result.horizon == 20.0

def test_birkhoff_unperturbed_matches_mean_of_bump():
    model = _surface()
    rho = TimeChange.identity(model)
    bump = model.bump(sl2.identity, 0.8)
    short = ergodic.birkhoff(bump, _start(rho), 1.0, 0.01, rho)
    assert 0.0 < short.value <= 1.0, "the orbit starts inside the support"
    result, values = ergodic.birkhoff_ensemble(bump, model.sample(4, 7), 1e4, 0.25, rho)
    exact = model.bump_mean(0.8)
    assert abs(result.value - exact) < 0.15 * exact

def test_birkhoff_with_bumps_matches_weighted_average():
    rho = _bumps()
    model = rho.model
    bump = model.bump(sl2.identity, 0.8)
    result, values = ergodic.birkhoff_ensemble(bump, model.sample(4, 8), 1e4, 0.25, rho)
    haar = model.sample_array(20000, 9)
    mean, stderr = timechange.weighted_mean(bump.values(haar),
                                            timechange.measure_weights(rho, haar))
    assert abs(result.value - mean) < 0.15 * mean + 5.0 * stderr

def test_haar_average_invariant_under_both_flows():
    model = _surface()
    bump = model.bump(sl2.identity, 0.8)
    haar = model.sample_array(20000, 12)
    exact = model.bump_mean(0.8)
    for moved in (model.geodesic_many(haar, 1.5), model.horocycle_many(haar, 3.0)):
        values = bump.values(moved)
        stderr = values.std(ddof=1) / math.sqrt(len(values))
        assert abs(values.mean() - exact) < 5.0 * stderr + 0.1 * exact

def test_birkhoff_ensemble():
    rho = _bumps()
    starts = rho.model.sample(3, 4)
    result, values = ergodic.birkhoff_ensemble(rho.model.constant(2.0), starts, 5.0, 0.1, rho)
    assert len(values) == 3
    assert abs(result.value - 2.0) < 1e-9
    assert result.variance < 1e-15

@nose.tools.raises(ergodic.BudgetExceeded)
def test_budget_enforced():
    ergodic.check_budget(1e9, 1.0)

@nose.tools.raises(ValueError)
def test_step_must_be_positive():
    ergodic.check_budget(10.0, 0.0)

def test_c_t_unperturbed():
    rho = TimeChange.identity(_surface())
    assert ergodic.c_t_field(3.0, _start(rho), rho) == 1.0
    assert ergodic.xphi_c_t(3.0, _start(rho), rho) == 0.0

def test_c_t_bounded_by_amplitude():
    rho = _bumps()
    for t in (0.5, 5.0):
        c_t = ergodic.c_t_field(t, _start(rho), rho)
        assert 1.0 - 0.3 <= c_t <= 1.0 + 0.3

@nose.tools.raises(ValueError)
def test_c_t_needs_positive_time():
    rho = _bumps()
    ergodic.c_t_field(0.0, _start(rho), rho)

def test_xphi_c_t_exact_matches_difference():
    rho = _bumps()
    x = _start(rho)
    for t in (0.5, 3.0):
        exact = ergodic.xphi_c_t(t, x, rho)
        assert abs(exact - ergodic.xphi_c_t_fd(t, x, rho)) < 1e-4
    assert ergodic.xphi_c_t(0.5, x, rho) != 0.0

def test_certificate_unperturbed():
    rho = TimeChange.identity(_surface())
    certificate = ergodic.mourre_certificate((1.0, 2.0), 2.0, rho, rho.model.sample(3, 1))
    assert certificate.a_I == 2.0
    assert certificate.deficit == 0.0
    assert certificate.a_effective == 2.0
    assert certificate.passed
    report = ergodic.certificate_report(certificate)
    assert report['pass'] is True and report['interval'] == [1.0, 2.0]
    assert 'passed' not in report

def test_certificate_with_bumps():
    rho = _bumps()
    certificate = ergodic.mourre_certificate((1.0, 2.0), 5.0, rho, [_start(rho)])
    assert certificate.deficit > 0.0
    assert abs(certificate.a_effective - (certificate.a_I - certificate.deficit)) < 1e-15
    assert certificate.passed == (certificate.a_effective > 0.0)

def _inside(rho):
    return [_start(rho), rho.model.reduce(sl2.horocycle_step(sl2.identity, -0.4))]

def test_c_t_deviation_shrinks_with_t():
    rho = _bumps()
    points = _inside(rho)
    sups = [max(abs(ergodic.c_t_field(t, x, rho) - 1.0) for x in points)
            for t in (5.0, 20.0, 80.0)]
    assert sups[0] > sups[1] > sups[2] > 0.0, sups

def test_certificate_improves_with_t():
    rho = _bumps()
    certificates = [ergodic.mourre_certificate((1.0, 2.0), t, rho, _inside(rho))
                    for t in (5.0, 20.0, 80.0)]
    effective = [c.a_effective for c in certificates]
    assert effective[0] < effective[1] < effective[2] < certificates[-1].a_I, effective
    assert certificates[-1].passed

@nose.tools.raises(ValueError)
def test_certificate_interval_ordered():
    rho = TimeChange.identity(_surface())
    ergodic.mourre_certificate((2.0, 1.0), 1.0, rho, [])

@nose.tools.raises(ValueError)
def test_certificate_interval_positive():
    rho = TimeChange.identity(_surface())
    ergodic.mourre_certificate((0.0, 1.0), 1.0, rho, [])

def test_mean_u00_unperturbed():
    rho = TimeChange.identity(_surface())
    mean, stderr = ergodic.ensemble_mean_u00(rho, rho.model.sample_array(50, 2))
    assert mean == 1.0 and stderr == 0.0

def test_mean_u00_with_bumps():
    rho = _bumps()
    mean, stderr = ergodic.ensemble_mean_u00(rho, rho.model.sample_array(4000, 2))
    # the mu-average of X_f rho / rho vanishes
    assert abs(mean - 1.0) < 5.0 * stderr + 1e-3
