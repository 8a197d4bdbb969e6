import math

import nose.tools
import numpy as np
from nose.tools import with_setup

from horoflow import config
from horoflow import experiments
from horoflow import spectral
from horoflow.suite import Suite

Namespace = config.Namespace

def setup(): pass

def teardown():
    config.reset()

SMALL_VERIFY = dict(samples=2, verify=Namespace(trials=1, pairs=100, norm_trials=5,
                                                 norm_samples=200))

SHORT_ORBIT = dict(s_max=200.0, horizon=8000.0, starts=2, width=0.8)

SHORT_MIXING = Namespace(horizon=2000.0, s_max=40.0, step=0.5, starts=2, first_block=2.5,
                         blocks=4)

def _failed(report):
    return [c.name for c in report.checks if not c.passed]

def _checks(report):
    return dict((c.name, c) for c in report.checks)

@with_setup(setup, teardown)
def test_verify_identities_unperturbed():
    report = experiments.run_verify_identities(SMALL_VERIFY)
    assert report.passed, _failed(report)
    columns, rows = report.tables['residuals']
    assert columns == experiments.RESIDUAL_COLUMNS
    assert len(rows) == 2
    assert 's_star_closed_form' in [c.name for c in report.checks]

@with_setup(setup, teardown)
def test_verify_identities_on_suspension():
    report = experiments.run_verify_identities(dict(SMALL_VERIFY, model='suspension'))
    assert report.passed, _failed(report)

@with_setup(setup, teardown)
def test_verify_identities_with_bumps_at_fine_steps():
    assert experiments.VerifyIdentities.step == 1e-4
    assert experiments.EstimateLambda.step == 1e-4
    report = experiments.run_verify_identities(dict(SMALL_VERIFY,
                                                    timechange=Namespace(kind='bumps')))
    checks = _checks(report)
    assert checks['commutation'].bound == 1e-7
    for name in ('cocycle', 'commutation', 'tau_cocycle', 'u00', 'u_closed_form',
                 'd2_closed_form', 'd1_integral'):
        assert checks[name].passed, name

@with_setup(setup, teardown)
def test_estimate_lambda_refuses_short_ladder():
    report = experiments.run_estimate_lambda(dict(ladder=Namespace(s_max=50.0)))
    assert report.refused is not None
    assert not report.passed

@with_setup(setup, teardown)
def test_estimate_lambda_unperturbed():
    report = experiments.run_estimate_lambda(dict(
        samples=1, ladder=Namespace(s_max=100.0, rungs=2, t_values=[1.0])))
    assert report.passed, _failed(report)
    columns, rows = report.tables['ladder']
    assert [row[2] for row in rows] == [10.0, 100.0]
    assert report.messages, "constant time changes skip the monotonicity check"

@with_setup(setup, teardown)
def test_mixing_refused_on_suspension():
    report = experiments.run_mixing(dict(model='suspension'))
    assert report.refused is not None
    assert 'not minimal' in report.refused

@with_setup(setup, teardown)
def test_mixing_refuses_short_horizon():
    report = experiments.run_mixing(dict(mixing=Namespace(horizon=100.0, s_max=640.0)))
    assert report.refused is not None

@with_setup(setup, teardown)
def test_mixing_constant_observable():
    report = experiments.run_mixing(dict(mixing=Namespace(observable='constant', horizon=100.0,
                                                          s_max=10.0)))
    assert report.passed
    assert 'kernel direction' in report.messages[0]

def _short_mixing(**settings):
    report = experiments.run_mixing(dict(settings, mixing=SHORT_MIXING))
    assert report.refused is None, report.refused
    columns, rows = report.tables['correlation']
    assert columns == ('s', 're', 'im', 'stderr')
    assert len(rows) == 161
    assert all(math.isfinite(row[1]) and row[3] >= 0.0 for row in rows)
    assert [row[0] for row in report.tables['blocks'][1]] == [2.5, 5.0, 10.0, 20.0]
    assert 'decay_trend' in _checks(report)
    return report

@with_setup(setup, teardown)
def test_mixing_unperturbed_on_bolza():
    _short_mixing()

@with_setup(setup, teardown)
def test_mixing_with_bumps_on_bolza():
    _short_mixing(timechange=Namespace(kind='bumps'))

@with_setup(setup, teardown)
def test_mixing_default_bumps_are_wide():
    with experiments.Mixing() as mixing:
        assert mixing.width >= 0.8
        # below the injectivity bound of the Bolza group
        mixing.observable_for(mixing.psi_center, mixing.width)

class SyntheticMixing(experiments.Mixing):
    shape = None

    def correlation(self):
        series = spectral.synthetic(self.shape, self.s_max, self.step)
        return series, np.full(len(series.s), 1e-4)

class GrowingMixing(SyntheticMixing):
    shape = staticmethod(lambda s: np.abs(s) / 640.0)

class DecayingMixing(SyntheticMixing):
    shape = staticmethod(lambda s: np.exp(-np.abs(s) / 50.0))

@with_setup(setup, teardown)
def test_decay_check_fails_on_growing_correlation():
    check = _checks(GrowingMixing().run())['decay_trend']
    assert not check.passed
    assert check.value > check.bound

@with_setup(setup, teardown)
def test_decay_check_passes_on_decaying_correlation():
    assert _checks(DecayingMixing().run())['decay_trend'].passed

@with_setup(setup, teardown)
def test_spectrum_of_cosine():
    report = experiments.run_spectrum(dict(spectrum=Namespace(source='cosine')))
    assert report.passed, _failed(report)
    assert len(report.documents['atoms']['atoms']) == 3

@with_setup(setup, teardown)
def test_spectrum_of_lorentzian():
    report = experiments.run_spectrum(dict(spectrum=Namespace(source='lorentzian')))
    assert report.passed, _failed(report)
    assert report.documents['atoms']['atoms'] == []

@with_setup(setup, teardown)
def test_spectrum_mass_matches_c0():
    report = experiments.run_spectrum(dict(spectrum=Namespace(source='cosine')))
    check = _checks(report)['mass_conservation']
    assert check.passed
    assert check.bound == 0.02

class BoxSpectrum(experiments.Spectrum):
    """A correlation whose density has negative lobes"""

    def series(self):
        return spectral.synthetic(lambda s: (np.abs(s) <= 1.0).astype(float), self.s_max,
                                  self.step)

@with_setup(setup, teardown)
def test_spectrum_mass_conservation_catches_clipping():
    report = BoxSpectrum().run()
    check = _checks(report)['mass_conservation']
    assert not check.passed
    # C(0) = 1, and the density integrates to C(0) before clipping
    assert abs(check.value - report.documents['atoms']['clipped']) < 1e-9

@with_setup(setup, teardown)
def test_spectrum_on_orbit_mean_adjusted_has_no_atoms():
    report = experiments.run_spectrum(dict(spectrum=Namespace(**SHORT_ORBIT)))
    assert report.refused is None, report.refused
    assert report.documents['atoms']['atoms'] == []
    assert _checks(report)['atom_count'].passed

@with_setup(setup, teardown)
def test_spectrum_on_orbit_with_mean_finds_atom_at_zero():
    report = experiments.run_spectrum(dict(spectrum=Namespace(mean_adjust=False, **SHORT_ORBIT)))
    atoms = report.documents['atoms']
    assert len(atoms['atoms']) == 1, atoms['atoms']
    assert abs(atoms['atoms'][0]['frequency']) <= 2.0 * math.pi / atoms['span']
    assert _checks(report)['atom_count'].passed
    assert 'atom_mass' in _checks(report)

@with_setup(setup, teardown)
def test_atom_reference_by_quadrature():
    config.load(dict(spectrum=Namespace(mean_adjust=False, width=0.8)))
    with experiments.Spectrum() as spectrum:
        expected = spectrum.expected_atoms()
        exact = spectrum.model.bump_mean(0.8)
    assert expected == [(0.0, exact ** 2, 0.0)]

@with_setup(setup, teardown)
def test_atom_reference_with_bumps_carries_error():
    config.load(dict(timechange=Namespace(kind='bumps'),
                     spectrum=Namespace(mean_adjust=False, width=0.8, mass_samples=20000)))
    with experiments.Spectrum() as spectrum:
        [(frequency, mass, error)] = spectrum.expected_atoms()
        exact = spectrum.model.bump_mean(0.8)
    assert frequency == 0.0
    assert 0.0 < error < 0.2
    assert abs(math.sqrt(mass) - exact) < 0.2 * exact

@with_setup(setup, teardown)
def test_mourre_unperturbed():
    report = experiments.run_mourre(dict(samples=2, mourre=Namespace(t_values=[1.0, 2.0],
                                                                     haar_samples=100)))
    assert report.passed, _failed(report)
    columns, rows = report.tables['certificates']
    assert [row[0] for row in rows] == [1.0, 2.0]
    assert all(row[-1] == 1 for row in rows)

@with_setup(setup, teardown)
def test_mourre_with_bumps():
    report = experiments.run_mourre(dict(samples=10, timechange=Namespace(kind='bumps'),
                                         mourre=Namespace(haar_samples=2000)))
    checks = _checks(report)
    assert 'a_effective_exact' not in checks
    assert 'c_t_convergence' in checks and 'a_effective_increasing' in checks
    assert checks['certificate_top'].passed
    assert checks['mean_u00'].passed
    columns, rows = report.tables['certificates']
    assert [row[0] for row in rows] == [5.0, 20.0, 80.0]
    # |u_00 - 1| <= 0.3 keeps the deficit below a_I = 2 at every t
    assert all(row[-1] == 1 for row in rows)

@with_setup(setup, teardown)
def test_mourre_refuses_interval_at_zero():
    report = experiments.run_mourre(dict(mourre=Namespace(interval=[0.0, 1.0])))
    assert report.refused is not None

@with_setup(setup, teardown)
def test_mourre_refused_on_suspension():
    report = experiments.run_mourre(dict(model='suspension'))
    assert report.refused is not None

def test_build_all():
    suite = experiments.build('all')
    assert isinstance(suite, Suite)
    assert [e.name for e in suite.experiments] == list(experiments.EXPERIMENTS)
    assert len(suite.experiments) == 5

@nose.tools.raises(config.ConfigError)
@with_setup(setup, teardown)
def test_bad_bump_width():
    experiments.run_mourre(dict(timechange=Namespace(kind='bumps', widths=[5.0])))

@nose.tools.raises(config.ConfigError)
@with_setup(setup, teardown)
def test_slice_needs_suspension():
    experiments.run_mourre(dict(timechange=Namespace(kind='slice')))
