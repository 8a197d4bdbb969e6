"""Experiments behind the runner's subcommands

Each experiment reads its settings from the process configuration, builds
the model and the time change in :meth:`~ModelExperiment.do_start` and
returns a :class:`~horoflow.core.Report` from :meth:`execute`. Sweeps over
sample points go through :meth:`~horoflow.core.Experiment.map`.

"""

import collections
import logging
import math

import numpy as np

from horoflow import cocycle
from horoflow import config
from horoflow import core
from horoflow import ergodic
from horoflow import sl2
from horoflow import spectral
from horoflow import timechange
from horoflow.suite import Suite
from horoflow.surface import FuchsianGroup, NonTermination, Surface
from horoflow.suspension import Suspension

log = logging.getLogger(__name__)

NOT_MINIMAL = ("the %s model is not minimal: its W^u flow leaves every torus slice invariant, "
               "so mixing and spectral statements do not apply to it")

def _element(triple):
    """Group element from Iwasawa coordinates (x, y, theta)"""
    try:
        x, y, theta = (float(v) for v in triple)
    except (TypeError, ValueError):
        raise ValueError("expected an (x, y, theta) triple, got %r" % (triple,))
    if not y > 0.0:
        raise ValueError("y must be positive in %r" % (triple,))
    return sl2.from_iwasawa(x, y, theta)

def _violations(values, strict=True, floor=1e-9):
    """Steps of a sequence that fail to decrease (values below ``floor`` count as converged)"""
    count = 0
    for earlier, later in zip(values, values[1:]):
        if later <= floor:
            continue
        if later > earlier or (strict and later == earlier):
            count += 1
    return count


class ModelExperiment(core.Experiment):
    """Model, time change and flow settings shared by all experiments"""

    seed =              config.Setting('seed', 0, doc="Seed of every random draw", type=int)
    model_name =        config.Setting('model', 'bolza', choices=('bolza', 'suspension'))
    group_file =        config.Setting('group.file', None, type=str,
                                       doc="Generators in the four-field text format")
    reduction_depth =   config.Setting('group.reduction_depth', 200, type=int, positive=True)
    genus =             config.Setting('group.genus', 2, type=int, positive=True)

    rho_kind =          config.Setting('timechange.kind', 'constant',
                                       choices=('constant', 'bumps', 'slice'))
    rho_value =         config.Setting('timechange.value', 1.0, type=float, positive=True)
    rho_amplitude =     config.Setting('timechange.amplitude', 0.3, type=float)
    rho_centers =       config.Setting('timechange.centers', [[0.0, 1.0, 0.0]], type=(list, tuple))
    rho_widths =        config.Setting('timechange.widths', [0.5], type=(list, tuple))
    rho_wave =          config.Setting('timechange.wave', [1, 0], type=(list, tuple))

    flow_h =            config.Setting('flow.h', 0.25, type=float, positive=True)
    flow_tolerance =    config.Setting('flow.tolerance', 1e-11, type=float, positive=True)
    flow_max_substeps = config.Setting('flow.max_substeps', 200, type=int, positive=True)
    flow_nodes =        config.Setting('flow.nodes', 16, type=int, positive=True)
    flow_method =       config.Setting('flow.method', 'quadrature', choices=('quadrature', 'rk45'))

    sample_count =      config.Setting('samples', 10, doc="Sample base points per sweep",
                                       type=int, positive=True)

    model = None
    rho = None
    flow = None

    def do_start(self):
        self.model = self.build_model()
        self.rho = self.build_time_change(self.model)
        self.flow = timechange.FlowConfig(self.flow_h, self.flow_tolerance, self.flow_max_substeps,
                                          self.flow_nodes, self.flow_method)
        log.info("%s on %r with %r", self.name, self.model, self.rho)

    def build_model(self):
        if self.model_name == 'suspension':
            return Suspension()
        if self.group_file is None:
            return Surface(FuchsianGroup.bolza(self.reduction_depth))
        try:
            group = FuchsianGroup.load(self.group_file, self.reduction_depth, self.genus)
        except (IOError, ValueError) as e:
            raise config.ConfigError(str(e), 'group.file')
        return Surface(group)

    def build_time_change(self, model):
        kind = self.rho_kind
        try:
            if kind == 'constant':
                return timechange.TimeChange.constant_speed(model, self.rho_value)
            if kind == 'bumps':
                if not isinstance(model, Surface):
                    raise config.ConfigError("bump time changes live on the surface model",
                                             'timechange.kind')
                centers = [_element(c) for c in self.rho_centers]
                return timechange.TimeChange.bump_sum(model, centers, list(self.rho_widths),
                                                      self.rho_amplitude)
            if not isinstance(model, Suspension):
                raise config.ConfigError("slice time changes live on the suspension model",
                                         'timechange.kind')
            return timechange.TimeChange.perturbation(model, model.slice_observable(self.rho_wave),
                                                      self.rho_amplitude)
        except config.ConfigError:
            raise
        except (ValueError, TypeError) as e:
            raise config.ConfigError(str(e), 'timechange')

    def sample(self, count=None, offset=0):
        return self.model.sample(count or self.sample_count, self.seed + offset)

    def observable_for(self, center, width, wave=(0, 1), phase=0.0):
        """Test observable: an invariant bump, or a slice function on the suspension"""
        if isinstance(self.model, Suspension):
            return self.model.slice_observable(wave, phase)
        try:
            return self.model.bump(_element(center), width)
        except ValueError as e:
            raise config.ConfigError(str(e), "observable")

    def require_minimal(self):
        if not self.model.minimal:
            raise core.Refused(NOT_MINIMAL % self.model.name)


Trial = collections.namedtuple('Trial', 'point t r s s_conj')

RESIDUAL_COLUMNS = ('point', 't', 'r', 's', 'cocycle', 'commutation', 'tau_cocycle', 'u00',
                    'u_closed_form', 'd2_closed_form', 'd1_integral', 'conjugation',
                    'xf_expansion')


class VerifyIdentities(ModelExperiment):
    """Residuals of every computable identity of the flows and the cocycle"""
    name = 'verify-identities'

    pairs =          config.Setting('verify.pairs', 1000, type=int, positive=True)
    algebra_range =  config.Setting('verify.algebra_range', 20.0, type=float, positive=True)
    trials =         config.Setting('verify.trials', 3, doc="Random (t, r, s) per sample point",
                                    type=int, positive=True)
    t_range =        config.Setting('verify.t_range', 2.0, type=float, positive=True)
    s_range =        config.Setting('verify.s_range', 50.0, type=float, positive=True)
    conj_range =     config.Setting('verify.conj_range', 5.0, type=float, positive=True)
    step =           config.Setting('verify.step', 1e-4, type=float, positive=True)
    mixed_step =     config.Setting('verify.mixed_step', 1e-3, type=float, positive=True,
                                    doc="ds of the mixed t-s difference; its roundoff grows "
                                        "like 1/(dt ds)")
    algebra_tolerance = config.Setting('verify.algebra_tolerance', 1e-9, type=float, positive=True)
    tolerance =      config.Setting('verify.tolerance', 1e-7, type=float, positive=True)
    commutation_tolerance = config.Setting('verify.commutation_tolerance', 1e-7, type=float,
                                           positive=True)
    derivative_tolerance = config.Setting('verify.derivative_tolerance', 1e-4, type=float,
                                          positive=True)
    oracle_tolerance = config.Setting('verify.oracle_tolerance', 1e-6, type=float, positive=True)
    norm_trials =    config.Setting('verify.norm_trials', 100, type=int, positive=True)
    norm_samples =   config.Setting('verify.norm_samples', 2000, type=int, positive=True)
    norm_slack =     config.Setting('verify.norm_slack', 1.05, type=float, positive=True)
    observable_center = config.Setting('verify.observable_center', [0.3, 1.2, 0.7],
                                       type=(list, tuple))
    observable_width = config.Setting('verify.observable_width', 0.5, type=float, positive=True)

    def do_start(self):
        super(VerifyIdentities, self).do_start()
        self._failures = []
        self.catch(ArithmeticError, self._record_failure)
        self.catch(NonTermination, self._record_failure)

    def _record_failure(self, exception, item):
        log.warning("identity sweep failed at point %d: %s", item[0], exception)
        self._failures.append((item[0], exception))

    def matrix_commutation(self, rng):
        """max relative error of a_t n_s a_-t = n_{e^t s} for both unipotent subgroups"""
        bound = self.algebra_range
        t = rng.uniform(-bound, bound, self.pairs)
        s = rng.uniform(-bound, bound, self.pairs)
        ahead, behind = sl2.geodesic_matrix(t), sl2.geodesic_matrix(-t)
        scale = np.maximum(1.0, np.exp(t) * np.abs(s))[:, None, None]

        upper = np.zeros((len(s), 2, 2))
        upper[:, 0, 0] = upper[:, 1, 1] = 1.0
        upper[:, 0, 1] = s
        expected = upper.copy()
        expected[:, 0, 1] = np.exp(t) * s
        worst = np.abs(ahead @ upper @ behind - expected) / scale

        lower = behind @ sl2.horocycle_matrix(s) @ ahead
        worst = np.maximum(worst, np.abs(lower - sl2.horocycle_matrix(np.exp(t) * s)) / scale)
        return float(worst.max())

    def _residuals(self, item):
        index, x, trials = item
        model, rho, flow, step = self.model, self.rho, self.flow, self.step
        ds = self.mixed_step
        phi = self.observable_for(self.observable_center, self.observable_width)
        here = cocycle.Cocycle(x, rho, flow)
        packed = model.pack([here.x])
        u00 = abs(cocycle.u_field(0.0, 0.0, here.x, rho, step, ds, flow) - rho.u00(packed)[0])
        rows = []
        for trial in trials:
            t, r, s, p = trial.t, trial.r, trial.s, trial.s_conj
            tau_cocycle = abs(here.clock.tau(r + s) - here.clock.tau(r)
                              - timechange.Clock(here.clock.phi(r), rho, flow).tau(s))
            exact_u = here.u_exact(t, s)
            exact_d2 = here.d2_exact(t, s)
            d1 = here.d1(t, s, step)
            rows.append((
                index, t, r, s,
                cocycle.cocycle_residual(t, r, s, here.x, rho, flow),
                here.commutation(t, s),
                tau_cocycle,
                u00,
                abs(here.u(t, s, step, ds) - exact_u) / max(1.0, abs(exact_u)),
                abs(here.d2(t, s, step) - exact_d2) / max(1.0, abs(exact_d2)),
                abs(d1.richardson - cocycle.d1_integral(t, s, here.x, rho, flow))
                / max(1.0, abs(d1.value)),
                abs(spectral.conj_identity_residual(phi, p, here.x, rho, step, flow)),
                abs(spectral.xf_expansion_residual(phi, p, here.x, rho, step, flow)),
            ))
        return rows

    def _oracle(self, x):
        """s* = lam^t s and u_00 = ln(lam) when rho is constant"""
        here = cocycle.Cocycle(x, self.rho, self.flow)
        worst = 0.0
        for t in (-1.0, -0.5, 0.5, 1.0):
            for s in (1.0, 10.0):
                exact = self.model.lam ** t * s
                worst = max(worst, abs(here.s_star(t, s) - exact) / exact)
        u00 = abs(cocycle.u_field(0.0, 0.0, here.x, self.rho, self.step, self.mixed_step,
                                  self.flow)
                  - self.model.log_lam)
        return worst, u00

    def execute(self):
        report = core.Report(self.name)
        rng = np.random.default_rng(self.seed)
        report.check('matrix_commutation', self.matrix_commutation(rng), self.algebra_tolerance)

        points = self.sample()
        items = []
        for index, x in enumerate(points):
            trials = [Trial(index, rng.uniform(-self.t_range, self.t_range),
                            rng.uniform(-self.s_range, self.s_range),
                            rng.uniform(-self.s_range, self.s_range),
                            rng.uniform(-self.conj_range, self.conj_range))
                      for _ in range(self.trials)]
            items.append((index, x, trials))
        log.info("%s: %d points, %d trials each", self.name, len(items), self.trials)
        results = self.map(self._residuals, items)
        rows = [row for result in results if not isinstance(result, Exception) for row in result]
        for index, exception in self._failures:
            report.fail('sweep at point %d' % index, exception)
        report.tables['residuals'] = (RESIDUAL_COLUMNS, rows)

        bounds = collections.OrderedDict([
            ('cocycle', self.tolerance),
            ('commutation', self.commutation_tolerance),
            ('tau_cocycle', self.tolerance),
            ('u00', self.derivative_tolerance),
            ('u_closed_form', self.derivative_tolerance),
            ('d2_closed_form', self.derivative_tolerance),
            ('d1_integral', self.derivative_tolerance),
            ('conjugation', self.derivative_tolerance),
            ('xf_expansion', self.derivative_tolerance),
        ])
        for name, bound in bounds.items():
            column = RESIDUAL_COLUMNS.index(name)
            worst = max([row[column] for row in rows] or [math.nan])
            report.check(name, worst, bound)

        if self.rho.constant is not None:
            oracle = [o for o in self.map(self._oracle, points) if not isinstance(o, Exception)]
            report.check('s_star_closed_form', max([o[0] for o in oracle] or [math.nan]),
                         self.oracle_tolerance)
            report.check('u00_log_lambda', max([o[1] for o in oracle] or [math.nan]),
                         self.oracle_tolerance)

        grid = cocycle.sample_grid(points[0], self.rho, (-1.0, -0.5, 0.5, 1.0), (1.0, 10.0, 50.0),
                                   self.step, self.mixed_step, self.flow)
        report.tables['cocycle'] = (cocycle.CSV_COLUMNS, [tuple(sample) for sample in grid])

        observables = [self.observable_for(self.observable_center, self.observable_width),
                       self.observable_for([-0.4, 0.8, 2.0], self.observable_width, wave=(1, 1),
                                           phase=0.4)]
        haar = self.model.sample_array(self.norm_samples, self.seed + 1)
        norms = [timechange.composition_norm(self.rho, t, observables, haar)
                 for t in rng.uniform(-5.0, 5.0, self.norm_trials)]
        bound = timechange.composition_bound(self.rho)
        report.check('composition_norm', max(norms) / bound, self.norm_slack)
        return report


LAMBDA_COLUMNS = ('point', 't', 's', 'lambda_hat', 's_star_error', 'd1_error')


class EstimateLambda(ModelExperiment):
    """Expansion rate from s*(t, s, x)/s over a geometric ladder of s"""
    name = 'estimate-lambda'

    t_values =  config.Setting('ladder.t_values', [1.0, -1.0, 0.5, -0.5], type=(list, tuple))
    s_max =     config.Setting('ladder.s_max', 1e4, type=float, positive=True)
    rungs =     config.Setting('ladder.rungs', 3, type=int, positive=True)
    step =      config.Setting('ladder.step', 1e-4, type=float, positive=True)
    tolerance = config.Setting('ladder.tolerance', 5e-2, type=float, positive=True)

    def _ladder(self, item):
        index, x, t = item
        model = self.model
        estimate = cocycle.estimate_lambda(x, t, self.s_max, self.rho, self.rungs, self.flow)
        here = cocycle.Cocycle(x, self.rho, self.flow)
        growth = model.lam ** t
        rows = []
        for s, lam_hat in estimate.ladder:
            d1 = here.d1(t, s, self.step).richardson
            rows.append((index, t, s, lam_hat, abs(here.s_star(t, s) / s - growth),
                         abs(d1 / s - model.log_lam * growth)))
        return rows

    def execute(self):
        if self.s_max < 1e2:
            raise core.Refused("ladder.s_max must be at least 100, got %g" % self.s_max)
        if any(t == 0.0 for t in self.t_values):
            raise core.Refused("ladder.t_values must not contain 0")
        report = core.Report(self.name)
        items = [(index, x, float(t)) for index, x in enumerate(self.sample())
                 for t in self.t_values]
        ladders = self.map(self._ladder, items)
        rows = [row for ladder in ladders for row in ladder]
        report.tables['ladder'] = (LAMBDA_COLUMNS, rows)

        final = [ladder[-1] for ladder in ladders]
        report.check('lambda', max(abs(row[3] - self.model.lam) for row in final), self.tolerance)
        if self.rho.constant is not None:
            report.note("constant time change: every rung is exact, ladder monotonicity not tested")
        else:
            violations = sum(_violations([row[4] for row in ladder])
                             + _violations([row[5] for row in ladder]) for ladder in ladders)
            report.check('ladder_monotone', violations, 0)
        report.check('s_star_final', max(row[4] for row in final), self.tolerance)
        report.check('d1_final', max(row[5] for row in final), self.tolerance)
        return report


class Mixing(ModelExperiment):
    """Decay of the correlation of two bump observables along the time-changed flow"""
    name = 'mixing'

    horizon =     config.Setting('mixing.horizon', 1e5, type=float, positive=True)
    s_max =       config.Setting('mixing.s_max', 640.0, type=float, positive=True)
    step =        config.Setting('mixing.step', 0.5, type=float, positive=True)
    starts =      config.Setting('mixing.starts', 4, type=int, positive=True)
    first_block = config.Setting('mixing.first_block', 10.0, type=float, positive=True)
    blocks =      config.Setting('mixing.blocks', 6, type=int, positive=True)
    observable =  config.Setting('mixing.observable', 'bumps', choices=('bumps', 'constant'))
    psi_center =  config.Setting('mixing.psi_center', [0.0, 1.0, 0.0], type=(list, tuple))
    phi_center =  config.Setting('mixing.phi_center', [0.2, 1.3, 1.0], type=(list, tuple))
    width =       config.Setting('mixing.width', 0.85, type=float, positive=True)

    def correlation(self):
        """Mean-adjusted correlation of the two bumps and its standard error"""
        psi = self.observable_for(self.psi_center, self.width)
        phi = self.observable_for(self.phi_center, self.width)
        return spectral.correlation_ensemble(psi, phi, self.s_max, self.step,
                                             self.sample(self.starts), self.horizon, self.rho,
                                             mean_adjust=True, flow=self.flow, mapper=self.map)

    def execute(self):
        self.require_minimal()
        if self.horizon < 4 * self.s_max:
            raise core.Refused("mixing.horizon %g is shorter than four times mixing.s_max %g"
                               % (self.horizon, self.s_max))
        report = core.Report(self.name)
        if self.observable == 'constant':
            report.note("trend test skipped: a constant observable lies in the kernel direction "
                        "of the generator and never decorrelates")
            return report
        series, stderr = self.correlation()
        report.tables['correlation'] = (('s', 're', 'im', 'stderr'),
                                        list(zip(series.s, series.values.real,
                                                 series.values.imag, stderr)))
        maxima = spectral.block_maxima(series, self.first_block, self.blocks)
        report.tables['blocks'] = (('start', 'max_abs'), maxima)
        tail = np.abs(series.s) >= self.first_block
        noise = float(stderr[tail].max()) if tail.any() else 0.0
        values = [m for _, m in maxima]
        rise = max([later - earlier for earlier, later in zip(values, values[1:])] or [0.0])
        report.check('decay_trend', rise, 2.0 * noise,
                     passed=spectral.decay_trend(maxima, noise),
                     detail='largest block-to-block rise against twice the standard error')
        return report


class Spectrum(ModelExperiment):
    """Spectral density and atom scan of a correlation series"""
    name = 'spectrum'

    source =      config.Setting('spectrum.source', 'orbit',
                                 choices=('orbit', 'cosine', 'lorentzian'))
    window =      config.Setting('spectrum.window', 'bartlett', choices=tuple(spectral.WINDOWS))
    bandwidth =   config.Setting('spectrum.bandwidth', 0.02, type=float, positive=True)
    s_max =       config.Setting('spectrum.s_max', 200.0, type=float, positive=True)
    horizon =     config.Setting('spectrum.horizon', 2e5, type=float, positive=True)
    step =        config.Setting('spectrum.step', 0.1, type=float, positive=True)
    starts =      config.Setting('spectrum.starts', 4, type=int, positive=True)
    mean_adjust = config.Setting('spectrum.mean_adjust', True, type=bool)
    floor =       config.Setting('spectrum.floor', 1e-2, type=float, positive=True)
    kappa =       config.Setting('spectrum.kappa', 4.0, type=float, positive=True)
    persistence = config.Setting('spectrum.persistence', 1.5, type=float, positive=True)
    center =      config.Setting('spectrum.center', [0.0, 1.0, 0.0], type=(list, tuple))
    width =       config.Setting('spectrum.width', 0.5, type=float, positive=True)
    mass_samples = config.Setting('spectrum.mass_samples', 100000, type=int, positive=True)
    tolerance =   config.Setting('spectrum.tolerance', 0.05, type=float, positive=True)
    mass_tolerance = config.Setting('spectrum.mass_tolerance', 0.02, type=float, positive=True,
                                    doc="Relative gap between the density's mass and C(0)")
    density_tolerance = config.Setting('spectrum.density_tolerance', 0.03, type=float,
                                       positive=True)

    def series(self):
        if self.source == 'cosine':
            return spectral.synthetic(lambda s: 0.5 + 0.5 * np.cos(s), self.s_max, self.step)
        if self.source == 'lorentzian':
            return spectral.synthetic(lambda s: np.exp(-np.abs(s)), self.s_max, self.step)
        self.require_minimal()
        if self.horizon < 4 * self.s_max:
            raise core.Refused("spectrum.horizon %g is shorter than four times spectrum.s_max %g"
                               % (self.horizon, self.s_max))
        phi = self.observable_for(self.center, self.width)
        series, _ = spectral.correlation_ensemble(phi, phi, self.s_max, self.step,
                                                  self.sample(self.starts), self.horizon, self.rho,
                                                  mean_adjust=self.mean_adjust, flow=self.flow,
                                                  mapper=self.map)
        return series

    def expected_atoms(self):
        """(frequency, mass, error) of the atoms the scan should find

        ``error`` is the relative standard error of a sampled reference mass.

        """
        if self.source == 'cosine':
            return [(-1.0, 0.25, 0.0), (0.0, 0.5, 0.0), (1.0, 0.25, 0.0)]
        if self.source == 'lorentzian' or self.mean_adjust:
            return []
        if self.rho.constant is not None:
            # mu is the Haar measure
            mean = self.model.bump_mean(self.width)
            log.info("mean of the test bump %.6g by quadrature", mean)
            return [(0.0, mean ** 2, 0.0)]
        phi = self.observable_for(self.center, self.width)
        haar = self.model.sample_array(self.mass_samples, self.seed + 1)
        mean, stderr = timechange.weighted_mean(phi.values(haar),
                                                timechange.measure_weights(self.rho, haar))
        log.info("mu-mean of the test bump %.6g +- %.2g", mean, stderr)
        return [(0.0, mean ** 2, 2.0 * stderr / abs(mean))]

    def execute(self):
        report = core.Report(self.name)
        series = self.series()
        estimate = spectral.spectral_density(series, self.window, self.bandwidth)
        scan = spectral.atom_scan(series, self.floor, self.kappa, self.persistence)
        estimate = estimate._replace(atoms=scan.atoms)
        report.tables['correlation'] = (('s', 're', 'im'),
                                        list(zip(series.s, series.values.real, series.values.imag)))
        report.tables['density'] = (('omega', 'density'), list(zip(estimate.omega, estimate.density)))
        report.documents['atoms'] = {
            'atoms': [atom._asdict() for atom in scan.atoms],
            'span': scan.span,
            'wiener_sum': scan.wiener_sum,
            'mass': estimate.mass,
            'clipped': estimate.clipped,
            'window': estimate.window,
            'bandwidth': estimate.bandwidth,
        }
        c0 = abs(series.values[(len(series.s) - 1) // 2])
        report.check('clipped_mass', estimate.clipped / c0 if c0 else 0.0, self.tolerance)
        report.check('mass_conservation', abs(estimate.mass - c0) / c0 if c0 else estimate.mass,
                     self.mass_tolerance, detail='density mass against C(0)')

        if self.source == 'lorentzian':
            exact = 1.0 / (math.pi * (1.0 + estimate.omega ** 2))
            report.check('lorentzian_sup', np.max(np.abs(estimate.density - exact)) / exact.max(),
                         self.density_tolerance)

        expected = self.expected_atoms()
        found = list(scan.atoms)
        report.check('atom_count', abs(len(found) - len(expected)), 0)
        resolution = 2.0 * math.pi / scan.span
        worst = 0.0
        slack = 0.0
        for frequency, mass, error in expected:
            near = [a for a in found if abs(a.frequency - frequency) <= resolution]
            if not near:
                worst = math.inf
                continue
            atom = max(near, key=lambda a: a.mass)
            slack = max(slack, 2.0 * error)
            worst = max(worst, abs(atom.mass - mass) / mass if mass > 0.0 else atom.mass)
        if expected:
            report.check('atom_mass', worst, self.tolerance + slack,
                         detail='bound widened by two reference standard errors' if slack else '')
        return report


CERTIFICATE_COLUMNS = ('t', 'a_I', 'sup_dev', 'sup_xphi_ct', 'deficit', 'a_effective', 'pass')


class Mourre(ModelExperiment):
    """Scalar positive-commutator certificates over a ladder of averaging times"""
    name = 'mourre'

    interval =     config.Setting('mourre.interval', [1.0, 2.0], type=(list, tuple))
    t_values =     config.Setting('mourre.t_values', [5.0, 20.0, 80.0], type=(list, tuple))
    tolerance =    config.Setting('mourre.tolerance', 1e-6, type=float, positive=True)
    haar_samples = config.Setting('mourre.haar_samples', 20000, type=int, positive=True)

    def execute(self):
        self.require_minimal()
        if len(self.interval) != 2:
            raise config.ConfigError("expected [e1, e2]", 'mourre.interval')
        e1, e2 = (float(e) for e in self.interval)
        if not 0.0 < e1 < e2:
            raise core.Refused("the interval [%g, %g] must lie in (0, inf) with e1 < e2"
                               % (e1, e2))
        ts = sorted(float(t) for t in self.t_values)
        if not ts or ts[0] <= 0.0:
            raise core.Refused("mourre.t_values must be positive")
        report = core.Report(self.name)
        points = self.sample()
        certificates = [ergodic.mourre_certificate((e1, e2), t, self.rho, points, self.flow,
                                                   self.map) for t in ts]
        report.tables['certificates'] = (
            CERTIFICATE_COLUMNS,
            [(c.t, c.a_I, c.sup_dev, c.sup_xphi_ct, c.deficit, c.a_effective, int(c.passed))
             for c in certificates])
        report.documents['certificates'] = {
            'certificates': [ergodic.certificate_report(c) for c in certificates]}

        log_lam = self.model.log_lam
        if self.rho.constant is not None:
            exact = 2.0 * log_lam ** 2 * e1
            report.check('a_effective_exact',
                         max(abs(c.a_effective - exact) for c in certificates), self.tolerance)
        else:
            report.check('c_t_convergence', _violations([c.sup_dev for c in certificates]), 0)
            report.check('a_effective_increasing',
                         _violations([-c.a_effective for c in certificates], floor=-math.inf), 0)
        top = certificates[-1]
        report.check('certificate_top', -top.a_effective, 0.0, passed=top.passed,
                     detail='a_effective=%.6g at t=%g' % (top.a_effective, top.t))

        haar = self.model.sample_array(self.haar_samples, self.seed + 1)
        mean, stderr = ergodic.ensemble_mean_u00(self.rho, haar)
        report.check('mean_u00', abs(mean - log_lam), 5.0 * stderr + 1e-12,
                     detail='mu-average of u_00 against ln(lam)')
        return report


EXPERIMENTS = collections.OrderedDict(
    (kls.name, kls) for kls in (VerifyIdentities, EstimateLambda, Mixing, Spectrum, Mourre))

def build(name):
    """Experiment for a runner subcommand; ``all`` gives the full suite"""
    if name == 'all':
        return Suite([kls() for kls in EXPERIMENTS.values()])
    return EXPERIMENTS[name]()

def _run(name, settings):
    if settings is not None:
        config.load(settings)
    return build(name).run()

def run_verify_identities(settings=None):
    return _run('verify-identities', settings)

def run_estimate_lambda(settings=None):
    return _run('estimate-lambda', settings)

def run_mixing(settings=None):
    return _run('mixing', settings)

def run_spectrum(settings=None):
    return _run('spectrum', settings)

def run_mourre(settings=None):
    return _run('mourre', settings)
