"""The expansion cocycle s*(t, s, x)

f_t o phi_s = phi_{s*(t,s,x)} o f_t. With the exact expansion
f_t o phit_sigma = phit_{lam^t sigma} o f_t of the models,

    s*(t, s, x) = tau_inverse(f_t x, lam^t tau(x, s)).

Derivatives in t are finite differences of that formula; derivatives in s
also have the closed form lam^t rho(f_t phi_s x) / rho(phi_s x).

"""

import collections
import logging
import math

import numpy as np

from horoflow.timechange import Clock, OrbitIntegral, DEFAULT_FLOW

log = logging.getLogger(__name__)

MIN_STEP = 1e-6
MAX_STEP = 1e-2
DEFAULT_STEP = 1e-4

# roundoff of a computed s* in units of machine epsilon times |s*|
ROUNDOFF_GROWTH = 64.0

class StepTooSmall(ArithmeticError): pass

Derivative = collections.namedtuple('Derivative', 'value richardson roundoff')

CocycleSample = collections.namedtuple(
    'CocycleSample', 't s s_star d1 d1_richardson u d2 d2_exact commutation dt ds')

CSV_COLUMNS = CocycleSample._fields

LambdaEstimate = collections.namedtuple('LambdaEstimate', 'value ladder')

def _check_step(name, delta):
    if not MIN_STEP <= delta <= MAX_STEP:
        raise ValueError("%s=%r outside [%g, %g]" % (name, delta, MIN_STEP, MAX_STEP))


class Cocycle(object):
    """s* and its derivatives at one base point

    Clocks along the orbits of x and of its geodesic images are cached, so
    sweeps over (t, s) at a fixed x share their orbit quadratures.

    """

    def __init__(self, x, rho, flow=DEFAULT_FLOW):
        self.model = rho.model
        self.x = self.model.reduce(x)
        self.rho = rho
        self.flow = flow
        self.clock = Clock(self.x, rho, flow)
        self._images = {}

    def image(self, t):
        """Clock along the orbit of f_t x"""
        clock = self._images.get(t)
        if clock is None:
            clock = self._images[t] = Clock(self.model.geodesic(self.x, t), self.rho, self.flow)
        return clock

    def s_star(self, t, s):
        if not (math.isfinite(t) and math.isfinite(s)):
            raise ValueError("t and s must be finite, got %r, %r" % (t, s))
        if s == 0.0:
            return 0.0
        return self.image(t).tau_inverse(self.model.lam ** t * self.clock.tau(s))

    def d1(self, t, s, delta=DEFAULT_STEP, budget=1e-6):
        """Central difference in t with a Richardson companion"""
        _check_step('dt', delta)
        centre = (self.s_star(t + delta, s) - self.s_star(t - delta, s)) / (2.0 * delta)
        half = (self.s_star(t + delta / 2, s) - self.s_star(t - delta / 2, s)) / delta
        scale = max(abs(self.s_star(t, s)), 1.0)
        roundoff = ROUNDOFF_GROWTH * np.finfo(float).eps * scale / delta
        if roundoff > budget * max(abs(s), 1.0):
            raise StepTooSmall("dt=%g loses %.2e to cancellation at s=%g" % (delta, roundoff, s))
        return Derivative(centre, (4.0 * half - centre) / 3.0, roundoff)

    def d2_exact(self, t, s):
        """lam^t rho(f_t phi_s x) / rho(phi_s x)"""
        y = self.model.pack([self.clock.phi(s)])
        ahead = self.model.geodesic_many(y, t)
        return float(self.model.lam ** t * self.rho.values(ahead)[0] / self.rho.values(y)[0])

    def d2(self, t, s, delta=DEFAULT_STEP):
        _check_step('ds', delta)
        return (self.s_star(t, s + delta) - self.s_star(t, s - delta)) / (2.0 * delta)

    def u(self, t, s, dt=DEFAULT_STEP, ds=DEFAULT_STEP, budget=1e-4):
        """Mixed central difference for the derivative of s* in t and s"""
        _check_step('dt', dt)
        _check_step('ds', ds)
        corners = (self.s_star(t + dt, s + ds) - self.s_star(t + dt, s - ds)
                   - self.s_star(t - dt, s + ds) + self.s_star(t - dt, s - ds))
        scale = max(abs(self.s_star(t, s)), 1.0)
        roundoff = ROUNDOFF_GROWTH * np.finfo(float).eps * scale / (dt * ds)
        if roundoff > budget:
            raise StepTooSmall("dt=%g, ds=%g lose %.2e to cancellation" % (dt, ds, roundoff))
        return corners / (4.0 * dt * ds)

    def u_exact(self, t, s):
        """lam^t (ln(lam) rho + X_f rho)(f_t phi_s x) / rho(phi_s x)"""
        y = self.model.pack([self.clock.phi(s)])
        ahead = self.model.geodesic_many(y, t)
        top = self.model.log_lam * self.rho.values(ahead) + self.rho.xf_rho(ahead)
        return float(self.model.lam ** t * top[0] / self.rho.values(y)[0])

    def commutation(self, t, s):
        """distance(f_t phi_s x, phi_{s*} f_t x)"""
        left = self.model.geodesic(self.clock.phi(s), t)
        right = self.image(t).phi(self.s_star(t, s))
        return self.model.distance(left, right)

    def sample(self, t, s, dt=DEFAULT_STEP, ds=DEFAULT_STEP):
        d1 = self.d1(t, s, dt)
        return CocycleSample(t, s, self.s_star(t, s), d1.value, d1.richardson, self.u(t, s, dt, ds),
                             self.d2(t, s, ds), self.d2_exact(t, s), self.commutation(t, s), dt, ds)


def s_star(t, s, x, rho, flow=DEFAULT_FLOW):
    return Cocycle(x, rho, flow).s_star(t, s)

def d1_s_star(t, s, x, rho, delta=DEFAULT_STEP, flow=DEFAULT_FLOW):
    return Cocycle(x, rho, flow).d1(t, s, delta)

def u_field(t, s, x, rho, dt=DEFAULT_STEP, ds=DEFAULT_STEP, flow=DEFAULT_FLOW):
    return Cocycle(x, rho, flow).u(t, s, dt, ds)

def commutation_residual(t, s, x, rho, flow=DEFAULT_FLOW):
    return Cocycle(x, rho, flow).commutation(t, s)

def cocycle_residual(t, r, s, x, rho, flow=DEFAULT_FLOW):
    """|s*(t, r+s, x) - s*(t, r, x) - s*(t, s, phi_r x)|"""
    here = Cocycle(x, rho, flow)
    there = Cocycle(here.clock.phi(r), rho, flow)
    return abs(here.s_star(t, r + s) - here.s_star(t, r) - there.s_star(t, s))

def d1_integral(t, s, x, rho, flow=DEFAULT_FLOW):
    """int_0^s u_{t,0}(phi_r x) dr, which equals the t-derivative of s*

    In orbit time of the unperturbed flow dr = rho d sigma, so the integrand
    becomes lam^t (ln(lam) rho + X_f rho)(f_t phit_sigma x).

    """
    model = rho.model
    scale = model.lam ** t

    def integrand(points):
        ahead = model.geodesic_many(points, t)
        return scale * (model.log_lam * rho.values(ahead) + rho.xf_rho(ahead))

    clock = Clock(x, rho, flow)
    return OrbitIntegral(model, x, integrand, flow, clock.leaf)(clock.tau(s))

def estimate_lambda(x, t, s_max, rho, rungs=4, flow=DEFAULT_FLOW):
    """(s*(t, s_max, x) / s_max)^(1/t) with the geometric ladder leading to it"""
    if s_max < 1e2:
        raise ValueError("s_max must be at least 100, got %r" % s_max)
    if t == 0.0:
        raise ValueError("t must be nonzero")
    cocycle = Cocycle(x, rho, flow)
    ladder = []
    for k in range(rungs - 1, -1, -1):
        s = s_max / 10.0 ** k
        ladder.append((s, (cocycle.s_star(t, s) / s) ** (1.0 / t)))
    log.debug("lambda ladder at t=%g: %s", t, ladder)
    return LambdaEstimate(ladder[-1][1], ladder)

def sample_grid(x, rho, ts, ss, dt=DEFAULT_STEP, ds=DEFAULT_STEP, flow=DEFAULT_FLOW):
    cocycle = Cocycle(x, rho, flow)
    return [cocycle.sample(t, s, dt, ds) for t in ts for s in ss]
