"""Time-changed unstable flows

phi_s(x) = phit_{tau(x,s)}(x), where phit is the uniformly expanding flow of
the model and tau inverts the orbit integral

    S_x(sigma) = int_0^sigma rho(phit_u x) du

so that X_phi = rho^{-1} X_phit. The leaf geometry comes from the model in
closed form; only the scalar time scale is computed numerically.

"""

import collections
import logging
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

log = logging.getLogger(__name__)

class ToleranceNotMet(ArithmeticError): pass

_FlowConfig = collections.namedtuple('FlowConfig', 'h tolerance max_substeps nodes method')

class FlowConfig(_FlowConfig):
    """Integrator settings

    ``h`` is the panel length of the orbit quadrature (and the initial step
    of the Runge-Kutta route), ``nodes`` the Gauss-Legendre order per panel,
    ``method`` either 'quadrature' or 'rk45'.

    """
    __slots__ = ()
    METHODS = ('quadrature', 'rk45')

    def __new__(cls, h=0.25, tolerance=1e-11, max_substeps=200, nodes=16, method='quadrature'):
        if not h > 0.0:
            raise ValueError("step size h must be positive, got %r" % h)
        if not tolerance > 0.0:
            raise ValueError("tolerance must be positive, got %r" % tolerance)
        if max_substeps < 1:
            raise ValueError("max_substeps must be positive, got %r" % max_substeps)
        if method not in cls.METHODS:
            raise ValueError("unknown integration method %r" % method)
        return super(FlowConfig, cls).__new__(cls, float(h), float(tolerance),
                                              int(max_substeps), int(nodes), method)

DEFAULT_FLOW = FlowConfig()


class TimeChange(object):
    """A positive speed function rho together with its derivative along X_f"""

    def __init__(self, model, rho, min_rho, max_rho, name='rho', constant=None):
        if not 0.0 < min_rho <= max_rho < math.inf:
            raise ValueError("time change bounds must satisfy 0 < min <= max < inf, got %r, %r"
                             % (min_rho, max_rho))
        if rho.grade != 'C1':
            raise ValueError("a time change needs derivative data along the geodesic flow")
        self.model = model
        self.rho = rho
        self.min_rho = float(min_rho)
        self.max_rho = float(max_rho)
        self.name = name
        self.constant = constant

    @classmethod
    def identity(cls, model):
        return cls.constant_speed(model, 1.0)

    @classmethod
    def constant_speed(cls, model, value):
        if not value > 0.0:
            raise ValueError("constant time change must be positive, got %r" % value)
        return cls(model, model.constant(value), value, value,
                   name='constant(%g)' % value, constant=float(value))

    @classmethod
    def bump_sum(cls, model, centers, widths, amplitude):
        """rho = 1 + amplitude * sum of normalized invariant bumps

        Each bump is divided by len(centers) times a bound of its X_f
        derivative, so |X_f rho| <= amplitude and, since rho >= 1,
        u_00 >= ln(lam) - amplitude.

        """
        if not 0.0 <= amplitude < 1.0:
            raise ValueError("bump amplitude must lie in [0, 1), got %r" % amplitude)
        if len(centers) != len(widths) or not centers:
            raise ValueError("need one width per bump center")
        rho = model.constant(1.0)
        peak = 0.0
        for center, width in zip(centers, widths):
            scale = len(centers) * xf_bump_bound(width)
            rho = rho + (amplitude / scale) * model.bump(center, width)
            peak += amplitude / scale
        tc = cls(model, rho, 1.0, 1.0 + peak, name='bumps(eps=%g, n=%d)' % (amplitude, len(centers)))
        tc.amplitude = amplitude
        return tc

    @classmethod
    def perturbation(cls, model, observable, amplitude):
        """rho = 1 + amplitude * F for an observable with |F| <= 1"""
        if not 0.0 <= amplitude < 1.0:
            raise ValueError("amplitude must lie in [0, 1), got %r" % amplitude)
        tc = cls(model, model.constant(1.0) + amplitude * observable, 1.0 - amplitude,
                 1.0 + amplitude, name='1+%g*%s' % (amplitude, observable.name))
        tc.amplitude = amplitude
        return tc

    amplitude = 0.0

    def values(self, points):
        return self.rho.values(points)

    def xf_rho(self, points):
        return self.rho.xf(points)

    def xh_rho(self, points):
        return self.rho.xh(points)

    def u00(self, points):
        """ln(lam) + rho^{-1} X_f rho"""
        return self.model.log_lam + self.rho.xf(points) / self.rho.values(points)

    def xf_fd(self, points, delta=1e-4):
        """Central difference of rho along the geodesic flow"""
        ahead = self.model.geodesic_many(points, delta)
        behind = self.model.geodesic_many(points, -delta)
        return (self.rho.values(ahead) - self.rho.values(behind)) / (2.0 * delta)

    def __call__(self, point):
        return self.rho(point)

    def __repr__(self):
        return '<TimeChange %s on %s>' % (self.name, self.model.name)


def xf_bump_bound(width):
    """Bound of |X_f b| for the bump of Frobenius radius ``width``

    With h = I + D and ||D||_F = w sqrt(q), |dq/dt| <= sqrt(q)(sqrt(2) + w sqrt(q))/w,
    and |db/dq| = u^2 exp(1 - u) for u = 1/(1-q). The bound is the maximum
    of the product over q in [0, 1).

    """
    def negative(u):
        root = math.sqrt(1.0 - 1.0 / u)
        return -u * u * math.exp(1.0 - u) * root * (math.sqrt(2.0) + width * root) / width

    best = minimize_scalar(negative, bounds=(1.0, 40.0), method='bounded',
                           options={'xatol': 1e-10})
    return -float(best.fun)


class OrbitIntegral(object):
    """sigma -> int_0^sigma G(phit_u x) du along the orbit of x

    Composite Gauss-Legendre on panels [kh, (k+1)h] anchored at multiples of
    h plus one partial panel, so the result is a smooth function of sigma.
    Completed panels are cached.

    """

    def __init__(self, model, x, integrand, flow=DEFAULT_FLOW, leaf=None):
        self.model = model
        self.leaf = leaf or model.leaf(x)
        self.integrand = integrand
        self.h = flow.h
        nodes, weights = np.polynomial.legendre.leggauss(flow.nodes)
        self._nodes = 0.5 * (nodes + 1.0)
        self._weights = 0.5 * weights
        self._ahead = [0.0]
        self._behind = [0.0]

    def _panels(self, start, count):
        """Integrals over count panels starting at index start"""
        offsets = (start + np.arange(count))[:, None] + self._nodes[None, :]
        values = self.integrand(self.leaf.points(offsets.ravel() * self.h))
        return self.h * (values.reshape(count, -1) @ self._weights)

    def _extend(self, k):
        if k > 0 and len(self._ahead) <= k:
            start = len(self._ahead) - 1
            count = max(k - start, start, 16)
            self._ahead.extend((self._ahead[-1] + np.cumsum(self._panels(start, count))).tolist())
        elif k < 0 and len(self._behind) <= -k:
            done = len(self._behind) - 1
            count = max(-k - done, done, 16)
            self._behind.extend(
                (self._behind[-1] + np.cumsum(self._panels(-done - count, count)[::-1])).tolist())

    def cumulative(self, k):
        """Integral from 0 to k*h"""
        self._extend(k)
        return self._ahead[k] if k >= 0 else -self._behind[-k]

    def table(self, k):
        """Integrals from 0 to j*h for j = 0..k, k >= 0"""
        self._extend(k)
        return np.array(self._ahead[:k + 1])

    def _partial(self, a, b):
        u = a + (b - a) * self._nodes
        return (b - a) * float(self.integrand(self.leaf.points(u)) @ self._weights)

    def __call__(self, sigma):
        if not math.isfinite(sigma):
            raise ValueError("orbit time must be finite, got %r" % sigma)
        k = int(math.floor(sigma / self.h))
        base = self.cumulative(k)
        if sigma == k * self.h:
            return base
        return base + self._partial(k * self.h, sigma)

    def at(self, sigma):
        """Integrand at orbit time sigma"""
        return float(self.integrand(self.leaf.points([sigma]))[0])


class Clock(object):
    """The pair tau(x, .), tau_inverse(x, .) for one starting point"""

    def __init__(self, x, rho, flow=DEFAULT_FLOW):
        self.x = x
        self.rho = rho
        self.flow = flow
        self.model = rho.model
        self.leaf = self.model.leaf(x)
        self._integral = None
        if rho.constant is None and flow.method == 'quadrature':
            self._integral = OrbitIntegral(self.model, x, rho.values, flow, self.leaf)

    def _speed(self, sigma):
        return float(self.rho.values(self.leaf.points([sigma]))[0])

    def tau_inverse(self, sigma):
        if not math.isfinite(sigma):
            raise ValueError("sigma must be finite, got %r" % sigma)
        if self.rho.constant is not None:
            return self.rho.constant * sigma
        if sigma == 0.0:
            return 0.0
        if self._integral is not None:
            return self._integral(sigma)
        sol = self._solve(lambda u, y: [self._speed(u)], sigma)
        return float(sol.y[0, -1])

    def tau(self, s):
        if not math.isfinite(s):
            raise ValueError("s must be finite, got %r" % s)
        if self.rho.constant is not None:
            return s / self.rho.constant
        if s == 0.0:
            return 0.0
        if self._integral is None:
            sol = self._solve(lambda u, y: [1.0 / self._speed(y[0])], s)
            return float(sol.y[0, -1])
        return self._newton(s)

    def _solve(self, rhs, end):
        tol = self.flow.tolerance
        sol = solve_ivp(rhs, (0.0, end), [0.0], method='RK45', rtol=tol, atol=tol,
                        first_step=min(self.flow.h, abs(end)))
        if sol.status != 0:
            raise ToleranceNotMet("Runge-Kutta integration to %r failed: %s" % (end, sol.message))
        if sol.nfev > 6 * self.flow.max_substeps * max(1.0, abs(end) / self.flow.h):
            raise ToleranceNotMet("Runge-Kutta integration to %r needed %d evaluations"
                                  % (end, sol.nfev))
        return sol

    def _newton(self, s):
        """Safeguarded Newton on S(sigma) = s, S' = rho"""
        lo, hi = sorted((s / self.rho.max_rho, s / self.rho.min_rho))
        sigma = s / self._speed(0.0)
        sigma = min(max(sigma, lo), hi)
        budget = self.flow.tolerance * max(1.0, abs(s))
        residual = math.inf
        for step in range(self.flow.max_substeps):
            residual = self._integral(sigma) - s
            if abs(residual) <= budget:
                log.debug("tau(%g) converged after %d Newton steps", s, step)
                # one more step lands on machine precision
                polished = sigma - residual / self._speed(sigma)
                return polished if lo <= polished <= hi else sigma
            if residual > 0.0:
                hi = sigma
            else:
                lo = sigma
            candidate = sigma - residual / self._speed(sigma)
            if not lo < candidate < hi:
                candidate = 0.5 * (lo + hi)
            if candidate == sigma:
                break
            sigma = candidate
        raise ToleranceNotMet("tau(%r) stalled with residual %.3e after %d steps"
                              % (s, residual, self.flow.max_substeps))

    def phi(self, s):
        return self.leaf.point(self.tau(s))


def tau(x, s, rho, flow=DEFAULT_FLOW):
    return Clock(x, rho, flow).tau(s)

def tau_inverse(x, sigma, rho, flow=DEFAULT_FLOW):
    return Clock(x, rho, flow).tau_inverse(sigma)

def flow_phi(x, s, rho, flow=DEFAULT_FLOW):
    if s == 0.0:
        return rho.model.reduce(x)
    return Clock(x, rho, flow).phi(s)

def phi_orbit(x, s_values, rho, flow=DEFAULT_FLOW):
    """Packed points phi_s(x) for a sequence of s"""
    clock = Clock(x, rho, flow)
    sigmas = [clock.tau(float(s)) for s in s_values]
    return clock.leaf.points(sigmas)


Normalization = collections.namedtuple('Normalization', 'rho_mean inverse_mean product stderr')

def measure_weights(rho, points):
    """Weights w_i = rho(x_i) / mean(rho) turning Haar samples into mu samples"""
    r = rho.values(points)
    return r / r.mean()

def normalization(rho, points):
    """Sample estimates of int rho dmu~ and int rho^{-1} dmu

    The second integral is taken with the weights of :func:`measure_weights`;
    their product is one for any sample.

    """
    r = rho.values(points)
    w = r / r.mean()
    inverse_mean = float(np.mean(w / r))
    return Normalization(float(r.mean()), inverse_mean, float(r.mean()) * inverse_mean,
                         float(r.std(ddof=1) / math.sqrt(len(r))) if len(r) > 1 else math.inf)

def weighted_mean(values, weights):
    """Mean and standard error of a weighted Monte-Carlo average"""
    values = np.asarray(values, dtype=float)
    terms = values * weights
    mean = float(terms.mean())
    stderr = float(terms.std(ddof=1) / math.sqrt(len(terms))) if len(terms) > 1 else math.inf
    return mean, stderr

def composition_norm(rho, t, observables, points):
    """Estimate of the norm of U_t: psi -> psi o f_t on L^2(mu)

    f_t preserves mu~ and mu = rho mu~ / Z, so
    ||psi o f_t||^2 / ||psi||^2 = int rho(f_{-t} y)|psi(y)|^2 dmu~ / int rho |psi|^2 dmu~,
    which never exceeds max(rho)/min(rho).

    """
    here = rho.values(points)
    back = rho.values(rho.model.geodesic_many(points, -t))
    ratio = 0.0
    for psi in observables:
        sq = psi.values(points) ** 2
        denominator = float(np.mean(here * sq))
        if denominator > 0.0:
            ratio = max(ratio, float(np.mean(back * sq)) / denominator)
    return math.sqrt(ratio)

def composition_bound(rho):
    return math.sqrt(rho.max_rho / rho.min_rho)
