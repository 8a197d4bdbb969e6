"""Correlations and spectral estimates of the time-changed flow

Correlations come from one long orbit sampled on a uniform phi-time grid
(:class:`OrbitBuffer`); lags are computed with zero-padded FFTs. Spectral
densities use the Blackman-Tukey lag-window estimator and atoms are detected
with Cesàro means of the modulated correlation.

"""

import collections
import logging
import math

import numpy as np
from scipy import signal
from scipy.interpolate import PchipInterpolator
from scipy.ndimage import maximum_filter1d
from scipy.optimize import minimize_scalar

from horoflow.cocycle import Cocycle, DEFAULT_STEP
from horoflow.ergodic import BudgetExceeded, MAX_EVALUATIONS
from horoflow.timechange import Clock, OrbitIntegral, DEFAULT_FLOW

log = logging.getLogger(__name__)

# grid points evaluated per observable call
CHUNK = 1 << 16

class WindowUnknown(KeyError): pass

CorrelationSeries = collections.namedtuple(
    'CorrelationSeries', 's values horizon step start mean_adjusted')

SpectralEstimate = collections.namedtuple(
    'SpectralEstimate', 'omega density window bandwidth mass clipped atoms')

Atom = collections.namedtuple('Atom', 'frequency mass confidence')

AtomScan = collections.namedtuple('AtomScan', 'atoms span wiener_sum')

def _bartlett(n):
    return signal.windows.bartlett(n)

def _parzen(n):
    return signal.windows.parzen(n)

WINDOWS = {
    'bartlett': _bartlett,
    'parzen': _parzen,
}


class OrbitBuffer(object):
    """Phi-orbit of x0 on the grid s_k = k*step, 0 <= k*step <= horizon

    The orbit time of the unperturbed flow at each grid point comes from a
    monotone interpolation of the cumulative speed integral; the points
    themselves are exact leaf points. Only observable values are kept.

    """

    def __init__(self, x0, horizon, step, rho, flow=DEFAULT_FLOW):
        if not step > 0.0 or not horizon > step:
            raise ValueError("need horizon > step > 0, got %r, %r" % (horizon, step))
        count = int(math.floor(horizon / step)) + 1
        if count > MAX_EVALUATIONS:
            raise BudgetExceeded("orbit buffer of %d points" % count)
        self.model = rho.model
        self.start = x0
        self.step = float(step)
        self.horizon = (count - 1) * self.step
        self.s = np.arange(count) * self.step
        self.clock = Clock(x0, rho, flow)
        if rho.constant is not None:
            self.sigma = self.s / rho.constant
        else:
            integral = OrbitIntegral(self.model, x0, rho.values, flow, self.clock.leaf)
            end = self.clock.tau(self.horizon) + flow.h
            panels = int(math.ceil(end / flow.h))
            knots = np.arange(panels + 1) * flow.h
            cumulative = integral.table(panels)
            self.sigma = PchipInterpolator(cumulative, knots)(self.s)
        log.debug("orbit buffer of %d points up to phi-time %g", count, self.horizon)

    def sample(self, observable):
        out = np.empty(len(self.sigma))
        for start in range(0, len(self.sigma), CHUNK):
            points = self.clock.leaf.points(self.sigma[start:start + CHUNK])
            out[start:start + CHUNK] = observable.values(points)
        return out


def cross_correlation(a, b, max_lag):
    """C[l] = mean_k a_k b_{k+l} for |l| <= max_lag, by zero-padded FFT"""
    n = len(a)
    if max_lag >= n:
        raise ValueError("max_lag %d needs more than %d samples" % (max_lag, n))
    size = 1 << int(math.ceil(math.log2(2 * n)))
    fa = np.fft.rfft(a, size)
    fb = np.fft.rfft(b, size)
    circular = np.fft.irfft(np.conj(fa) * fb, size)
    lags = np.arange(-max_lag, max_lag + 1)
    return circular[lags % size] / (n - np.abs(lags))

def correlation_from_buffer(buffer, psi, phi, s_max, mean_adjust=False):
    if not buffer.horizon > s_max:
        raise ValueError("horizon %g must exceed s_max %g" % (buffer.horizon, s_max))
    a = buffer.sample(psi)
    b = a if phi is psi else buffer.sample(phi)
    if mean_adjust:
        a = a - a.mean()
        b = b - b.mean()
    max_lag = int(round(s_max / buffer.step))
    values = cross_correlation(a, b, max_lag)
    lags = np.arange(-max_lag, max_lag + 1) * buffer.step
    return CorrelationSeries(lags, values.astype(complex), buffer.horizon, buffer.step,
                             buffer.start, mean_adjust)

def correlation(psi, phi, s_max, step, x0, horizon, rho, mean_adjust=False, flow=DEFAULT_FLOW):
    """(1/T) int_0^T psi(phi_r x0) phi(phi_{r+s} x0) dr for |s| <= s_max"""
    if horizon < 4 * s_max:
        raise ValueError("horizon %g should be at least four times s_max %g" % (horizon, s_max))
    buffer = OrbitBuffer(x0, horizon, step, rho, flow)
    return correlation_from_buffer(buffer, psi, phi, s_max, mean_adjust)

def correlation_ensemble(psi, phi, s_max, step, starts, horizon, rho, mean_adjust=False,
                         flow=DEFAULT_FLOW, mapper=map):
    """Mean correlation over several starts and the standard error per lag"""
    series = list(mapper(lambda x: correlation(psi, phi, s_max, step, x, horizon, rho,
                                                mean_adjust, flow), starts))
    stack = np.array([c.values for c in series])
    mean = stack.mean(axis=0)
    stderr = (stack.std(axis=0, ddof=1) / math.sqrt(len(series)) if len(series) > 1
              else np.zeros(len(mean)))
    first = series[0]
    return first._replace(values=mean), stderr

def hermitian_complete(s, values):
    """Two-sided series from lags s >= 0 with C(-s) = conj(C(s))"""
    s = np.asarray(s, dtype=float)
    values = np.asarray(values, dtype=complex)
    if s[0] != 0.0:
        raise ValueError("one-sided series must start at lag 0")
    return (np.concatenate([-s[:0:-1], s]),
            np.concatenate([np.conj(values[:0:-1]), values]))

def synthetic(func, s_max, step):
    """CorrelationSeries of a closed-form correlation function"""
    count = int(round(s_max / step))
    s = np.arange(-count, count + 1) * step
    return CorrelationSeries(s, np.asarray(func(s), dtype=complex), math.inf, step, None, False)

def _centre(series):
    return (len(series.s) - 1) // 2

def spectral_density(series, window='bartlett', bandwidth=0.05):
    """Blackman-Tukey estimate f(w) = (1/2pi) sum_k w(k) C(k step) e^{-i w k step} step

    Lags beyond 1/bandwidth are cut. On the full DFT frequency grid the
    estimate integrates exactly to C(0).

    """
    if window not in WINDOWS:
        raise WindowUnknown(window)
    if not bandwidth > 0.0:
        raise ValueError("bandwidth must be positive, got %r" % bandwidth)
    step = series.step
    centre = _centre(series)
    keep = min(int(round(1.0 / (bandwidth * step))), centre)
    lags = series.values[centre - keep:centre + keep + 1]
    taper = WINDOWS[window](2 * keep + 3)[1:-1]
    weighted = lags * taper
    size = 1 << int(math.ceil(math.log2(8 * (2 * keep + 1))))
    buf = np.zeros(size, dtype=complex)
    buf[:keep + 1] = weighted[keep:]
    buf[size - keep:] = weighted[:keep]
    spectrum = np.fft.fftshift(np.fft.fft(buf)) * step / (2.0 * math.pi)
    omega = np.fft.fftshift(np.fft.fftfreq(size, d=step)) * 2.0 * math.pi
    density = spectrum.real
    clipped = float(-density[density < 0.0].sum() * 2.0 * math.pi / (size * step))
    density = np.clip(density, 0.0, None)
    mass = float(density.sum() * 2.0 * math.pi / (size * step))
    return SpectralEstimate(omega, density, window, bandwidth, mass, clipped, [])

def cesaro_mean(series, omega, span=None):
    """(1/2S) int_{-S}^{S} C(s) e^{-i omega s} ds by the trapezoidal rule"""
    centre = _centre(series)
    keep = centre if span is None else min(int(round(span / series.step)), centre)
    s = series.s[centre - keep:centre + keep + 1]
    c = series.values[centre - keep:centre + keep + 1]
    weights = np.full(len(s), series.step)
    weights[[0, -1]] *= 0.5
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    phases = np.exp(-1j * np.outer(omega, s))
    return (phases @ (c * weights)) / (2.0 * keep * series.step)

def atom_scan(series, floor=1e-2, kappa=4.0, persistence=1.5):
    """Spectral atoms from the Cesàro means of the modulated correlation

    A frequency is reported when |m_S| is a local maximum above
    max(floor * |C(0)|, kappa * (pi/S) * f(omega)), f a smooth density
    estimate, and |m_{S/2}| / |m_S| stays below ``persistence``: an atom
    keeps its Cesàro mean while an absolutely continuous part halves it when
    S doubles.

    """
    centre = _centre(series)
    span = centre * series.step
    c0 = abs(series.values[centre])
    # m_S on a fine grid: zero-padded FFT of the trapezoid-weighted series
    weights = np.full(2 * centre + 1, series.step)
    weights[[0, -1]] *= 0.5
    size = 1 << int(math.ceil(math.log2(4 * (2 * centre + 1))))
    buf = np.zeros(size, dtype=complex)
    weighted = series.values * weights
    buf[:centre + 1] = weighted[centre:]
    buf[size - centre:] = weighted[:centre]
    means = np.fft.fftshift(np.fft.fft(buf)) / (2.0 * span)
    omega = np.fft.fftshift(np.fft.fftfreq(size, d=series.step)) * 2.0 * math.pi
    smooth = spectral_density(series, 'parzen', bandwidth=20.0 / span)
    background = np.interp(omega, smooth.omega, smooth.density)
    threshold = np.maximum(floor * c0, kappa * math.pi / span * background)
    strength = np.abs(means)
    grid = omega[1] - omega[0]
    # a main lobe dominates its own sidelobes within four lobe widths
    reach = int(math.ceil(8.0 * math.pi / span / grid))
    peaks = (strength > threshold) & (strength >= maximum_filter1d(strength, 2 * reach + 1,
                                                                      mode='wrap'))
    atoms = []
    for j in np.flatnonzero(peaks):
        best = minimize_scalar(lambda w: -abs(cesaro_mean(series, w)[0]),
                               bounds=(omega[j] - grid, omega[j] + grid), method='bounded',
                               options={'xatol': 1e-10})
        w = float(best.x) if -best.fun >= strength[j] else float(omega[j])
        full = abs(cesaro_mean(series, w)[0])
        half = abs(cesaro_mean(series, w, span / 2.0)[0])
        if half / full >= persistence:
            log.debug("peak at %.4f decays like a density (%.2f)", w, half / full)
            continue
        atoms.append(Atom(w, full, full / threshold[j]))
    # a peak centred between two grid points must not be reported twice
    atoms.sort(key=lambda a: a.frequency)
    merged = []
    for atom in atoms:
        if merged and abs(atom.frequency - merged[-1].frequency) < 2 * grid:
            if atom.mass > merged[-1].mass:
                merged[-1] = atom
            continue
        merged.append(atom)
    wiener = float(np.sum(np.abs(series.values) ** 2 * weights) / (2.0 * span))
    return AtomScan(merged, span, wiener)

def block_maxima(series, first=10.0, blocks=6):
    """max |C(s)| over the dyadic blocks [S, 2S], S = first * 2^k"""
    s = series.s
    magnitude = np.abs(series.values)
    out = []
    start = first
    for _ in range(blocks):
        mask = (s >= start) & (s <= 2.0 * start)
        if not mask.any():
            break
        out.append((start, float(magnitude[mask].max())))
        start *= 2.0
    return out

def decay_trend(maxima, noise):
    """Block maxima are non-increasing up to twice the noise level"""
    values = [m for _, m in maxima]
    return all(later <= earlier + 2.0 * noise for earlier, later in zip(values, values[1:]))

def _richardson(f, delta):
    """Central difference of f at 0 with one Richardson step"""
    full = (f(delta) - f(-delta)) / (2.0 * delta)
    half = (f(delta / 2.0) - f(-delta / 2.0)) / delta
    return (4.0 * half - full) / 3.0

def conj_identity_residual(phi, s, x, rho, delta=DEFAULT_STEP, flow=DEFAULT_FLOW):
    """d1 s*(0,s,x) (X_phi phi)(phi_s x) - [(X_f phi)(phi_s x) - X_f(phi o phi_s)(x)]"""
    model = rho.model
    cocycle = Cocycle(x, rho, flow)
    y = model.pack([cocycle.clock.phi(s)])
    xphi = phi.xh(y)[0] / rho.values(y)[0]
    d1 = cocycle.d1(0.0, s, delta).richardson if s != 0.0 else 0.0

    def moved(t):
        return phi(Clock(model.geodesic(cocycle.x, t), rho, flow).phi(s))

    return float(d1 * xphi - (phi.xf(y)[0] - _richardson(moved, delta)))

def xf_expansion_residual(phi, s, x, rho, delta=DEFAULT_STEP, flow=DEFAULT_FLOW):
    """[X_f(phi o phi_{-s})](phi_s x) - X_f phi(x) - (int_0^s u_00(phi_r x) dr) X_phi phi(x)"""
    model = rho.model
    clock = Clock(x, rho, flow)
    here = model.pack([model.reduce(x)])
    sigma = clock.tau(s)
    if rho.constant is None:
        drift = OrbitIntegral(model, x, rho.xf_rho, flow, clock.leaf)(sigma)
    else:
        drift = 0.0
    integral = s * model.log_lam + drift
    y = clock.leaf.point(sigma)

    def moved(t):
        return phi(Clock(model.geodesic(y, t), rho, flow).phi(-s))

    right = phi.xf(here)[0] + integral * phi.xh(here)[0] / rho.values(here)[0]
    return float(_richardson(moved, delta) - right)
