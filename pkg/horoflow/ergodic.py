"""Time averages along the time-changed flow

Averages over phi-time are computed in the orbit time of the unperturbed
flow: ds = rho d sigma, so

    int_0^T F(phi_s x) ds = int_0^{tau(x,T)} (F rho)(phit_sigma x) d sigma,

which is evaluated with the composite Gauss quadrature of
:class:`~horoflow.timechange.OrbitIntegral`.

"""

import collections
import logging
import math

import numpy as np

from horoflow.timechange import Clock, OrbitIntegral, DEFAULT_FLOW

log = logging.getLogger(__name__)

# integrand evaluations one average may cost
MAX_EVALUATIONS = 1e8

class BudgetExceeded(RuntimeError): pass

BirkhoffResult = collections.namedtuple('BirkhoffResult', 'value horizon step start variance')

MourreCertificate = collections.namedtuple(
    'MourreCertificate', 'interval t a_I sup_dev sup_xphi_ct deficit a_effective passed')

def check_budget(horizon, step):
    if not step > 0.0:
        raise ValueError("step must be positive, got %r" % step)
    if not horizon >= step:
        raise ValueError("horizon %r shorter than the step %r" % (horizon, step))
    if horizon / step > MAX_EVALUATIONS:
        raise BudgetExceeded("horizon %g with step %g needs %.2e evaluations"
                             % (horizon, step, horizon / step))

def birkhoff(F, x, horizon, step, rho, flow=DEFAULT_FLOW):
    """(1/T) int_0^T F(phi_s x) ds"""
    check_budget(horizon, step)
    # node spacing of the panels matches the requested step
    flow = flow._replace(h=min(flow.h, flow.nodes * step))
    clock = Clock(x, rho, flow)
    integral = OrbitIntegral(rho.model, x, lambda p: F.values(p) * rho.values(p), flow, clock.leaf)
    value = integral(clock.tau(horizon)) / horizon
    return BirkhoffResult(value, horizon, step, x, 0.0)

def birkhoff_ensemble(F, starts, horizon, step, rho, flow=DEFAULT_FLOW, mapper=map):
    """Birkhoff averages from several starts; value is their mean"""
    values = np.array(list(mapper(lambda x: birkhoff(F, x, horizon, step, rho, flow).value,
                                  starts)))
    variance = float(values.var(ddof=1)) if len(values) > 1 else 0.0
    log.debug("Birkhoff ensemble T=%g: mean %.6g variance %.3g", horizon, values.mean(), variance)
    return BirkhoffResult(float(values.mean()), horizon, step, starts[0], variance), values

def c_t_field(t, x, rho, flow=DEFAULT_FLOW):
    """(1/t) int_0^t u_00(phi_s x) ds

    With u_00 = ln(lam) + X_f rho / rho this is
    ln(lam) + (1/t) int_0^{tau(x,t)} X_f rho(phit_sigma x) d sigma.

    """
    if not t > 0.0:
        raise ValueError("t must be positive, got %r" % t)
    if rho.constant is not None:
        return rho.model.log_lam
    clock = Clock(x, rho, flow)
    integral = OrbitIntegral(rho.model, x, rho.xf_rho, flow, clock.leaf)
    return rho.model.log_lam + integral(clock.tau(t)) / t

def xphi_c_t(t, x, rho, flow=DEFAULT_FLOW):
    """X_phi c_t = (u_00(phi_t x) - u_00(x)) / t"""
    if not t > 0.0:
        raise ValueError("t must be positive, got %r" % t)
    model = rho.model
    here = model.pack([model.reduce(x)])
    there = model.pack([Clock(x, rho, flow).phi(t)])
    return float((rho.u00(there)[0] - rho.u00(here)[0]) / t)

def xphi_c_t_fd(t, x, rho, delta=1e-4, flow=DEFAULT_FLOW):
    """Central difference of c_t along the phi orbit"""
    clock = Clock(x, rho, flow)
    ahead, behind = clock.phi(delta), clock.phi(-delta)
    return (c_t_field(t, ahead, rho, flow) - c_t_field(t, behind, rho, flow)) / (2.0 * delta)

def mourre_certificate(interval, t, rho, sample, flow=DEFAULT_FLOW, mapper=map):
    """Sufficient scalar certificate for a positive commutator on ``interval``

    a_I = 2 ln(lam)^2 e1 and the deficit
    2 ln(lam) e2 sup|c_t - ln(lam)| + ln(lam) sup|X_phi c_t|
    bounds what replacing c_t by ln(lam) costs; the certificate passes when
    a_I exceeds the deficit.

    """
    e1, e2 = interval
    if not 0.0 < e1 < e2:
        raise ValueError("interval must satisfy 0 < e1 < e2, got %r" % (interval,))
    if not t > 0.0:
        raise ValueError("t must be positive, got %r" % t)
    log_lam = rho.model.log_lam

    def deviations(x):
        return c_t_field(t, x, rho, flow) - log_lam, xphi_c_t(t, x, rho, flow)

    pairs = np.array(list(mapper(deviations, sample))).reshape(-1, 2)
    sup_dev = float(np.max(np.abs(pairs[:, 0]))) if len(pairs) else 0.0
    sup_xphi = float(np.max(np.abs(pairs[:, 1]))) if len(pairs) else 0.0
    a_I = 2.0 * log_lam ** 2 * e1
    deficit = 2.0 * log_lam * e2 * sup_dev + log_lam * sup_xphi
    a_effective = a_I - deficit
    log.info("Mourre t=%g: a_I=%.6g deficit=%.3g", t, a_I, deficit)
    return MourreCertificate((e1, e2), t, a_I, sup_dev, sup_xphi, deficit, a_effective,
                             a_effective > 0.0)

def certificate_report(certificate):
    """JSON-ready dictionary of a certificate"""
    report = certificate._asdict()
    report['interval'] = list(certificate.interval)
    report['pass'] = bool(report.pop('passed'))
    return report

def ensemble_mean_u00(rho, points):
    """mu-average of u_00 from Haar samples, with its standard error"""
    r = rho.values(points)
    terms = rho.u00(points) * r / r.mean()
    return float(terms.mean()), float(terms.std(ddof=1) / math.sqrt(len(terms)))
