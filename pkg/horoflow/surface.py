"""The compact quotient M = Gamma\\PSL(2,R) of the Bolza surface

Points of M are represented by group elements whose base point lies in the
Dirichlet octagon centred at i. Batches of points are (n, 2, 2) arrays; the
scalar API wraps them in :class:`PhasePoint`.

"""

import collections
import io
import logging
import math

import numpy as np

from horoflow import sl2
from horoflow import util

log = logging.getLogger(__name__)

BOLZA_ALPHA = 1.0 + math.sqrt(2.0)
BOLZA_BETA = math.sqrt(2.0 + 2.0 * math.sqrt(2.0))

DEFAULT_REDUCTION_DEPTH = 200
DETERMINANT_TOLERANCE = 1e-12

# consecutive horocycle anchors along long orbits are this far apart
ORBIT_ANCHOR = 10.0

# points per vectorized bump evaluation
CHUNK = 2048

class NonTermination(RuntimeError): pass

class WidthTooLarge(ValueError): pass

PhasePoint = collections.namedtuple('PhasePoint', 'rep reduced')

def bolza_generators():
    """The eight side pairings of the regular Bolza octagon

    They are written in SU(1,1) as [[alpha, beta e^{ik pi/4}], [conj, alpha]]
    and conjugated into SL(2,R) by the Cayley transform z -> (z-i)/(z+i).

    """
    cayley = np.array([[1.0, -1.0j], [1.0, 1.0j]])
    cayley_inv = np.linalg.inv(cayley)
    generators = []
    for k in range(8):
        phase = np.exp(1j * k * math.pi / 4.0)
        disk = np.array([[BOLZA_ALPHA, BOLZA_BETA * phase],
                         [BOLZA_BETA * np.conj(phase), BOLZA_ALPHA]])
        generators.append(sl2.GroupElement.from_array((cayley_inv @ disk @ cayley).real))
    return generators


class FuchsianGroup(object):
    """Cocompact torsion-free Fuchsian group given by Dirichlet side pairings

    ``generators`` must pair the sides of the Dirichlet domain centred at i, so
    that the greedy descent of :meth:`reduce_array` stops exactly on that
    domain.

    """

    def __init__(self, generators, reduction_depth=DEFAULT_REDUCTION_DEPTH, genus=2):
        generators = list(generators)
        if not generators:
            raise ValueError("a Fuchsian group needs at least one generator")
        for g in generators:
            m = np.asarray(g.array if isinstance(g, sl2.GroupElement) else g, dtype=float)
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            if abs(det - 1.0) > DETERMINANT_TOLERANCE:
                raise ValueError("generator determinant %r is not 1" % det)
        if reduction_depth < 1:
            raise ValueError("reduction_depth must be positive")
        self.generators = tuple(g if isinstance(g, sl2.GroupElement)
                                else sl2.GroupElement.from_array(g) for g in generators)
        self.reduction_depth = int(reduction_depth)
        self.genus = genus
        self.moves = self._close_under_inverse(self.generators)
        self._moves = sl2.as_array(self.moves)
        self._neighbors = {}
        self.systole_trace = min(abs(g.a + g.d) for g in self.moves)
        self.circumradius = self._measure_circumradius()

    @classmethod
    def bolza(cls, reduction_depth=DEFAULT_REDUCTION_DEPTH):
        return cls(bolza_generators(), reduction_depth)

    @classmethod
    def load(cls, path, reduction_depth=DEFAULT_REDUCTION_DEPTH, genus=2, opener=io.open):
        """Read one matrix per line as four decimal fields ``a b c d``"""
        generators = []
        with opener(path, 'r') as f:
            for lineno, line in enumerate(util.line_protocol(f), 1):
                if not line.strip() or line.lstrip().startswith('#'):
                    continue
                fields = line.split()
                if len(fields) != 4:
                    raise ValueError("%s:%d: expected four fields, got %d"
                                     % (path, lineno, len(fields)))
                a, b, c, d = (float(v) for v in fields)
                generators.append(np.array([[a, b], [c, d]]))
        return cls(generators, reduction_depth, genus)

    @staticmethod
    def _close_under_inverse(generators):
        moves = []
        for g in generators:
            for candidate in (g, g.inverse()):
                if all(sl2.distance(candidate, m) > 1e-9 for m in moves):
                    moves.append(candidate)
        return tuple(moves)

    @property
    def area(self):
        """Hyperbolic area of the surface (Gauss-Bonnet)"""
        return 4.0 * math.pi * (self.genus - 1)

    @property
    def volume(self):
        """Haar volume of M with the fiber angle ranging over [0, 2pi)"""
        return 2.0 * math.pi * self.area

    @property
    def max_bump_width(self):
        """Half the injectivity radius in the Frobenius surrogate metric"""
        tr = self.systole_trace
        return 0.25 * math.sqrt(tr * (tr - 2.0))

    def reduce_array(self, m):
        """Greedy descent of ||gamma g||_F over the side pairings

        ||g||_F^2 = 2 cosh d(i, g.i), so each accepted move strictly brings
        the base point closer to the centre of the domain.

        """
        g = sl2.renormalize_many(m).reshape(-1, 2, 2).copy()
        norms = sl2.frobenius_sq_many(g)
        active = np.arange(len(g))
        for _ in range(self.reduction_depth):
            if not len(active):
                return g.reshape(np.shape(m))
            cand = np.einsum('mij,njk->nmik', self._moves, g[active])
            cnorm = sl2.frobenius_sq_many(cand)
            best = np.argmin(cnorm, axis=1)
            rows = np.arange(len(active))
            bnorm = cnorm[rows, best]
            improve = bnorm < norms[active] * (1.0 - 1e-13)
            idx = active[improve]
            g[idx] = sl2.renormalize_many(cand[rows[improve], best[improve]])
            norms[idx] = bnorm[improve]
            active = idx
        if len(active):
            raise NonTermination("reduction did not terminate within %d steps for %d point(s)"
                                 % (self.reduction_depth, len(active)))
        return g.reshape(np.shape(m))

    def reduce(self, g):
        if isinstance(g, PhasePoint):
            g = g.rep
        out = self.reduce_array(np.array([[g.a, g.b], [g.c, g.d]]))
        return PhasePoint(sl2.GroupElement.from_array(out), True)

    def contains_array(self, m, slack=1e-9):
        m = np.asarray(m, dtype=float).reshape(-1, 2, 2)
        norms = sl2.frobenius_sq_many(m)
        cand = sl2.frobenius_sq_many(np.einsum('kij,njl->nkil', self._moves, m))
        return np.all(cand >= norms[:, None] * (1.0 - slack), axis=1)

    def contains(self, g):
        """Is the base point of g in the closed Dirichlet domain"""
        if isinstance(g, PhasePoint):
            g = g.rep
        return bool(self.contains_array(g.array)[0])

    def _measure_circumradius(self, rays=720):
        """Hyperbolic distance from i to the farthest vertex of the domain"""
        angle = np.linspace(0.0, 2.0 * math.pi, rays, endpoint=False)
        lo, hi = np.zeros(rays), np.full(rays, 0.999)
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            inside = self.contains_array(_disk_elements(mid * np.exp(1j * angle)), slack=0.0)
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        return 2.0 * math.atanh(float(hi.max()))

    def neighbors(self, radius):
        """Group elements gamma with d(i, gamma.i) <= radius, identity first"""
        key = round(radius, 9)
        if key in self._neighbors:
            return self._neighbors[key]
        bound = 2.0 * math.cosh(radius)
        # words reaching the ball pass through tiles within one circumradius
        prune = 2.0 * math.cosh(radius + self.circumradius + 0.5)
        identity = np.eye(2)[None]
        seen = {_element_key(identity[0])}
        found = [identity[0]]
        frontier = identity
        while len(frontier):
            cand = sl2.renormalize_many(np.einsum('mij,njk->nmik', self._moves, frontier)
                                        .reshape(-1, 2, 2))
            cand = cand[sl2.frobenius_sq_many(cand) <= prune]
            fresh = []
            for m in cand:
                k = _element_key(m)
                if k not in seen:
                    seen.add(k)
                    fresh.append(m)
            frontier = np.array(fresh).reshape(-1, 2, 2)
            found.extend(fresh)
        found = np.array(found)
        found = found[sl2.frobenius_sq_many(found) <= bound * (1.0 + 1e-12)]
        order = np.argsort(sl2.frobenius_sq_many(found), kind='stable')
        result = found[order]
        log.debug("%d group elements within displacement %.3f", len(result), radius)
        self._neighbors[key] = result
        return result


def _element_key(m):
    return tuple(np.round(m, 7).ravel().tolist())

def _disk_elements(w):
    """Group elements with fiber angle 0 over points w of the unit disk"""
    z = 1j * (1.0 + w) / (1.0 - w)
    return sl2.from_iwasawa_many(z.real, z.imag, 0.0)


_bolza = None

def bolza():
    """Shared Bolza group instance"""
    global _bolza
    if _bolza is None:
        _bolza = FuchsianGroup.bolza()
    return _bolza

def reduce(g, group=None):
    return (group or bolza()).reduce(g)

def sample_liouville(n, seed, group=None):
    return Surface(group).sample(n, seed)

def invariant_bump(center, width, group=None):
    return Surface(group).bump(center, width)


class Observable(object):
    """Real function on phase space

    ``values``, ``xf`` and ``xh`` take a packed batch of points and return one
    float per point; ``xf`` and ``xh`` are the derivatives along the geodesic
    and the (unit speed) horocycle generator. A C0 observable carries no
    derivatives.

    """

    def __init__(self, values, xf=None, xh=None, name='observable', pack=None):
        self._values = values
        self._xf = xf
        self._xh = xh
        self.name = name
        self.pack = pack

    @property
    def grade(self):
        return 'C1' if self._xf is not None and self._xh is not None else 'C0'

    def values(self, points):
        return np.asarray(self._values(points), dtype=float)

    def xf(self, points):
        if self._xf is None:
            raise ValueError("%s carries no derivative along the geodesic flow" % self.name)
        return np.asarray(self._xf(points), dtype=float)

    def xh(self, points):
        if self._xh is None:
            raise ValueError("%s carries no derivative along the horocycle flow" % self.name)
        return np.asarray(self._xh(points), dtype=float)

    def __call__(self, point):
        """Value at a single point, or at a packed batch"""
        if self.pack is None or isinstance(point, np.ndarray):
            return self.values(point)
        return float(self.values(self.pack([point]))[0])

    @classmethod
    def constant(cls, value, pack=None):
        value = float(value)
        full = lambda p: np.full(len(p), value)
        zero = lambda p: np.zeros(len(p))
        return cls(full, zero, zero, name='constant(%g)' % value, pack=pack)

    def _combine(self, other, op, name):
        if not isinstance(other, Observable):
            other = Observable.constant(other)
        pair = lambda a, b: None if a is None or b is None else (lambda p: op(a(p), b(p)))
        return Observable(pair(self._values, other._values), pair(self._xf, other._xf),
                          pair(self._xh, other._xh), name=name % (self.name, other.name),
                          pack=self.pack or other.pack)

    def __add__(self, other):
        return self._combine(other, np.add, '(%s + %s)')

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract, '(%s - %s)')

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self * -1.0

    def __mul__(self, scalar):
        if isinstance(scalar, Observable):
            return NotImplemented
        scalar = float(scalar)
        scale = lambda a: None if a is None else (lambda p: scalar * a(p))
        return Observable(scale(self._values), scale(self._xf), scale(self._xh),
                          name='%g*%s' % (scalar, self.name), pack=self.pack)

    __rmul__ = __mul__

    def centered(self, mean):
        """The observable minus a (known or estimated) mean"""
        return self - mean

    def __repr__(self):
        return '<Observable %s %s>' % (self.name, self.grade)


def smooth_bump(q):
    """exp(1 - 1/(1-q)) on q < 1, zero elsewhere, with its q-derivative"""
    q = np.asarray(q, dtype=float)
    inside = q < 1.0
    gap = np.where(inside, 1.0 - q, 1.0)
    value = np.where(inside, np.exp(1.0 - 1.0 / gap), 0.0)
    return value, -value / gap ** 2

def support_radius(width):
    """Hyperbolic displacement bound of ||h - I||_F <= width"""
    return math.acosh(0.5 * (math.sqrt(2.0) + width) ** 2)


class InvariantBump(object):
    """Poincaré sum of a smooth bump of Frobenius radius ``width``

    Only the translates that can reach the fundamental domain are summed, so
    on reduced representatives the finite sum is the full lattice sum.

    """

    def __init__(self, surface, center, width):
        group = surface.group
        if not width > 0.0:
            raise ValueError("bump width must be positive, got %r" % width)
        if width >= group.max_bump_width:
            raise WidthTooLarge("width %r reaches the injectivity bound %.4f"
                                % (width, group.max_bump_width))
        self.surface = surface
        self.center = surface.reduce(center).rep
        self.width = float(width)
        reach = (group.circumradius + support_radius(width)
                 + math.acosh(max(sl2.frobenius_sq(self.center) / 2.0, 1.0)))
        gammas = group.neighbors(reach)
        # h = c^{-1} gamma g
        self._p = np.einsum('ij,mjk->mik', sl2.inverse(self.center).array, gammas)
        log.debug("bump of width %.3f sums %d translates", width, len(gammas))

    def _evaluate(self, points, generator):
        points = np.asarray(points, dtype=float).reshape(-1, 2, 2)
        w2 = self.width ** 2
        out = np.zeros(len(points))
        for start in range(0, len(points), CHUNK):
            block = points[start:start + CHUNK]
            h = np.einsum('mij,njk->nmik', self._p, block)
            sign = np.where(h[..., 0, 0] + h[..., 1, 1] < 0.0, -1.0, 1.0)
            h = h * sign[..., None, None]
            dev = h - np.eye(2)
            q = np.einsum('...ij,...ij->...', dev, dev) / w2
            value, slope = smooth_bump(q)
            if generator is None:
                out[start:start + CHUNK] = value.sum(axis=1)
            else:
                dq = 2.0 * np.einsum('...ij,...ij->...', dev, h @ generator) / w2
                out[start:start + CHUNK] = (slope * dq).sum(axis=1)
        return out

    def values(self, points):
        return self._evaluate(points, None)

    def xf(self, points):
        return self._evaluate(points, sl2.GEODESIC_GENERATOR)

    def xh(self, points):
        return self._evaluate(points, sl2.HOROCYCLE_GENERATOR)

    def observable(self):
        return Observable(self.values, self.xf, self.xh, name='bump(w=%g)' % self.width,
                          pack=self.surface.pack)


def bump_integral(width, nodes=64):
    """Haar integral of the bump of Frobenius radius ``width`` over PSL(2,R)

    Tensor Gauss-Legendre in Iwasawa coordinates h = n_x a_{e^eta} k_theta,
    where the Haar measure is dx e^{-eta} d eta d theta.

    """
    r = support_radius(width)
    x_max = math.sinh(r)
    theta_max = 2.0 * math.atan(width / (1.0 - width)) if width < 1.0 else math.pi
    t, wt = np.polynomial.legendre.leggauss(nodes)
    xs, wx = x_max * t, x_max * wt
    es, we = r * t, r * wt
    ths, wth = theta_max * t, theta_max * wt
    X, E, TH = np.meshgrid(xs, es, ths, indexing='ij')
    h = sl2.from_iwasawa_many(X, np.exp(E), TH)
    trace = h[..., 0, 0] + h[..., 1, 1]
    dev = h - np.sign(np.where(trace == 0.0, 1.0, trace))[..., None, None] * np.eye(2)
    value, _ = smooth_bump(np.einsum('...ij,...ij->...', dev, dev) / width ** 2)
    weights = wx[:, None, None] * (we * np.exp(-es))[None, :, None] * wth[None, None, :]
    return float(np.sum(value * weights))


class Surface(object):
    """Bolza quotient with the geodesic and uniformly expanding horocycle flows"""
    name = 'bolza'
    minimal = True
    lam = math.e
    log_lam = 1.0

    def __init__(self, group=None):
        self.group = group or bolza()

    def reduce(self, p):
        return self.group.reduce(p)

    def geodesic(self, p, t):
        g = p.rep if isinstance(p, PhasePoint) else p
        return self.reduce(sl2.geodesic_step(g, t))

    def horocycle(self, p, sigma):
        if not math.isfinite(sigma):
            raise ValueError("horocycle parameter must be finite, got %r" % sigma)
        return self.leaf(p).point(sigma)

    def pack(self, points):
        return sl2.as_array([p.rep if isinstance(p, PhasePoint) else p for p in points])

    def unpack(self, arr):
        return [PhasePoint(sl2.GroupElement.from_array(m), True) for m in arr]

    def geodesic_many(self, arr, t):
        t = np.broadcast_to(np.asarray(t, dtype=float), (len(arr),))
        return self.group.reduce_array(np.asarray(arr) @ sl2.geodesic_matrix(t))

    def horocycle_many(self, arr, sigma):
        sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (len(arr),))
        return self.group.reduce_array(np.asarray(arr) @ sl2.horocycle_matrix(sigma))

    def leaf(self, p, spacing=ORBIT_ANCHOR):
        return Leaf(self, p, spacing)

    def orbit(self, p, sigmas, spacing=ORBIT_ANCHOR):
        """Reduced points of the horocycle orbit of p at the given times"""
        return self.leaf(p, spacing).points(sigmas)

    def distance(self, p, q):
        """Frobenius surrogate distance between the Gamma-orbits of p and q"""
        g = self.reduce(p).rep.array
        h = self.reduce(q).rep.array
        gammas = self.group.neighbors(2.0 * self.group.circumradius + 0.1)
        m = np.einsum('ij,mjk,kl->mil', sl2.inverse_many(g), gammas, h)
        eye = np.eye(2)
        minus = sl2.frobenius_sq_many(m - eye)
        plus = sl2.frobenius_sq_many(m + eye)
        return float(math.sqrt(min(minus.min(), plus.min())))

    def sample_array(self, n, seed):
        """Reduced i.i.d. draws from the normalized Haar measure

        Base points are drawn from the hyperbolic area of the disk of the
        domain's circumradius and rejected outside the domain; the fiber
        angle is uniform.

        """
        rng = np.random.default_rng(seed)
        if n <= 0:
            return np.zeros((0, 2, 2))
        rd = math.tanh(0.5 * self.group.circumradius)
        c = rd ** 2 / (1.0 - rd ** 2)
        batches, have = [], 0
        while have < n:
            size = max(2 * (n - have), 64)
            u = c * rng.random(size)
            r = np.sqrt(u / (1.0 + u))
            phi = 2.0 * math.pi * rng.random(size)
            theta = 2.0 * math.pi * rng.random(size)
            z = 1j * (1.0 + r * np.exp(1j * phi)) / (1.0 - r * np.exp(1j * phi))
            g = sl2.from_iwasawa_many(z.real, z.imag, theta)
            g = sl2.renormalize_many(g[self.group.contains_array(g, slack=0.0)])
            batches.append(g)
            have += len(g)
        return np.concatenate(batches)[:n]

    def sample(self, n, seed):
        return self.unpack(self.sample_array(n, seed))

    def bump(self, center, width):
        if not isinstance(center, PhasePoint):
            center = PhasePoint(center, False)
        return InvariantBump(self, center, width).observable()

    def constant(self, value):
        return Observable.constant(value, pack=self.pack)

    def bump_mean(self, width):
        """Integral of a width-``width`` bump against the normalized Haar measure"""
        return bump_integral(width) / self.group.volume

    def __repr__(self):
        return '<Surface %s genus=%d>' % (self.name, self.group.genus)


class Leaf(object):
    """Horocycle orbit of one point

    Anchors at times k*spacing are produced from their neighbour by a short
    step followed by reduction, so matrix entries stay of order one however
    far along the orbit a query goes. Anchors are kept once reached.

    """

    def __init__(self, surface, p, spacing=ORBIT_ANCHOR):
        g = p.rep.array if isinstance(p, PhasePoint) else np.asarray(p, dtype=float)
        self.surface = surface
        self.spacing = float(spacing)
        self._anchors = {0: surface.group.reduce_array(g)}
        self._first = self._last = 0
        self._forward = sl2.horocycle_matrix(self.spacing)
        self._backward = sl2.horocycle_matrix(-self.spacing)

    def _reach(self, first, last):
        reduce_array = self.surface.group.reduce_array
        while self._last < last:
            self._anchors[self._last + 1] = reduce_array(self._anchors[self._last] @ self._forward)
            self._last += 1
        while self._first > first:
            self._anchors[self._first - 1] = reduce_array(self._anchors[self._first] @ self._backward)
            self._first -= 1

    def points(self, sigmas):
        sigmas = np.asarray(sigmas, dtype=float).ravel()
        if not len(sigmas):
            return np.zeros((0, 2, 2))
        if not np.all(np.isfinite(sigmas)):
            raise ValueError("horocycle times must be finite")
        k = np.floor(sigmas / self.spacing).astype(np.int64)
        self._reach(int(k.min()), int(k.max()))
        base = np.array([self._anchors[j] for j in k.tolist()])
        return self.surface.group.reduce_array(
            base @ sl2.horocycle_matrix(sigmas - k * self.spacing))

    def point(self, sigma):
        return self.surface.unpack(self.points([sigma]))[0]
