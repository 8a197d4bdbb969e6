"""PSL(2,R) arithmetic

Group elements are 2x2 real unimodular matrices modulo sign. The geodesic flow
and the horocycle flow act by right translation, the lattice acts on the left.

"""

import collections
import math

import numpy as np

# e^{t/2} overflows a double near t = 1418
OVERFLOW_TIME = 1400.0

GEODESIC_GENERATOR = np.array([[0.5, 0.0], [0.0, -0.5]])
HOROCYCLE_GENERATOR = np.array([[0.0, 0.0], [1.0, 0.0]])

class FlowOverflow(OverflowError): pass

_Entries = collections.namedtuple('_Entries', 'a b c d')

class GroupElement(_Entries):
    """Immutable point of PSL(2,R)

    Construction rescales the matrix to determinant one and fixes the
    projective sign so that the first nonzero entry (row-major) is
    non-negative. Two elements that differ by a sign therefore have the same
    entries, which keeps equality and :func:`distance` meaningful on PSL.

    """
    __slots__ = ()

    def __new__(cls, a, b, c, d):
        det = a * d - b * c
        if not det > 0.0:
            raise ValueError("matrix must have positive determinant, got %r" % det)
        r = math.sqrt(det)
        a, b, c, d = a / r, b / r, c / r, d / r
        for entry in (a, b, c, d):
            if entry != 0.0:
                if entry < 0.0:
                    a, b, c, d = -a, -b, -c, -d
                break
        return super(GroupElement, cls).__new__(cls, a, b, c, d)

    @classmethod
    def from_array(cls, m):
        return cls(float(m[0][0]), float(m[0][1]), float(m[1][0]), float(m[1][1]))

    @property
    def array(self):
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def inverse(self):
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other):
        return compose(self, other)

    def __repr__(self):
        return "GroupElement(%r, %r, %r, %r)" % tuple(self)

identity = GroupElement(1.0, 0.0, 0.0, 1.0)

def diag(x, y):
    return GroupElement(x, 0.0, 0.0, y)

def compose(g, h):
    """Matrix product g·h, renormalized"""
    return GroupElement(g.a * h.a + g.b * h.c, g.a * h.b + g.b * h.d,
                        g.c * h.a + g.d * h.c, g.c * h.b + g.d * h.d)

def inverse(g):
    return g.inverse()

def _check_time(t):
    if not math.isfinite(t):
        raise ValueError("time must be finite, got %r" % t)
    if abs(t) > OVERFLOW_TIME:
        raise FlowOverflow("geodesic time %r beyond the overflow guard %r" % (t, OVERFLOW_TIME))

def geodesic_step(g, t):
    """Geodesic flow f_t: right translation by diag(e^{t/2}, e^{-t/2})"""
    _check_time(t)
    e = math.exp(0.5 * t)
    return GroupElement(g.a * e, g.b / e, g.c * e, g.d / e)

def horocycle_step(g, s):
    """Uniformly expanding horocycle flow: right translation by [[1,0],[s,1]]

    With this unipotent, geodesic_step(horocycle_step(g, s), t) equals
    horocycle_step(geodesic_step(g, t), e^t s): the orbits are the unstable
    manifolds of the geodesic flow.

    """
    if not math.isfinite(s):
        raise ValueError("horocycle parameter must be finite, got %r" % s)
    return GroupElement(g.a + s * g.b, g.b, g.c + s * g.d, g.d)

def distance(g, h):
    """Frobenius surrogate distance on PSL(2,R)

    min over the sign of ||g^{-1}h -+ I||_F. It is left-invariant, symmetric
    and vanishes only on g = +-h.

    """
    m = compose(inverse(g), h)
    minus = (m.a - 1.0) ** 2 + m.b ** 2 + m.c ** 2 + (m.d - 1.0) ** 2
    plus = (m.a + 1.0) ** 2 + m.b ** 2 + m.c ** 2 + (m.d + 1.0) ** 2
    return math.sqrt(min(minus, plus))

def frobenius_sq(g):
    return g.a ** 2 + g.b ** 2 + g.c ** 2 + g.d ** 2

def base_point(g):
    """Möbius image g·i in the upper half-plane"""
    den = g.c ** 2 + g.d ** 2
    return complex((g.a * g.c + g.b * g.d) / den, 1.0 / den)

def disk_radius(g):
    """Euclidean radius of the base point in the Poincaré disk

    Uses ||g||_F^2 = 2 cosh d(i, g·i) so that tanh(d/2)^2 is a rational
    function of the Frobenius norm.

    """
    n = frobenius_sq(g)
    return math.sqrt(max(n - 2.0, 0.0) / (n + 2.0))

def iwasawa(g):
    """Coordinates (x, y, theta) with g = n_x a_y k_theta, theta in [0, 2pi)"""
    z = base_point(g)
    x, y = z.real, z.imag
    ry = math.sqrt(y)
    phi = math.atan2(g.c * ry, (g.a - x * g.c) / ry)
    return x, y, (2.0 * phi) % (2.0 * math.pi)

def from_iwasawa(x, y, theta):
    ry = math.sqrt(y)
    cs, sn = math.cos(0.5 * theta), math.sin(0.5 * theta)
    # [[sqrt y, x/sqrt y],[0, 1/sqrt y]] . [[cos, -sin],[sin, cos]]
    return GroupElement(ry * cs + x * sn / ry, -ry * sn + x * cs / ry, sn / ry, cs / ry)

# Batch helpers. Arrays have shape (..., 2, 2).

def as_array(elements):
    return np.array([[[g.a, g.b], [g.c, g.d]] for g in elements], dtype=float).reshape(-1, 2, 2)

def geodesic_matrix(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > OVERFLOW_TIME):
        raise FlowOverflow("geodesic time beyond the overflow guard %r" % OVERFLOW_TIME)
    m = np.zeros(t.shape + (2, 2))
    m[..., 0, 0] = np.exp(0.5 * t)
    m[..., 1, 1] = np.exp(-0.5 * t)
    return m

def horocycle_matrix(s):
    s = np.asarray(s, dtype=float)
    m = np.zeros(s.shape + (2, 2))
    m[..., 0, 0] = 1.0
    m[..., 1, 0] = s
    m[..., 1, 1] = 1.0
    return m

def renormalize_many(m):
    """Rescale a batch to determinant one and apply the sign convention"""
    m = np.asarray(m, dtype=float)
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    m = m / np.sqrt(det)[..., None, None]
    flat = m.reshape(m.shape[:-2] + (4,))
    first = np.argmax(flat != 0.0, axis=-1)
    lead = np.take_along_axis(flat, first[..., None], axis=-1)[..., 0]
    sign = np.where(lead < 0.0, -1.0, 1.0)
    return m * sign[..., None, None]

def frobenius_sq_many(m):
    return np.einsum('...ij,...ij->...', m, m)

def inverse_many(m):
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    out[..., 1, 1] = m[..., 0, 0]
    return out

def from_iwasawa_many(x, y, theta):
    x, y, theta = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float),
                                      np.asarray(theta, float))
    ry = np.sqrt(y)
    cs, sn = np.cos(0.5 * theta), np.sin(0.5 * theta)
    m = np.empty(x.shape + (2, 2))
    m[..., 0, 0] = ry * cs + x * sn / ry
    m[..., 0, 1] = -ry * sn + x * cs / ry
    m[..., 1, 0] = sn / ry
    m[..., 1, 1] = cs / ry
    return m
