"""Suspension of the cat map with constant roof

The flow f_t moves the height coordinate and applies A = [[2,1],[1,1]] on
every crossing of the roof; the unstable line flow translates each torus
slice along the expanding eigendirection of A at speed lam^{-height}. Every
torus slice is invariant under that flow, so the model is not minimal. It is
an exact oracle for the cocycle machinery, nothing more.

"""

import collections
import math

import numpy as np

from horoflow.surface import Observable

CAT = np.array([[2, 1], [1, 1]], dtype=np.int64)
CAT_INVERSE = np.array([[1, -1], [-1, 2]], dtype=np.int64)

LAMBDA = (3.0 + math.sqrt(5.0)) / 2.0
LOG_LAMBDA = math.log(LAMBDA)

_v = np.array([1.0, LAMBDA - 2.0])
UNSTABLE = _v / np.linalg.norm(_v)

SuspensionPoint = collections.namedtuple('SuspensionPoint', 'x1 x2 theta')

def _wrap(arr):
    """Bring heights into [0, 1) by roof crossings and torus coordinates into [0, 1)"""
    arr = np.array(arr, dtype=float).reshape(-1, 3)
    crossings = np.floor(arr[:, 2]).astype(np.int64)
    arr[:, 2] -= crossings
    xy = arr[:, :2] % 1.0
    for matrix, sign in ((CAT, 1), (CAT_INVERSE, -1)):
        remaining = np.where(sign * crossings > 0, np.abs(crossings), 0)
        while remaining.any():
            moving = remaining > 0
            xy[moving] = (xy[moving] @ matrix.T) % 1.0
            remaining[moving] -= 1
    arr[:, :2] = xy
    # a coordinate can round up to exactly 1.0
    arr[arr >= 1.0] = 0.0
    return arr

def susp_f(p, t):
    if not math.isfinite(t):
        raise ValueError("time must be finite, got %r" % t)
    return SuspensionPoint(*_wrap([p.x1, p.x2, p.theta + t])[0])

def susp_wu(p, s):
    if not math.isfinite(s):
        raise ValueError("unstable parameter must be finite, got %r" % s)
    scale = s * LAMBDA ** -p.theta
    return SuspensionPoint((p.x1 + scale * UNSTABLE[0]) % 1.0,
                           (p.x2 + scale * UNSTABLE[1]) % 1.0, p.theta)


class Suspension(object):
    """Model interface of the suspension flow, mirroring :class:`~horoflow.surface.Surface`"""
    name = 'suspension'
    minimal = False
    lam = LAMBDA
    log_lam = LOG_LAMBDA

    def reduce(self, p):
        return SuspensionPoint(*_wrap(list(p))[0])

    def geodesic(self, p, t):
        return susp_f(p, t)

    def horocycle(self, p, sigma):
        return susp_wu(p, sigma)

    def pack(self, points):
        return np.array([list(p) for p in points], dtype=float).reshape(-1, 3)

    def unpack(self, arr):
        return [SuspensionPoint(*row) for row in np.asarray(arr, dtype=float).tolist()]

    def geodesic_many(self, arr, t):
        arr = np.array(arr, dtype=float).reshape(-1, 3)
        arr[:, 2] += t
        return _wrap(arr)

    def horocycle_many(self, arr, sigma):
        arr = np.array(arr, dtype=float).reshape(-1, 3)
        scale = np.asarray(sigma, dtype=float) * LAMBDA ** -arr[:, 2]
        arr[:, :2] = (arr[:, :2] + scale[:, None] * UNSTABLE) % 1.0
        return arr

    def leaf(self, p, spacing=None):
        return SuspensionLeaf(self, p)

    def orbit(self, p, sigmas, spacing=None):
        return self.leaf(p).points(sigmas)

    def distance(self, p, q):
        """Flat distance, allowing the comparison across the roof"""
        a, b = np.array(list(p)), np.array(list(q))
        best = np.inf
        for shift, matrix in ((0, None), (1, CAT_INVERSE), (-1, CAT)):
            xy = b[:2] if matrix is None else (matrix @ b[:2]) % 1.0
            dxy = (a[:2] - xy + 0.5) % 1.0 - 0.5
            dtheta = a[2] - (b[2] + shift)
            best = min(best, math.sqrt(float(dxy @ dxy) + dtheta ** 2))
        return best

    def sample_array(self, n, seed):
        """Lebesgue measure on the unit cube, which both flows preserve"""
        rng = np.random.default_rng(seed)
        if n <= 0:
            return np.zeros((0, 3))
        return rng.random((n, 3))

    def sample(self, n, seed):
        return self.unpack(self.sample_array(n, seed))

    def constant(self, value):
        return Observable.constant(value, pack=self.pack)

    def slice_observable(self, k=(1, 0), phase=0.0):
        """sin^4(pi theta) cos(2 pi k.x + phase)

        The height profile vanishes to fourth order at the roof, so the
        function is C^3 across the identification (x, 1) ~ (Ax, 0).

        """
        k = np.asarray(k, dtype=float)

        def angle(arr):
            return 2.0 * math.pi * (arr[:, :2] @ k) + phase

        def values(arr):
            arr = np.asarray(arr, dtype=float).reshape(-1, 3)
            return np.sin(math.pi * arr[:, 2]) ** 4 * np.cos(angle(arr))

        def xf(arr):
            arr = np.asarray(arr, dtype=float).reshape(-1, 3)
            th = math.pi * arr[:, 2]
            return 4.0 * math.pi * np.sin(th) ** 3 * np.cos(th) * np.cos(angle(arr))

        def xh(arr):
            arr = np.asarray(arr, dtype=float).reshape(-1, 3)
            slope = -2.0 * math.pi * float(k @ UNSTABLE) * np.sin(angle(arr))
            return np.sin(math.pi * arr[:, 2]) ** 4 * LAMBDA ** -arr[:, 2] * slope

        return Observable(values, xf, xh, name='slice(k=%s)' % (tuple(k.tolist()),),
                          pack=self.pack)

    def __repr__(self):
        return '<Suspension lam=%.10f>' % self.lam


class SuspensionLeaf(object):
    """Unstable line through p, in closed form"""

    def __init__(self, model, p):
        self.model = model
        self._origin = model.pack([p])

    def points(self, sigmas):
        sigmas = np.asarray(sigmas, dtype=float).ravel()
        return self.model.horocycle_many(np.repeat(self._origin, len(sigmas), axis=0), sigmas)

    def point(self, sigma):
        return self.model.unpack(self.points([sigma]))[0]
