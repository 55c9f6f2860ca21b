"""The maps h_{K,theta} and H_{K,theta,c} = P_c o h_{K,theta}.

Points of the plane are Python ``complex`` numbers. Real derivatives are
2x2 ``numpy`` arrays acting on column vectors ``(x, y)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

#: ``H_apply`` refuses to square anything with ``|h(z)|**2`` above this.
OVERFLOW_GUARD = 1e150


class MapOverflowError(OverflowError):
    """Raised when an evaluation would leave the safe double-precision range."""


def normalize_theta(theta: float) -> float:
    """Reduce an angle mod pi into (-pi/2, pi/2]."""
    t = math.fmod(theta, math.pi)
    if t > math.pi / 2:
        t -= math.pi
    elif t <= -math.pi / 2:
        t += math.pi
    return t


@dataclass(frozen=True)
class MapParams:
    """Parameters ``(K, theta, c)`` of one map ``H_{K,theta,c}``."""

    K: float
    theta: float = 0.0
    c: complex = 0j

    def __post_init__(self):
        K = float(self.K)
        theta = float(self.theta)
        c = complex(self.c)
        if not (math.isfinite(K) and K > 0):
            raise ValueError(f"K must be finite and positive, got {self.K!r}")
        if not (-math.pi / 2 < theta <= math.pi / 2):
            raise ValueError(f"theta must lie in (-pi/2, pi/2], got {self.theta!r}")
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError(f"c must be finite, got {self.c!r}")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "c", c)

    @property
    def stretch_matrix(self) -> np.ndarray:
        return stretch_matrix(self.K, self.theta)

    def conjugated(self) -> tuple["MapParams", float]:
        """Return ``(q, s)`` with ``K(q) >= 1`` and ``H_p = S^-1 o H_q o S``, ``S(z) = s z``.

        A stretch by ``K < 1`` along ``e^{i theta}`` is ``K`` times the
        stretch by ``1/K`` along ``e^{i(theta + pi/2)}``, so the scaling
        ``z -> K**2 z`` conjugates ``H_{K,theta,c}`` to
        ``H_{1/K, theta + pi/2, K**2 c}``.
        """
        if self.K >= 1:
            return self, 1.0
        s = self.K * self.K
        q = MapParams(1.0 / self.K, normalize_theta(self.theta + math.pi / 2), s * self.c)
        return q, s


def stretch_matrix(K: float, theta: float) -> np.ndarray:
    """Real matrix of ``h_{K,theta}``."""
    cs, sn = math.cos(theta), math.sin(theta)
    off = (K - 1.0) * sn * cs
    return np.array([[K * cs * cs + sn * sn, off], [off, K * sn * sn + cs * cs]])


def h_apply(K: float, theta: float, z: complex) -> complex:
    """Stretch ``z`` by the factor ``K`` in the direction ``e^{i theta}``."""
    z = complex(z)
    return 0.5 * (K + 1.0) * z + cmath.exp(2j * theta) * (0.5 * (K - 1.0)) * z.conjugate()


def H_apply(p: MapParams, z: complex) -> complex:
    """Evaluate ``H_{K,theta,c}(z) = h_{K,theta}(z)**2 + c``."""
    w = h_apply(p.K, p.theta, z)
    if not (w.real * w.real + w.imag * w.imag <= OVERFLOW_GUARD):
        raise MapOverflowError(f"|h(z)|^2 exceeds {OVERFLOW_GUARD:g} at z={z!r}")
    return w * w + p.c


def H_iterate(p: MapParams, z: complex, n: int) -> complex:
    for _ in range(n):
        z = H_apply(p, z)
    return z


def jacobian(p: MapParams, z: complex) -> np.ndarray:
    """Real 2x2 derivative of ``H`` at ``z``: ``D(P_c)(h(z)) @ D(h)``.

    For ``theta = 0`` this is ``[[2K^2 x, -2y], [2Ky, 2Kx]]``.
    """
    w = h_apply(p.K, p.theta, z)
    dsq = np.array([[2.0 * w.real, -2.0 * w.imag], [2.0 * w.imag, 2.0 * w.real]])
    if p.theta == 0.0:
        # exact form, avoids cos/sin rounding
        return dsq * np.array([[p.K, 1.0], [p.K, 1.0]])
    return dsq @ stretch_matrix(p.K, p.theta)


class EigenPair(NamedTuple):
    lambda1: complex
    lambda2: complex


def eigenvalues(m: np.ndarray) -> EigenPair:
    """Eigenvalues of a real 2x2 matrix ordered so that ``|lambda1| <= |lambda2|``.

    A negative discriminant yields an exact conjugate pair.
    """
    a, b = float(m[0][0]), float(m[0][1])
    c, d = float(m[1][0]), float(m[1][1])
    half_tr = 0.5 * (a + d)
    det = a * d - b * c
    # (a-d)^2/4 + bc is the discriminant without cancellation in tr^2 - 4det
    disc = 0.25 * (a - d) * (a - d) + b * c
    if disc < 0:
        root = math.sqrt(-disc)
        l1, l2 = complex(half_tr, -root), complex(half_tr, root)
        return EigenPair(l1, l2)
    root = math.sqrt(disc)
    big = half_tr + math.copysign(root, half_tr) if half_tr != 0 else root
    small = det / big if big != 0 else half_tr - root
    pair = sorted((complex(small), complex(big)), key=abs)
    return EigenPair(pair[0], pair[1])
