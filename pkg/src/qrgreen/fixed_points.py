"""Fixed and periodic points of ``H_{K,theta,c}`` and their classification.

For ``theta = 0`` the plane splits into regions where a fixed point would
be attracting, repelling or a saddle: the ellipse ``gamma_K``
(``4K^3 x^2 + 4K y^2 = 1``, conjugate eigenvalues of modulus one), the two
saddle ellipses ``E_K^+-`` and the lines ``L_K^+-`` where the eigenvalues
coincide. :class:`RegionGeometry` holds these curves.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core_maps import EigenPair, H_apply, MapParams, eigenvalues, jacobian, stretch_matrix
from .escape import GridSpec, escape_radius

NEUTRAL_BAND = 1e-9
DEDUP_RADIUS = 1e-8
RESIDUAL_MAX = 1e-10
BOUNDARY_BAND = 1e-9

NEWTON_MAX_ITER = 100
NEWTON_HALVINGS = 20
NEWTON_STEP_TOL = 1e-13
# a manifold branch stops once a fundamental domain is shorter than this
STALL_LENGTH = 1e-10


class Stability(enum.Enum):
    ATTRACTING = "attracting"
    REPELLING_COMPLEX_PAIR = "repelling_complex_pair"
    REPELLING_REAL = "repelling_real"
    SADDLE = "saddle"
    INDETERMINATE = "indeterminate"

    @property
    def repelling(self) -> bool:
        return self in (Stability.REPELLING_REAL, Stability.REPELLING_COMPLEX_PAIR)


class Region(enum.Enum):
    INSIDE_GAMMA = "inside_gamma"
    OUTSIDE_GAMMA = "outside_gamma"
    IN_ELLIPSE_PLUS = "in_ellipse_plus"
    IN_ELLIPSE_MINUS = "in_ellipse_minus"
    ON_BOUNDARY = "on_boundary"


@dataclass(frozen=True)
class FixedPointRecord:
    z: complex
    period: int
    eigen: EigenPair
    stability: Stability
    region_label: Region | None = None
    residual: float = 0.0
    minimal_period: int | None = None

    def csv_row(self) -> list:
        l1, l2 = self.eigen
        return [repr(self.z.real), repr(self.z.imag), self.period,
                repr(l1.real), repr(l1.imag), repr(l2.real), repr(l2.imag),
                self.stability.value, self.region_label.value if self.region_label else ""]


CSV_HEADER = ["re", "im", "period", "lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im",
              "stability", "region"]


def write_records_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow(r.csv_row())


def stability_of(eigen: EigenPair, eps: float = NEUTRAL_BAND) -> Stability:
    m1, m2 = abs(eigen.lambda1), abs(eigen.lambda2)
    if abs(m1 - 1.0) <= eps or abs(m2 - 1.0) <= eps:
        return Stability.INDETERMINATE
    if m2 < 1.0:
        return Stability.ATTRACTING
    if m1 < 1.0:
        return Stability.SADDLE
    if eigen.lambda1.imag != 0.0:
        return Stability.REPELLING_COMPLEX_PAIR
    return Stability.REPELLING_REAL


# -- region geometry ---------------------------------------------------------

@dataclass(frozen=True)
class RegionGeometry:
    K: float
    line_slope: float
    gamma: tuple
    ellipse_centers: tuple
    semi_axis_h: float
    semi_axis_v: float
    tangency_points: tuple

    def gamma_form(self, z: complex) -> float:
        a, b = self.gamma
        return a * z.real ** 2 + b * z.imag ** 2

    def ellipse_form(self, z: complex, sign: int) -> float:
        w = self.ellipse_centers[0 if sign > 0 else 1]
        return ((z.real - w) / self.semi_axis_h) ** 2 + (z.imag / self.semi_axis_v) ** 2

    def line_residual(self, z: complex, sign: int) -> float:
        return z.imag - sign * self.line_slope * z.real


def region_geometry(K: float) -> RegionGeometry:
    if not K > 1:
        raise ValueError("region geometry needs K > 1")
    w = (K + 1.0) / (4.0 * K * K)
    tx = 1.0 / (K * (K + 1.0))
    ty = (K - 1.0) / (2.0 * math.sqrt(K) * (K + 1.0))
    return RegionGeometry(
        K=K,
        line_slope=math.sqrt(K) * (K - 1.0) / 2.0,
        gamma=(4.0 * K ** 3, 4.0 * K),
        ellipse_centers=(w, -w),
        semi_axis_h=(K - 1.0) / (4.0 * K * K),
        semi_axis_v=(K - 1.0) / (4.0 * K),
        tangency_points=(complex(tx, ty), complex(tx, -ty), complex(-tx, -ty), complex(-tx, ty)),
    )


def region_classify(g: RegionGeometry, z: complex, band: float = BOUNDARY_BAND) -> Region:
    z = complex(z)
    qg, qp, qm = g.gamma_form(z), g.ellipse_form(z, 1), g.ellipse_form(z, -1)
    if min(abs(qg - 1.0), abs(qp - 1.0), abs(qm - 1.0)) <= band:
        return Region.ON_BOUNDARY
    if qp < 1.0:
        return Region.IN_ELLIPSE_PLUS
    if qm < 1.0:
        return Region.IN_ELLIPSE_MINUS
    return Region.INSIDE_GAMMA if qg < 1.0 else Region.OUTSIDE_GAMMA


def stability_of_region(label: Region) -> Stability | None:
    """The class a fixed point in ``label`` must have; ``None`` on boundaries."""
    return {
        Region.INSIDE_GAMMA: Stability.ATTRACTING,
        Region.IN_ELLIPSE_PLUS: Stability.SADDLE,
        Region.IN_ELLIPSE_MINUS: Stability.SADDLE,
    }.get(label)


# -- classification ----------------------------------------------------------

def orbit_jacobian(p: MapParams, z: complex, n: int) -> np.ndarray:
    """Derivative of ``H^n`` at ``z`` by the chain rule."""
    m = np.eye(2)
    for _ in range(n):
        m = jacobian(p, z) @ m
        z = H_apply(p, z)
    return m


def classify(p: MapParams, z: complex, period: int = 1,
             residual_tol: float = 1e-8) -> FixedPointRecord:
    """Eigenvalues and stability of a fixed point of ``H^period``.

    Period-one points with ``theta = 0`` and ``K > 1`` also get their
    location label from :func:`region_classify`.
    """
    z = complex(z)
    w = z
    for _ in range(period):
        w = H_apply(p, w)
    residual = abs(w - z)
    if residual > residual_tol:
        raise ValueError(f"{z} is not a period-{period} point (residual {residual:.3g})")
    eigen = eigenvalues(orbit_jacobian(p, z, period))
    label = None
    if period == 1 and p.theta == 0.0 and p.K > 1:
        label = region_classify(region_geometry(p.K), z)
    return FixedPointRecord(z, period, eigen, stability_of(eigen), label, residual)


# -- closed forms ------------------------------------------------------------

def fixed_points_closed_form(K: float, c: float) -> list[FixedPointRecord]:
    """Fixed points of ``H_{K,0,c}`` for real ``c``.

    Real roots ``x = (1 +- sqrt(1 - 4K^2 c)) / (2K^2)`` exist for
    ``c <= 1/(4K^2)``; the pair ``1/(2K) +- i sqrt(1/4 - 1/(2K) + c)`` for
    ``c >= 1/(2K) - 1/4``.
    """
    c = float(c)
    p = MapParams(K, 0.0, c)
    pts = []
    disc = 1.0 - 4.0 * K * K * c
    if abs(disc) < 1e-14:
        disc = 0.0
    if disc >= 0:
        r = math.sqrt(disc)
        pts += [complex((1.0 + r) / (2 * K * K)), complex((1.0 - r) / (2 * K * K))]
    y2 = 0.25 - 0.5 / K + c
    if abs(y2) < 1e-14:
        y2 = 0.0
    if y2 >= 0:
        y = math.sqrt(y2)
        pts += [complex(0.5 / K, y), complex(0.5 / K, -y)]
    distinct = []
    for z in pts:
        if all(abs(z - q) > 1e-12 for q in distinct):
            distinct.append(z)
    return [classify(p, z) for z in distinct]


# -- Newton multistart -------------------------------------------------------

def _orbit_and_jacobian(p: MapParams, x, y, n: int):
    """Vectorised ``H^n`` and its Jacobian entries at arrays ``x, y``."""
    m = stretch_matrix(p.K, p.theta)
    a11, a12, a21, a22 = (np.ones_like(x), np.zeros_like(x), np.zeros_like(x), np.ones_like(x))
    for _ in range(n):
        u = m[0, 0] * x + m[0, 1] * y
        v = m[1, 0] * x + m[1, 1] * y
        # D(P_c) at u+iv is [[2u, -2v], [2v, 2u]]; D(h) is m
        d11 = 2 * (u * m[0, 0] - v * m[1, 0])
        d12 = 2 * (u * m[0, 1] - v * m[1, 1])
        d21 = 2 * (v * m[0, 0] + u * m[1, 0])
        d22 = 2 * (v * m[0, 1] + u * m[1, 1])
        a11, a12, a21, a22 = (d11 * a11 + d12 * a21, d11 * a12 + d12 * a22,
                              d21 * a11 + d22 * a21, d21 * a12 + d22 * a22)
        x, y = u * u - v * v + p.c.real, 2 * u * v + p.c.imag
    return x, y, a11, a12, a21, a22


def _residual(p, x, y, n):
    fx, fy, *_ = _orbit_and_jacobian(p, x, y, n)
    return np.hypot(fx - x, fy - y)


def _newton(p: MapParams, x, y, n: int):
    """Damped Newton on ``H^n(z) - z`` from every seed; returns converged roots."""
    with np.errstate(all="ignore"):
        active = np.ones(x.shape, dtype=bool)
        done = np.zeros(x.shape, dtype=bool)
        for _ in range(NEWTON_MAX_ITER):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            xa, ya = x[idx], y[idx]
            fx, fy, a11, a12, a21, a22 = _orbit_and_jacobian(p, xa, ya, n)
            fx, fy = fx - xa, fy - ya
            a11, a22 = a11 - 1.0, a22 - 1.0
            det = a11 * a22 - a12 * a21
            dx = (a22 * fx - a12 * fy) / det
            dy = (-a21 * fx + a11 * fy) / det
            res = np.hypot(fx, fy)
            lam = np.ones_like(dx)
            for _ in range(NEWTON_HALVINGS):
                trial = _residual(p, xa - lam * dx, ya - lam * dy, n)
                worse = ~(trial <= res)
                if not worse.any():
                    break
                lam = np.where(worse, 0.5 * lam, lam)
            nx, ny = xa - lam * dx, ya - lam * dy
            ok = np.isfinite(nx) & np.isfinite(ny) & np.isfinite(det) & (det != 0)
            step = np.hypot(lam * dx, lam * dy)
            x[idx] = np.where(ok, nx, x[idx])
            y[idx] = np.where(ok, ny, y[idx])
            conv = ok & (step < NEWTON_STEP_TOL * (1.0 + np.hypot(nx, ny)))
            done[idx[conv]] = True
            active[idx[~ok | conv]] = False
        res = _residual(p, x, y, n)
    keep = np.isfinite(res) & (res <= RESIDUAL_MAX)
    # roots at the last iteration may be converged without meeting the step test
    return x[keep], y[keep], res[keep]


def _dedup(x, y, res, radius=DEDUP_RADIUS):
    order = np.lexsort((y, x, res))
    roots = []
    for k in order:
        z = complex(x[k], y[k])
        if all(abs(z - r) > radius for r, _ in roots):
            roots.append((z, float(res[k])))
    roots.sort(key=lambda t: (t[0].real, t[0].imag))
    return roots


def default_window(p: MapParams, seeds_per_axis: int) -> GridSpec:
    r = escape_radius(p) + 1.0
    return GridSpec(-r, r, -r, r, seeds_per_axis, seeds_per_axis)


def _seeds(window: GridSpec, seeds_per_axis: int):
    spec = GridSpec(window.x_min, window.x_max, window.y_min, window.y_max,
                    seeds_per_axis, seeds_per_axis)
    X, Y = np.meshgrid(spec.xs(), spec.ys())
    return X.ravel().copy(), Y.ravel().copy()


def periodic_points(p: MapParams, n: int, window: GridSpec | None = None,
                    seeds_per_axis: int = 40) -> list[FixedPointRecord]:
    """Solutions of ``H^n(z) = z`` found by Newton from a grid of seeds.

    Lower-period points are included; ``minimal_period`` records the least
    divisor ``d`` of ``n`` with ``H^d(z) = z``.
    """
    if not 1 <= n <= 6:
        raise ValueError("period must be between 1 and 6")
    window = window or default_window(p, seeds_per_axis)
    x, y = _seeds(window, seeds_per_axis)
    roots = _dedup(*_newton(p, x, y, n))
    records = []
    for z, res in roots:
        eigen = eigenvalues(orbit_jacobian(p, z, n))
        minimal = next(d for d in range(1, n + 1)
                       if n % d == 0 and abs(_orbit_point(p, z, d) - z) <= 1e-8)
        label = None
        if n == 1 and p.theta == 0.0 and p.K > 1:
            label = region_classify(region_geometry(p.K), z)
        records.append(FixedPointRecord(z, n, eigen, stability_of(eigen), label, res, minimal))
    if not records:
        warnings.warn(f"no period-{n} points found from {seeds_per_axis}^2 seeds; "
                      "increase seeds_per_axis", RuntimeWarning, stacklevel=2)
    elif n > 1 and len(records) < 2:
        warnings.warn(f"only {len(records)} period-{n} point(s) found; the count may be low",
                      RuntimeWarning, stacklevel=2)
    if n == 1 and len(records) > 4:
        warnings.warn(f"{len(records)} fixed points exceed the Bezout bound of 4",
                      RuntimeWarning, stacklevel=2)
    return records


def _orbit_point(p: MapParams, z: complex, n: int) -> complex:
    for _ in range(n):
        z = H_apply(p, z)
    return z


def fixed_points_general(p: MapParams, window: GridSpec | None = None,
                         seeds_per_axis: int = 24) -> list[FixedPointRecord]:
    """All fixed points reachable by damped Newton from ``seeds_per_axis**2`` seeds.

    Completeness is not certified; an empty result raises a warning.
    """
    return periodic_points(p, 1, window, seeds_per_axis)


# -- invariant manifolds -----------------------------------------------------

class ManifoldError(RuntimeError):
    """Newton for a local inverse of ``H`` did not converge."""


class Manifolds(NamedTuple):
    """Polylines through the saddle: ``stable`` and ``unstable`` run end to end."""

    stable: np.ndarray
    unstable: np.ndarray


def _eigvec(m: np.ndarray, lam: complex) -> complex:
    lam = lam.real
    a, b = m[0, 0] - lam, m[0, 1]
    c, d = m[1, 0], m[1, 1] - lam
    if abs(a) + abs(b) >= abs(c) + abs(d):
        v = complex(-b, a) if (a or b) else complex(1, 0)
    else:
        v = complex(-d, c) if (c or d) else complex(1, 0)
    v /= abs(v)
    # canonical sign: first nonzero coordinate positive
    if v.real < 0 or (v.real == 0 and v.imag < 0):
        v = -v
    return v


def local_inverse(p: MapParams, target: complex, guess: complex,
                  max_iter: int = 50) -> complex:
    """Solve ``H(w) = target`` by Newton from ``guess``."""
    w = complex(guess)
    for _ in range(max_iter):
        f = H_apply(p, w) - target
        J = jacobian(p, w)
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if det == 0:
            break
        dx = (J[1, 1] * f.real - J[0, 1] * f.imag) / det
        dy = (-J[1, 0] * f.real + J[0, 0] * f.imag) / det
        w -= complex(dx, dy)
        if math.hypot(dx, dy) < 1e-15 * (1.0 + abs(w)):
            return w
    if abs(H_apply(p, w) - target) < 1e-12 * (1.0 + abs(target)):
        return w
    raise ManifoldError(f"local inverse failed near {guess} for target {target}")


def _grow(first_domain, advance, arc_budget, inside, step, min_step):
    """Push a fundamental domain forward with ``advance``, refining long gaps."""
    curve = list(first_domain)
    domain = list(first_domain)
    while len(curve) < arc_budget:
        src = [domain[0]]
        img = [advance(domain[0], None)]
        k = 1
        while k < len(domain):
            a, b = src[-1], domain[k]
            w = advance(b, img[-1])
            if abs(w - img[-1]) > step and abs(b - a) > min_step:
                domain.insert(k, 0.5 * (a + b))
                continue
            src.append(b)
            img.append(w)
            k += 1
        new = img[1:]
        if not new or abs(img[-1] - img[0]) < STALL_LENGTH:
            break
        for z in new:
            if not inside(z) or len(curve) >= arc_budget:
                return curve
            curve.append(z)
        domain = img
    return curve


def trace_manifolds(p: MapParams, saddle: FixedPointRecord, arc_budget: int = 2000,
                    window: GridSpec | None = None, step: float = 1e-3,
                    min_step: float = 1e-5, seed_length: float = 1e-4) -> Manifolds:
    """Stable and unstable curves of a saddle fixed point (visualisation grade).

    The unstable curve is the forward image of a short segment along the
    expanding eigenvector; the stable curve is pulled back along the
    contracting one with Newton-based local inverses of ``H``. Each branch
    stops after ``arc_budget`` vertices, on leaving ``window``, or once it
    stops growing.
    """
    if saddle.stability is not Stability.SADDLE:
        raise ValueError("trace_manifolds needs a saddle point")
    z0 = saddle.z
    J = jacobian(p, z0)
    if abs(np.linalg.det(J)) == 0:
        raise ValueError("Jacobian is singular at the saddle")
    lam_s, lam_u = saddle.eigen.lambda1.real, saddle.eigen.lambda2.real
    v_s, v_u = _eigvec(J, saddle.eigen.lambda1), _eigvec(J, saddle.eigen.lambda2)
    r = escape_radius(p)
    window = window or GridSpec(-r, r, -r, r, 1, 1)

    def inside(z):
        return window.x_min <= z.real <= window.x_max and window.y_min <= z.imag <= window.y_max

    def forward(z, _prev):
        return H_apply(p, z)

    def backward(z, prev):
        return local_inverse(p, z, prev if prev is not None else z0 + (z - z0) / lam_s)

    stable = []
    unstable = []
    for sign in (1, -1):
        q0 = z0 + sign * seed_length * v_s
        q1 = local_inverse(p, q0, z0 + sign * seed_length * v_s / lam_s)
        n = 8
        first = [q0 + (q1 - q0) * k / n for k in range(n + 1)]
        first[-1] = q1
        stable.append(_grow(first, backward, arc_budget, inside, step, min_step))
        u0 = z0 + sign * seed_length * v_u
        u1 = H_apply(p, u0)
        first = [u0 + (u1 - u0) * k / n for k in range(n + 1)]
        unstable.append(_grow(first, forward, arc_budget, inside, step, min_step))

    def join(a, b):
        return np.array(list(reversed(b)) + [z0] + list(a))

    return Manifolds(join(*stable), join(*unstable))


# -- stability over a window -------------------------------------------------

_STABILITY_CODES = list(Stability)


def stability_grid(K: float, theta: float, spec: GridSpec,
                   eps: float = NEUTRAL_BAND) -> np.ndarray:
    """Class a fixed point would have at each pixel of ``spec``.

    The Jacobian of ``H`` does not depend on ``c``, so this is the
    classification picture of the plane. Entries index ``list(Stability)``.
    """
    m = stretch_matrix(K, theta)
    X, Y = np.meshgrid(spec.xs(), spec.ys())
    u = m[0, 0] * X + m[0, 1] * Y
    v = m[1, 0] * X + m[1, 1] * Y
    j11 = 2 * (u * m[0, 0] - v * m[1, 0])
    j12 = 2 * (u * m[0, 1] - v * m[1, 1])
    j21 = 2 * (v * m[0, 0] + u * m[1, 0])
    j22 = 2 * (v * m[0, 1] + u * m[1, 1])
    half_tr = 0.5 * (j11 + j22)
    det = j11 * j22 - j12 * j21
    disc = half_tr ** 2 - det
    complex_pair = disc < 0
    r = np.sqrt(np.abs(disc))
    m_pair = np.sqrt(np.abs(det))
    big = np.where(complex_pair, m_pair, np.abs(half_tr) + r)
    small = np.where(complex_pair, m_pair, np.abs(np.abs(half_tr) - r))
    code = np.full(X.shape, _STABILITY_CODES.index(Stability.REPELLING_REAL))
    code[complex_pair] = _STABILITY_CODES.index(Stability.REPELLING_COMPLEX_PAIR)
    code[big < 1.0] = _STABILITY_CODES.index(Stability.ATTRACTING)
    code[(small < 1.0) & (big > 1.0)] = _STABILITY_CODES.index(Stability.SADDLE)
    neutral = (np.abs(big - 1.0) <= eps) | (np.abs(small - 1.0) <= eps)
    code[neutral] = _STABILITY_CODES.index(Stability.INDETERMINATE)
    return code


def stability_from_code(code: int) -> Stability:
    return _STABILITY_CODES[int(code)]
