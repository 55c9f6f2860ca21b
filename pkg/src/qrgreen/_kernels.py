"""Compiled inner loops.

Every kernel takes the stretch as its three distinct matrix entries
``(m11, m12, m22)`` (the matrix is symmetric) and ``c`` as ``(cr, ci)``.
Grid kernels are ``prange`` loops over rows; each pixel is computed by the
same scalar routine, so results do not depend on the thread schedule.
"""

import math

import numpy as np
from numba import njit, prange

TWO_PI = 2.0 * math.pi

# log|z| above which greens_point stops iterating
LOG_OVERFLOW = 300.0

# relative step below which greens_point treats an orbit as fixed
STATIONARY_TOL = 1e-13


@njit(cache=True, inline="always")
def step(m11, m12, m22, cr, ci, x, y):
    u = m11 * x + m12 * y
    v = m12 * x + m22 * y
    return u * u - v * v + cr, 2.0 * u * v + ci


@njit(cache=True)
def escape_point(m11, m12, m22, cr, ci, x, y, budget, radius):
    """Return ``(n, x_n, y_n)``; ``n = -1`` if ``|z_n| <= radius`` for all ``n <= budget``."""
    r2 = radius * radius
    if x * x + y * y > r2:
        return 0, x, y
    for n in range(1, budget + 1):
        x, y = step(m11, m12, m22, cr, ci, x, y)
        if x * x + y * y > r2:
            return n, x, y
    return -1, x, y


@njit(cache=True, parallel=True)
def dynamical_grid(m11, m12, m22, cr, ci, xs, ys, budget, radius):
    out = np.empty((ys.shape[0], xs.shape[0]), dtype=np.int64)
    for j in prange(ys.shape[0]):
        for i in range(xs.shape[0]):
            n, _, _ = escape_point(m11, m12, m22, cr, ci, xs[i], ys[j], budget, radius)
            out[j, i] = n
    return out


@njit(cache=True, parallel=True)
def parameter_grid(m11, m12, m22, xs, ys, budget, base_radius):
    out = np.empty((ys.shape[0], xs.shape[0]), dtype=np.int64)
    for j in prange(ys.shape[0]):
        for i in range(xs.shape[0]):
            cr = xs[i]
            ci = ys[j]
            radius = max(max(math.sqrt(cr * cr + ci * ci), 2.0), base_radius)
            n, _, _ = escape_point(m11, m12, m22, cr, ci, 0.0, 0.0, budget, radius)
            out[j, i] = n
    return out


@njit(cache=True)
def probe_bounded(m11, m12, m22, x, y, inner2, outer2, budget):
    """Classify ``x + iy`` under ``H_{K,theta,0}``: 1 bounded, 0 escaping.

    Entering the disk of squared radius ``inner2`` certifies boundedness;
    running out of budget also counts as bounded.
    """
    for _ in range(budget):
        r2 = x * x + y * y
        if r2 < inner2:
            return 1
        if r2 > outer2:
            return 0
        x, y = step(m11, m12, m22, 0.0, 0.0, x, y)
    return 1


@njit(cache=True, parallel=True)
def profile_rays(m11, m12, m22, angles, lo0, hi0, tol, budget, outer, inner):
    """Bisect each ray for the boundary of the escaping set of ``H_{K,theta,0}``.

    Returns ``(radii, status)``; ``status`` is 0 on success, 1 if the lower
    bracket end escapes, 2 if the upper end stays bounded.
    """
    n = angles.shape[0]
    radii = np.empty(n)
    status = np.zeros(n, dtype=np.int64)
    inner2 = inner * inner
    outer2 = outer * outer
    for j in prange(n):
        cs = math.cos(angles[j])
        sn = math.sin(angles[j])
        lo = lo0
        hi = hi0
        if probe_bounded(m11, m12, m22, lo * cs, lo * sn, inner2, outer2, budget) == 0:
            status[j] = 1
            radii[j] = lo
            continue
        if probe_bounded(m11, m12, m22, hi * cs, hi * sn, inner2, outer2, budget) == 1:
            status[j] = 2
            radii[j] = hi
            continue
        while hi - lo > tol * lo:
            mid = 0.5 * (lo + hi)
            if probe_bounded(m11, m12, m22, mid * cs, mid * sn, inner2, outer2, budget) == 1:
                lo = mid
            else:
                hi = mid
        radii[j] = 0.5 * (lo + hi)
    return radii, status


@njit(cache=True)
def log_radius_at(log_radii, phi):
    """Linear interpolation of log-radius in angle, periodic in ``2 pi``."""
    n = log_radii.shape[0]
    s = (phi % TWO_PI) * (n / TWO_PI)
    j = int(math.floor(s))
    f = s - j
    if j >= n:
        j -= n
    k = j + 1
    if k >= n:
        k = 0
    if f == 0.0:
        return log_radii[j]
    return (1.0 - f) * log_radii[j] + f * log_radii[k]


@njit(cache=True)
def log_boundary(m11, m12, m22, log_radii, phi, depth):
    """``log b(phi)`` from the sampled profile, sharpened by homogeneity.

    ``log b(phi) = (log b(psi) - log|H_0(e^{i phi})|) / 2`` with
    ``psi = arg H_0(e^{i phi})``; unrolling it ``depth`` times shrinks the
    interpolation error by ``2**-depth``. Sample angles return the stored value.
    """
    n = log_radii.shape[0]
    s = (phi % TWO_PI) * (n / TWO_PI)
    j = int(math.floor(s + 0.5))
    if abs(s - j) < 1e-9:
        return log_radii[j - n if j >= n else j]
    acc = 0.0
    coef = 1.0
    for _ in range(depth):
        u = m11 * math.cos(phi) + m12 * math.sin(phi)
        v = m12 * math.cos(phi) + m22 * math.sin(phi)
        wx = u * u - v * v
        wy = 2.0 * u * v
        acc -= 0.5 * coef * math.log(math.hypot(wx, wy))
        coef *= 0.5
        phi = math.atan2(wy, wx)
    return acc + coef * log_radius_at(log_radii, phi)


@njit(cache=True)
def log_tau0(m11, m12, m22, log_radii, x, y, depth):
    """``log tau0(x + iy)``; ``-inf`` at the origin."""
    r = math.hypot(x, y)
    if r == 0.0:
        return -math.inf
    return math.log(r) - log_boundary(m11, m12, m22, log_radii, math.atan2(y, x), depth)


@njit(cache=True)
def greens_point(m11, m12, m22, cr, ci, log_radii, depth, x, y, budget, r_eval, tol):
    """Green's function by the limit ``2^-n log tau0(H^n z)``.

    Returns 0.0 if ``|z_n|`` never exceeds ``r_eval`` within ``budget`` steps
    or the orbit lands on a fixed point first.
    """
    r2 = r_eval * r_eval
    n = 0
    while x * x + y * y <= r2:
        if n >= budget:
            return 0.0
        x1, y1 = step(m11, m12, m22, cr, ci, x, y)
        # a numerically stationary orbit is a fixed point, which is bounded;
        # left alone, rounding would push a repelling one out to infinity
        if abs(x1 - x) + abs(y1 - y) <= STATIONARY_TOL * (1.0 + abs(x) + abs(y)):
            return 0.0
        x, y = x1, y1
        n += 1
    scale = 0.5 ** n
    g = scale * log_tau0(m11, m12, m22, log_radii, x, y, depth)
    while n < budget:
        if 0.5 * math.log(x * x + y * y) > LOG_OVERFLOW:
            break
        x, y = step(m11, m12, m22, cr, ci, x, y)
        n += 1
        scale *= 0.5
        g_next = scale * log_tau0(m11, m12, m22, log_radii, x, y, depth)
        done = abs(g_next - g) < tol
        g = g_next
        if done:
            break
    return g


@njit(cache=True, parallel=True)
def greens_grid(m11, m12, m22, cr, ci, log_radii, depth, xs, ys, budget, r_eval, tol, scale):
    """``greens_point`` at ``scale * (x + iy)`` for every grid point."""
    out = np.empty((ys.shape[0], xs.shape[0]))
    for j in prange(ys.shape[0]):
        for i in range(xs.shape[0]):
            out[j, i] = greens_point(m11, m12, m22, cr, ci, log_radii, depth,
                                     scale * xs[i], scale * ys[j], budget, r_eval, tol)
    return out


@njit(cache=True, parallel=True)
def refine_crossings(m11, m12, m22, cr, ci, log_radii, depth, ax, ay, bx, by, t,
                     budget, r_eval, tol, scale, iters):
    """Bisect each segment ``a -> b`` (``G(a) <= t < G(b)``) for ``G = t``.

    Returns the endpoint of the final bracket whose value is closer to ``t``.
    """
    n = ax.shape[0]
    ox = np.empty(n)
    oy = np.empty(n)
    for k in prange(n):
        x0, y0, x1, y1 = ax[k], ay[k], bx[k], by[k]
        g0 = greens_point(m11, m12, m22, cr, ci, log_radii, depth, scale * x0, scale * y0,
                          budget, r_eval, tol)
        g1 = greens_point(m11, m12, m22, cr, ci, log_radii, depth, scale * x1, scale * y1,
                          budget, r_eval, tol)
        for _ in range(iters):
            xm = 0.5 * (x0 + x1)
            ym = 0.5 * (y0 + y1)
            gm = greens_point(m11, m12, m22, cr, ci, log_radii, depth, scale * xm, scale * ym,
                              budget, r_eval, tol)
            if gm <= t:
                x0, y0, g0 = xm, ym, gm
            else:
                x1, y1, g1 = xm, ym, gm
        if t - g0 <= g1 - t:
            ox[k], oy[k] = x0, y0
        else:
            ox[k], oy[k] = x1, y1
    return ox, oy
