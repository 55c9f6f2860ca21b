"""Green's function of ``H_{K,theta,c}`` and its equipotentials.

``G`` is evaluated as the limit of ``2^-n log tau0(H^n(z))`` once the orbit
is far from the bounded orbit set. It vanishes on bounded orbits and
satisfies ``G(H(z)) = 2 G(z)``.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from matplotlib.path import Path

from . import _kernels
from .boundary import (DEFAULT_ANGLES, DEFAULT_DEPTH, DEFAULT_TOL, BoundaryProfile,
                       compute_profile, unit_profile)
from .core_maps import H_apply, MapParams, stretch_matrix
from .escape import DEFAULT_BUDGET, GridSpec, escape_radius

DEFAULT_GREENS_TOL = 1e-10
EVAL_RADIUS_FACTOR = 8.0
# sublevel loops must reach G <= DEPTH_RATIO * t to count as components
DEPTH_RATIO = 1e-3
# bisection steps that move contour vertices onto the level set
REFINE_STEPS = 40


class InMandelbrotError(ValueError):
    """``G(0) = 0``: the critical orbit stayed bounded, so there is no critical level."""


@lru_cache(maxsize=16)
def profile_for(p: MapParams, n_angles: int = DEFAULT_ANGLES,
                tol: float = DEFAULT_TOL) -> BoundaryProfile:
    """The boundary profile ``greens_value`` expects for ``p`` (after K < 1 conjugation)."""
    q, _ = p.conjugated()
    if q.K == 1.0:
        return unit_profile()
    return compute_profile(q.K, q.theta, n_angles, tol)


def _setup(p: MapParams, profile: BoundaryProfile):
    q, s = p.conjugated()
    if q.K == 1.0:
        ok = profile.K == 1.0
    else:
        ok = profile.matches(q.K, q.theta)
    if not ok:
        raise ValueError(f"profile (K={profile.K}, theta={profile.theta}) does not match "
                         f"normalised parameters (K={q.K}, theta={q.theta})")
    m = stretch_matrix(q.K, q.theta)
    r_eval = EVAL_RADIUS_FACTOR * escape_radius(q)
    return (m[0, 0], m[0, 1], m[1, 1], q.c.real, q.c.imag, profile.log_radii), s, r_eval


def greens_value(p: MapParams, profile: BoundaryProfile, z: complex,
                 budget: int = DEFAULT_BUDGET, tol: float = DEFAULT_GREENS_TOL,
                 depth: int = DEFAULT_DEPTH) -> float:
    """``G_{K,theta,c}(z)``; 0 when the orbit stays within the evaluation radius."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    args, s, r_eval = _setup(p, profile)
    z = complex(z) * s
    return float(_kernels.greens_point(*args, int(depth), z.real, z.imag, int(budget),
                                       r_eval, float(tol)))


def critical_level(p: MapParams, profile: BoundaryProfile, budget: int = DEFAULT_BUDGET,
                   tol: float = DEFAULT_GREENS_TOL) -> float:
    """``t0 = G(0)``; raises :class:`InMandelbrotError` when it is 0."""
    t0 = greens_value(p, profile, 0j, budget, tol)
    if t0 <= 0.0:
        raise InMandelbrotError(f"c={p.c} is in M_(K={p.K}, theta={p.theta}) "
                                f"up to budget {budget}")
    return t0


@dataclass(frozen=True)
class GreensField:
    """``G`` sampled at the cell centres of ``spec``; ``values`` has shape ``(height, width)``."""

    spec: GridSpec
    values: np.ndarray
    params: MapParams
    profile_ref: str
    budget: int
    tol: float
    # kept so extraction can evaluate G off the grid; None for synthetic fields
    profile: BoundaryProfile | None = field(default=None, repr=False, compare=False)
    depth: int = DEFAULT_DEPTH

    @property
    def reliable_floor(self) -> float:
        return 10.0 * self.tol

    def write_csv(self, path) -> None:
        xs, ys = self.spec.xs(), self.spec.ys()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["re", "im", "G"])
            for j, y in enumerate(ys):
                for i, x in enumerate(xs):
                    w.writerow([repr(float(x)), repr(float(y)), repr(float(self.values[j, i]))])


def greens_grid(p: MapParams, profile: BoundaryProfile, spec: GridSpec,
                budget: int = DEFAULT_BUDGET, tol: float = DEFAULT_GREENS_TOL,
                depth: int = DEFAULT_DEPTH) -> GreensField:
    args, s, r_eval = _setup(p, profile)
    values = _kernels.greens_grid(*args, int(depth), spec.xs(), spec.ys(), int(budget),
                                  r_eval, float(tol), s)
    return GreensField(spec, values, p, profile.key, int(budget), float(tol), profile, int(depth))


def predicted_components(t: float, t0: float) -> int:
    """Number of components of ``E(t)`` when the critical level is ``t0``.

    One for ``t >= t0``; otherwise ``2**m`` with ``m = ceil(log2(t0 / t))``.
    """
    if not (t > 0 and t0 > 0):
        raise ValueError("t and t0 must be positive")
    if t >= t0:
        return 1
    m = math.ceil(math.log(t0 / t) / math.log(2.0))
    return 2 ** max(m, 1)


@dataclass(frozen=True)
class EquipotentialSet:
    """Closed polylines of ``{G = t}``; each polyline is a cyclic complex array."""

    level_t: float
    polylines: list
    discarded: int = 0

    @property
    def component_count(self) -> int:
        return len(self.polylines)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["component_id", "vertex_id", "re", "im"])
            for k, line in enumerate(self.polylines):
                for v, z in enumerate(line):
                    w.writerow([k, v, repr(float(z.real)), repr(float(z.imag))])


# corners of a cell, clockwise from top-left: (row offset, column offset)
_CORNERS = ((0, 0), (0, 1), (1, 1), (1, 0))
# cell edges as corner pairs: top, right, bottom, left
_EDGES = ((0, 1), (1, 2), (3, 2), (0, 3))


def _edge_key(j: int, i: int, e: int):
    # horizontal edges are ('h', row, col), vertical ones ('v', row, col)
    if e == 0:
        return ("h", j, i)
    if e == 2:
        return ("h", j + 1, i)
    if e == 3:
        return ("v", j, i)
    return ("v", j, i + 1)


def extract_equipotential(field: GreensField, t: float, depth_ratio: float = DEPTH_RATIO,
                          refine: int = REFINE_STEPS) -> EquipotentialSet:
    """Marching squares for ``{G = t}`` over ``field``.

    The field is padded by one ring of cells above ``t`` so every contour
    closes; parts of ``E(t)`` that leave the window are closed along its
    border. Ambiguous saddle cells follow the mean of their four corners.

    ``G`` is rough: its sublevel sets carry filaments thinner than a pixel,
    and sampling cuts them into small islands. Every true component of
    ``{G <= t}`` contains bounded orbits, where ``G = 0``, so a loop is kept
    only if it encloses the sublevel side, encloses a sample with
    ``G <= depth_ratio * t``, and is not nested in another kept loop. The
    number of dropped loops is reported as ``discarded``. When the filled
    set is dust, no sample may come that close to it; a larger
    ``depth_ratio`` then finds the components, at the price of admitting
    islands whose deepest sample is below it.

    When the field carries its profile, vertices of kept loops are moved
    onto ``{G = t}`` by ``refine`` bisection steps along their cell edge;
    vertices on the padding ring keep their interpolated position.
    """
    values = field.values
    if t <= field.reliable_floor:
        raise ValueError(f"level {t} is below the reliable floor {field.reliable_floor}")
    if not t < values.max():
        raise ValueError(f"level {t} is not below the field maximum {values.max()}")

    spec = field.spec
    pad = max(values.max(), t) + 1.0
    V = np.pad(values, 1, constant_values=pad)
    xs = np.concatenate(([spec.x_min - 0.5 * spec.dx], spec.xs(), [spec.x_max + 0.5 * spec.dx]))
    ys = np.concatenate(([spec.y_max + 0.5 * spec.dy], spec.ys(), [spec.y_min - 0.5 * spec.dy]))
    above = V > t

    tl, tr = above[:-1, :-1], above[:-1, 1:]
    br, bl = above[1:, 1:], above[1:, :-1]
    mixed = ~((tl == tr) & (tr == br) & (br == bl))

    points = {}

    def crossing(key):
        pt = points.get(key)
        if pt is None:
            kind, j, i = key
            j2, i2 = (j, i + 1) if kind == "h" else (j + 1, i)
            va, vb = V[j, i], V[j2, i2]
            f = (t - va) / (vb - va)
            pt = complex(xs[i] + f * (xs[i2] - xs[i]), ys[j] + f * (ys[j2] - ys[j]))
            points[key] = pt
        return pt

    links = defaultdict(list)
    for j, i in zip(*np.nonzero(mixed)):
        state = [bool(above[j + dj, i + di]) for dj, di in _CORNERS]
        cut = [e for e, (a, b) in enumerate(_EDGES) if state[a] != state[b]]
        if len(cut) == 2:
            pairs = [(cut[0], cut[1])]
        else:
            center_above = sum(V[j + dj, i + di] for dj, di in _CORNERS) / 4.0 > t
            if center_above == state[0]:
                pairs = [(0, 1), (2, 3)]   # isolate corners 1 and 3
            else:
                pairs = [(0, 3), (1, 2)]   # isolate corners 0 and 2
        for ea, eb in pairs:
            ka, kb = _edge_key(j, i, ea), _edge_key(j, i, eb)
            links[ka].append(kb)
            links[kb].append(ka)

    loops = []
    seen = set()
    for start in sorted(links):
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [k for k in links[cur] if k != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            if cur == start:
                break
            seen.add(cur)
            loop.append(cur)
        loops.append(loop)

    deep_j, deep_i = np.nonzero(V <= depth_ratio * t)
    deep = np.column_stack((xs[deep_i], ys[deep_j]))
    kept = []
    kept_keys = {}
    for loop in loops:
        poly = np.array([crossing(k) for k in loop])
        kind, j, i = loop[0]
        j2, i2 = (j, i + 1) if kind == "h" else (j + 1, i)
        jb, ib = (j, i) if V[j, i] <= t else (j2, i2)
        if not point_in_polygon(complex(xs[ib], ys[jb]), poly):
            continue  # island of the superlevel side
        path = Path(np.column_stack((poly.real, poly.imag)))
        lo, hi = poly.real.min(), poly.real.max()
        bot, top = poly.imag.min(), poly.imag.max()
        box = ((deep[:, 0] >= lo) & (deep[:, 0] <= hi) & (deep[:, 1] >= bot) & (deep[:, 1] <= top))
        if box.any() and path.contains_points(deep[box]).any():
            kept.append(poly)
            kept_keys[id(poly)] = loop
    polylines = [a for a in kept
                 if not any(b is not a and point_in_polygon(a[0], b) for b in kept)]
    if refine and field.profile is not None and polylines:
        polylines = _refine(field, t, polylines, [kept_keys[id(a)] for a in polylines],
                            V, xs, ys, refine)
    return EquipotentialSet(float(t), polylines, len(loops) - len(polylines))


def _refine(field: GreensField, t, polylines, keys, V, xs, ys, steps):
    """Bisect interior crossings onto ``G = t`` with the exact evaluator."""
    h, w = V.shape
    ends = []
    for loop in keys:
        for kind, j, i in loop:
            j2, i2 = (j, i + 1) if kind == "h" else (j + 1, i)
            interior = 1 <= min(j, j2) and max(j, j2) <= h - 2 and 1 <= min(i, i2) and max(i, i2) <= w - 2
            if not interior:
                ends.append(None)
            elif V[j, i] <= t:
                ends.append((xs[i], ys[j], xs[i2], ys[j2]))
            else:
                ends.append((xs[i2], ys[j2], xs[i], ys[j]))
    idx = [k for k, e in enumerate(ends) if e is not None]
    if not idx:
        return polylines
    seg = np.array([ends[k] for k in idx])
    args, s, r_eval = _setup(field.params, field.profile)
    rx, ry = _kernels.refine_crossings(*args, field.depth, seg[:, 0], seg[:, 1], seg[:, 2],
                                       seg[:, 3], float(t), field.budget, r_eval, field.tol,
                                       s, int(steps))
    flat = np.concatenate(polylines)
    flat[idx] = rx + 1j * ry
    out = []
    start = 0
    for a in polylines:
        out.append(flat[start:start + a.size])
        start += a.size
    return out


def point_in_polygon(z: complex, polygon: np.ndarray) -> bool:
    """Even-odd rule test of ``z`` against a closed polyline."""
    x, y = z.real, z.imag
    px, py = polygon.real, polygon.imag
    qx, qy = np.roll(px, -1), np.roll(py, -1)
    straddle = (py > y) != (qy > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = px + (y - py) * (qx - px) / (qy - py)
    return bool(np.count_nonzero(straddle & (x < xcross)) % 2)


@dataclass(frozen=True)
class PushforwardReport:
    n: int
    expected_level: float
    max_deviation: float
    vertices: int


def equipotential_pushforward_check(p: MapParams, profile: BoundaryProfile,
                                    eq_set: EquipotentialSet, n: int,
                                    budget: int = DEFAULT_BUDGET,
                                    tol: float = DEFAULT_GREENS_TOL) -> PushforwardReport:
    """Max of ``|G(H^n(v)) - 2^n t|`` over all polyline vertices ``v``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    target = (2 ** n) * eq_set.level_t
    worst = 0.0
    count = 0
    for line in eq_set.polylines:
        for v in line:
            w = complex(v)
            for _ in range(n):
                w = H_apply(p, w)
            worst = max(worst, abs(greens_value(p, profile, w, budget, tol) - target))
            count += 1
    return PushforwardReport(n, target, worst, count)
