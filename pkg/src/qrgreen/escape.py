"""Orbits, escape-time grids and Mandelbrot-set membership."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core_maps import MapParams, stretch_matrix

DEFAULT_BUDGET = 1000

# membership radius for the critical orbit; sharp for K = 1/2
MANDELBROT_RADIUS = 8.0


class OrbitStatus(enum.Enum):
    ESCAPED = "escaped"
    BOUNDED = "bounded_budget_exhausted"


@dataclass(frozen=True)
class OrbitResult:
    status: OrbitStatus
    iterations: int
    final_z: complex

    @property
    def escaped(self) -> bool:
        return self.status is OrbitStatus.ESCAPED


@dataclass(frozen=True)
class GridSpec:
    """A window of the plane sampled at cell centres.

    Pixel ``(i, j)`` (column ``i``, row ``j``) sits at
    ``x_min + (i + 1/2) dx`` and ``y_max - (j + 1/2) dy``; row 0 is the top.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("window must satisfy x_min < x_max and y_min < y_max")
        if int(self.width) < 1 or int(self.height) < 1:
            raise ValueError("width and height must be positive")
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @classmethod
    def centered(cls, center: complex, half_width: float, width: int, height: int) -> "GridSpec":
        half_height = half_width * height / width
        return cls(center.real - half_width, center.real + half_width,
                   center.imag - half_height, center.imag + half_height, width, height)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.width

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / self.height

    def xs(self) -> np.ndarray:
        return self.x_min + (np.arange(self.width) + 0.5) * self.dx

    def ys(self) -> np.ndarray:
        return self.y_max - (np.arange(self.height) + 0.5) * self.dy

    def point(self, i: int, j: int) -> complex:
        return complex(self.x_min + (i + 0.5) * self.dx, self.y_max - (j + 0.5) * self.dy)

    def pixel_of(self, z: complex) -> tuple[int, int]:
        """Column and row of the pixel containing ``z``."""
        i = int(math.floor((z.real - self.x_min) / self.dx))
        j = int(math.floor((self.y_max - z.imag) / self.dy))
        if not (0 <= i < self.width and 0 <= j < self.height):
            raise ValueError(f"{z} lies outside the window")
        return i, j


@dataclass(frozen=True)
class EscapeGrid:
    """Escape counts per pixel, shape ``(height, width)``; -1 marks bounded within budget."""

    spec: GridSpec
    counts: np.ndarray
    budget: int

    @property
    def bounded(self) -> np.ndarray:
        return self.counts < 0


def escape_radius(p: MapParams) -> float:
    """Radius beyond which every orbit of ``H_p`` escapes.

    ``max(|c|, 2)`` for ``K >= 1``, where ``|H(z)| >= |z|**2 / 2``. For
    ``K < 1`` the stretch can shrink by ``K``, so the bound is taken through
    the conjugation ``z -> K**2 z``: ``max(K**2 |c|, 2) / K**2``.
    """
    q, s = p.conjugated()
    return max(abs(q.c), 2.0) / s


def _kernel_args(p: MapParams):
    m = stretch_matrix(p.K, p.theta)
    return m[0, 0], m[0, 1], m[1, 1], p.c.real, p.c.imag


def iterate_orbit(p: MapParams, z: complex, budget: int = DEFAULT_BUDGET,
                  radius: float | None = None) -> OrbitResult:
    """Iterate ``H`` from ``z`` until ``|z_n| > radius`` or ``budget`` steps pass."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if radius is None:
        radius = escape_radius(p)
    elif radius < escape_radius(p):
        raise ValueError(f"radius {radius} is below the escape radius {escape_radius(p)}")
    z = complex(z)
    n, x, y = _kernels.escape_point(*_kernel_args(p), z.real, z.imag, int(budget), float(radius))
    if n < 0:
        return OrbitResult(OrbitStatus.BOUNDED, int(budget), complex(x, y))
    return OrbitResult(OrbitStatus.ESCAPED, int(n), complex(x, y))


def mandelbrot_radius(p: MapParams) -> float:
    return max(escape_radius(p), MANDELBROT_RADIUS)


def mandelbrot_member(K: float, theta: float, c: complex,
                      budget: int = DEFAULT_BUDGET) -> OrbitResult:
    """Orbit of the critical point 0 under ``H_{K,theta,c}``.

    ``ESCAPED`` proves ``c`` is outside ``M_{K,theta}``; ``BOUNDED`` only
    means the orbit stayed put for ``budget`` steps.
    """
    p = MapParams(K, theta, c)
    return iterate_orbit(p, 0j, budget, mandelbrot_radius(p))


def real_slice(K: float) -> tuple[float, float]:
    """``M_{K,0} cap R = [-2/K^2, 1/(4K^2)]``."""
    if not K > 0:
        raise ValueError("K must be positive")
    return -2.0 / (K * K), 1.0 / (4.0 * K * K)


def sample_dynamical_grid(p: MapParams, spec: GridSpec, budget: int = DEFAULT_BUDGET,
                          radius: float | None = None) -> EscapeGrid:
    radius = escape_radius(p) if radius is None else radius
    counts = _kernels.dynamical_grid(*_kernel_args(p), spec.xs(), spec.ys(),
                                     int(budget), float(radius))
    return EscapeGrid(spec, counts, int(budget))


def sample_parameter_grid(K: float, theta: float, spec: GridSpec,
                          budget: int = DEFAULT_BUDGET) -> EscapeGrid:
    m = stretch_matrix(K, theta)
    # per pixel the kernel uses max(|c|, 2, base), which is mandelbrot_radius
    base = max(MANDELBROT_RADIUS, 2.0 / (K * K)) if K < 1 else MANDELBROT_RADIUS
    counts = _kernels.parameter_grid(m[0, 0], m[0, 1], m[1, 1], spec.xs(), spec.ys(),
                                     int(budget), base)
    return EscapeGrid(spec, counts, int(budget))
