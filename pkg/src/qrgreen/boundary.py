"""Radial boundary function of the escaping set of ``H_{K,theta,0}``.

The bounded orbit set of ``H_{K,theta,0}`` is starlike about 0, so each ray
``{t e^{i phi}}`` crosses its boundary exactly once, at radius ``b(phi)``.
``compute_profile`` finds those radii by bisection on a uniform set of
angles and ``tau0`` turns them into the radial normalisation
``|z| / b(arg z)``, which conjugates ``H_{K,theta,0}`` to squaring on the
positive reals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .core_maps import stretch_matrix

DEFAULT_ANGLES = 4096
DEFAULT_TOL = 1e-10
PROBE_BUDGET = 2000
PROBE_RADIUS = 4.0
# homogeneity refinements applied on top of linear interpolation
DEFAULT_DEPTH = 20

_HEADER = "# qrgreen boundary profile v1: K theta n_angles tol"


class BracketError(RuntimeError):
    """The bisection bracket ``[1/(2K^2), 1 + tol]`` does not straddle the boundary."""


@dataclass(frozen=True)
class BoundaryProfile:
    K: float
    theta: float
    radii: np.ndarray
    tol: float
    log_radii: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        radii = np.ascontiguousarray(self.radii, dtype=float)
        if radii.ndim != 1 or radii.size == 0 or not np.all(radii > 0):
            raise ValueError("radii must be a non-empty array of positive values")
        radii.setflags(write=False)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "log_radii", np.log(radii))

    @property
    def n_angles(self) -> int:
        return self.radii.size

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_angles) / self.n_angles

    @property
    def key(self) -> str:
        return f"K={self.K!r},theta={self.theta!r},n={self.n_angles},tol={self.tol!r}"

    def matches(self, K: float, theta: float) -> bool:
        return math.isclose(self.K, K, rel_tol=1e-12) and math.isclose(
            self.theta, theta, rel_tol=1e-12, abs_tol=1e-12)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(_HEADER + "\n")
            fh.write(f"{self.K!r} {self.theta!r} {self.n_angles} {self.tol!r}\n")
            for r in self.radii:
                fh.write(f"{float(r)!r}\n")

    @classmethod
    def load(cls, path) -> "BoundaryProfile":
        lines = [ln for ln in Path(path).read_text().splitlines()
                 if ln.strip() and not ln.startswith("#")]
        try:
            K, theta, n, tol = lines[0].split()
            radii = np.array([float(v) for v in lines[1:]])
            n = int(n)
        except (IndexError, ValueError) as exc:
            raise ValueError(f"{path}: malformed profile table") from exc
        if radii.size != n:
            raise ValueError(f"{path}: header announces {n} radii, found {radii.size}")
        return cls(float(K), float(theta), radii, float(tol))


def unit_profile(n_angles: int = 64) -> BoundaryProfile:
    """Profile of the polynomial case ``K = 1``, where ``b`` is identically 1."""
    return BoundaryProfile(1.0, 0.0, np.ones(n_angles), 0.0)


def compute_profile(K: float, theta: float = 0.0, n_angles: int = DEFAULT_ANGLES,
                    tol: float = DEFAULT_TOL, budget: int = PROBE_BUDGET) -> BoundaryProfile:
    """Sample ``b_{K,theta}`` at ``phi_j = 2 pi j / n_angles`` by radial bisection.

    The bracket is ``[1/(2K^2), 1 + tol]``: the small disk lies in the
    bounded orbit set and ``|H_{K,theta,0}(z)| >= |z|**2``. Probes that
    remain bounded for ``budget`` steps count as bounded.
    """
    if not K > 1:
        raise ValueError("compute_profile needs K > 1; conjugate K < 1 first")
    if n_angles < 16:
        raise ValueError("n_angles must be at least 16")
    if not tol > 0:
        raise ValueError("tol must be positive")
    m = stretch_matrix(K, theta)
    angles = 2.0 * np.pi * np.arange(n_angles) / n_angles
    lo = 1.0 / (2.0 * K * K)
    radii, status = _kernels.profile_rays(m[0, 0], m[0, 1], m[1, 1], angles, lo, 1.0 + tol,
                                          float(tol), int(budget), PROBE_RADIUS, lo)
    bad = np.flatnonzero(status)
    if bad.size:
        j = bad[0]
        which = "lower end escapes" if status[j] == 1 else "upper end stays bounded"
        raise BracketError(f"bracket fails on ray {j} (phi={angles[j]:.6g}): {which}")
    return BoundaryProfile(float(K), float(theta), radii, float(tol))


def _stretch_entries(profile: BoundaryProfile):
    m = stretch_matrix(profile.K, profile.theta)
    return m[0, 0], m[0, 1], m[1, 1]


def b_at(profile: BoundaryProfile, phi, depth: int = DEFAULT_DEPTH):
    """Boundary radius at angle(s) ``phi``; exact at the sample angles.

    Between samples the log-radius is interpolated linearly in angle after
    ``depth`` applications of ``b(phi)**2 |H_0(e^{i phi})| = b(arg H_0(e^{i phi}))``.
    ``depth=0`` is plain linear interpolation.
    """
    m11, m12, m22 = _stretch_entries(profile)
    if np.ndim(phi) == 0:
        return math.exp(_kernels.log_boundary(m11, m12, m22, profile.log_radii,
                                              float(phi), int(depth)))
    phi = np.asarray(phi, dtype=float)
    out = np.array([_kernels.log_boundary(m11, m12, m22, profile.log_radii, a, int(depth))
                    for a in phi.reshape(-1)])
    return np.exp(out).reshape(phi.shape)


def tau0(profile: BoundaryProfile, z: complex, depth: int = DEFAULT_DEPTH) -> float:
    """``|z| / b(arg z)``, with ``tau0(0) = 0``."""
    z = complex(z)
    if z == 0:
        return 0.0
    m11, m12, m22 = _stretch_entries(profile)
    return math.exp(_kernels.log_tau0(m11, m12, m22, profile.log_radii, z.real, z.imag,
                                      int(depth)))
