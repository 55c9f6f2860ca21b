"""Green's functions, escape sets and fixed points of degree-two quasiregular maps

``H_{K,theta,c}(z) = h_{K,theta}(z)**2 + c`` with the affine stretch
``h_{K,theta}(z) = (K+1)/2 z + e^{2i theta} (K-1)/2 conj(z)``.
"""

from .core_maps import MapParams, H_apply, h_apply, jacobian, eigenvalues
from .escape import GridSpec, iterate_orbit, mandelbrot_member, real_slice
from .boundary import BoundaryProfile, compute_profile, b_at, tau0
from .greens import (critical_level, extract_equipotential, greens_grid, greens_value,
                     predicted_components, profile_for)
from .fixed_points import (Stability, Region, classify, fixed_points_closed_form,
                           fixed_points_general, periodic_points, region_classify,
                           region_geometry, trace_manifolds)

__version__ = "0.1.0"
