import csv
import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qrgreen.core_maps import H_apply, MapParams, jacobian
from qrgreen.escape import GridSpec, mandelbrot_member
from qrgreen.fixed_points import (CSV_HEADER, ManifoldError, Region, Stability, classify,
                                  fixed_points_closed_form, fixed_points_general, local_inverse,
                                  periodic_points, region_classify, region_geometry,
                                  stability_from_code, stability_grid, stability_of_region,
                                  trace_manifolds, write_records_csv)

SADDLE = MapParams(5.0, 0.0, -0.1)


def expected_count(K, c):
    """Real roots for c < 1/(4K^2), a conjugate pair for c > 1/(2K) - 1/4."""
    n = 0
    if c < 1 / (4 * K * K):
        n += 2
    elif c == 1 / (4 * K * K):
        n += 1
    if c > 1 / (2 * K) - 0.25:
        n += 2
    return n


def sorted_points(records):
    return sorted((r.z for r in records), key=lambda z: (round(z.real, 8), z.imag))


# -- closed forms -----------------------------------------------------------------

def test_saddle_example():
    recs = fixed_points_closed_form(5.0, -0.1)
    assert len(recs) == 4
    x_plus = (1 + math.sqrt(11)) / 50
    x_minus = (1 - math.sqrt(11)) / 50
    w = 0.1 + math.sqrt(0.05) * 1j
    got = sorted_points(recs)
    ref = sorted([complex(x_minus), complex(x_plus), w, w.conjugate()],
                 key=lambda z: (round(z.real, 8), z.imag))
    assert np.allclose(got, ref, atol=1e-14)
    by_z = {round(r.z.real, 6) + 1j * round(r.z.imag, 6): r for r in recs}
    saddle = by_z[round(x_plus, 6)]
    assert saddle.stability is Stability.SADDLE
    assert saddle.eigen.lambda1.real == pytest.approx(0.8633, abs=1e-4)
    assert saddle.eigen.lambda2.real == pytest.approx(4.3166, abs=1e-4)
    for r in recs:
        if r.z.imag != 0:
            assert r.stability is Stability.REPELLING_REAL


def test_attracting_example():
    p = MapParams(0.5, 0.0, -1.5 - 0.5j)
    recs = fixed_points_general(p)
    att = [r for r in recs if r.stability is Stability.ATTRACTING]
    assert len(att) == 1
    z = att[0].z
    assert abs(z - (-1.19493 - 0.22780j)) < 1e-5
    assert abs(att[0].eigen.lambda1) == pytest.approx(0.90427, abs=1e-5)
    assert abs(att[0].eigen.lambda1.imag) == pytest.approx(0.1206, abs=1e-4)
    # the attracting point sits in the filled set but 0 escapes
    assert mandelbrot_member(0.5, 0.0, -1.5 - 0.5j).escaped


# at c = 1/(2K) - 1/4 the pair collapses onto the real root 1/(2K)
@pytest.mark.parametrize("K, c, n", [(2.0, 1 / 16, 3), (2.0, 0.0, 2), (3.0, -1 / 12, 2),
                                     (5.0, -0.15, 2), (5.0, 0.01, 3)])
def test_degenerate_counts(K, c, n):
    recs = fixed_points_closed_form(K, c)
    assert len(recs) == n
    for r in recs:
        assert abs(H_apply(MapParams(K, 0.0, c), r.z) - r.z) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(1.1, 6.0), st.floats(-1.0, 0.3))
def test_count_law(K, c):
    recs = fixed_points_closed_form(K, c)
    # the boundary values of c are measure zero; skip values within rounding of them
    if min(abs(c - 1 / (4 * K * K)), abs(c - (1 / (2 * K) - 0.25))) > 1e-9:
        assert len(recs) == expected_count(K, c)


@settings(max_examples=15, deadline=None)
@given(st.floats(1.5, 6.0), st.floats(-0.8, 0.2))
def test_general_solver_matches_closed_form(K, c):
    if min(abs(c - 1 / (4 * K * K)), abs(c - (1 / (2 * K) - 0.25))) < 1e-3:
        return
    ref = sorted_points(fixed_points_closed_form(K, c))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        got = sorted_points(fixed_points_general(MapParams(K, 0.0, c)))
    assert len(got) == len(ref)
    assert np.allclose(got, ref, atol=1e-9)


def test_four_point_window_outside_the_connectedness_locus():
    K = 5.0
    for c in np.linspace(-0.15, -0.08, 22)[1:-1]:
        assert mandelbrot_member(K, 0.0, c, budget=2000).escaped
        assert len(fixed_points_closed_form(K, c)) == 4


def test_general_residuals_and_dedup():
    p = MapParams(2.0, 0.4, 0.1 - 0.2j)
    recs = fixed_points_general(p)
    assert 1 <= len(recs) <= 4
    for r in recs:
        assert r.residual <= 1e-10
        assert abs(H_apply(p, r.z) - r.z) <= 1e-10
    zs = [r.z for r in recs]
    assert all(abs(a - b) > 1e-8 for i, a in enumerate(zs) for b in zs[i + 1:])


# -- periodic points ----------------------------------------------------------------

def test_period_two_of_squaring():
    recs = periodic_points(MapParams(1.0), 2)
    got = {(round(r.z.real, 9), round(r.z.imag, 9)): r.minimal_period for r in recs}
    w = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))
    ref = {(0.0, 0.0): 1, (1.0, 0.0): 1, (round(w.real, 9), round(w.imag, 9)): 2,
           (round(w.real, 9), round(-w.imag, 9)): 2}
    assert {k: v for k, v in got.items()} == {(abs(a) if a == 0 else a, b): v
                                              for (a, b), v in ref.items()}


def test_period_two_orbits_close_up():
    p = MapParams(3.0, 0.2, -0.4 + 0.1j)
    for r in periodic_points(p, 2):
        z2 = H_apply(p, H_apply(p, r.z))
        assert abs(z2 - r.z) <= 1e-10
        if r.minimal_period == 2:
            assert abs(H_apply(p, r.z) - r.z) > 1e-8


def test_period_range():
    with pytest.raises(ValueError):
        periodic_points(SADDLE, 0)
    with pytest.raises(ValueError):
        periodic_points(SADDLE, 7)


def test_empty_search_warns(monkeypatch):
    import qrgreen.fixed_points as fp
    empty = np.zeros(0)
    monkeypatch.setattr(fp, "_newton", lambda p, x, y, n: (empty, empty, empty))
    with pytest.warns(RuntimeWarning):
        assert periodic_points(SADDLE, 1, seeds_per_axis=4) == []


# -- classification -------------------------------------------------------------------

def test_classify_examples():
    r = classify(MapParams(1.0), 0j)
    assert r.stability is Stability.ATTRACTING
    r = classify(MapParams(1.0), 1 + 0j)
    assert r.stability is Stability.REPELLING_REAL
    # |lambda| = 1 at the unit-modulus multiplier
    r = classify(MapParams(1.0, 0.0, 0.25), 0.5 + 0j)
    assert r.stability is Stability.INDETERMINATE
    with pytest.raises(ValueError):
        classify(SADDLE, 0.3 + 0j)


def test_classify_repelling_pair():
    p = MapParams(1.0, 0.0, 1j)
    # fixed points of z^2 + i solve z^2 - z + i = 0
    z = (1 + np.sqrt(1 - 4j)) / 2
    r = classify(p, z)
    assert r.stability is Stability.REPELLING_COMPLEX_PAIR
    assert abs(r.eigen.lambda1) == pytest.approx(abs(2 * z))


def test_region_geometry_k2():
    g = region_geometry(2.0)
    assert g.gamma == (32.0, 8.0)
    assert g.ellipse_centers == (3 / 16, -3 / 16)
    assert (g.semi_axis_h, g.semi_axis_v) == (1 / 16, 1 / 8)
    assert g.line_slope == pytest.approx(math.sqrt(2) / 2)
    for z in g.tangency_points:
        sign = 1 if z.real > 0 else -1
        assert g.gamma_form(z) == pytest.approx(1.0)
        assert g.ellipse_form(z, sign) == pytest.approx(1.0)
        assert abs(g.line_residual(z, 1 if z.real * z.imag > 0 else -1)) < 1e-15
    with pytest.raises(ValueError):
        region_geometry(1.0)


def test_region_examples():
    g = region_geometry(2.0)
    assert region_classify(g, 0j) is Region.INSIDE_GAMMA
    assert region_classify(g, 3 / 16 + 0j) is Region.IN_ELLIPSE_PLUS
    assert region_classify(g, -3 / 16 + 0j) is Region.IN_ELLIPSE_MINUS
    assert region_classify(g, 1 + 1j) is Region.OUTSIDE_GAMMA
    assert region_classify(g, complex(0, 1 / math.sqrt(8))) is Region.ON_BOUNDARY


@pytest.mark.parametrize("K", [2.0, 5.0])
def test_regions_agree_with_eigenvalues(K):
    g = region_geometry(K)
    spec = GridSpec(-0.6, 0.6, -0.45, 0.45, 240, 180)
    codes = stability_grid(K, 0.0, spec)
    bad = 0
    for j in range(0, 180, 3):
        for i in range(0, 240, 3):
            z = spec.point(i, j)
            want = stability_of_region(region_classify(g, z, band=1e-6))
            if want is not None and stability_from_code(codes[j, i]) is not want:
                bad += 1
    assert bad == 0


@settings(max_examples=100, deadline=None)
@given(st.floats(0.3, 5.0), st.floats(-1.5, 1.5), st.floats(-1, 1), st.floats(-1, 1))
def test_stability_grid_matches_scalar(K, theta, x, y):
    spec = GridSpec(x - 1e-3, x + 1e-3, y - 1e-3, y + 1e-3, 1, 1)
    code = stability_from_code(stability_grid(K, theta, spec)[0, 0])
    p = MapParams(K, theta)
    z = spec.point(0, 0)
    m = jacobian(p, z)
    disc = 0.25 * (m[0, 0] - m[1, 1]) ** 2 + m[0, 1] * m[1, 0]
    assume(abs(disc) > 1e-9 * (1 + np.abs(m).max()) ** 2)
    # any point is a fixed point for a suitable c, and the Jacobian ignores c
    q = MapParams(K, theta, z - H_apply(p, z))
    ref = classify(q, z, residual_tol=1e-6).stability
    assert code is ref


def test_csv_header(tmp_path):
    path = tmp_path / "fp.csv"
    write_records_csv(fixed_points_closed_form(5.0, -0.1), path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == CSV_HEADER
    assert len(rows) == 5
    assert {r[7] for r in rows[1:]} == {"saddle", "repelling_real"}


# -- manifolds --------------------------------------------------------------------------

@pytest.fixture(scope="module")
def saddle_record():
    x = (1 + math.sqrt(11)) / 50
    return classify(SADDLE, complex(x))


@pytest.fixture(scope="module")
def manifolds(saddle_record):
    return trace_manifolds(SADDLE, saddle_record, arc_budget=1500)


def test_manifold_start_directions(manifolds, saddle_record):
    # at theta = 0 on the real axis the Jacobian is diagonal: the stable
    # direction is vertical and the unstable one horizontal
    z0 = saddle_record.z
    for curve, vertical in ((manifolds.stable, True), (manifolds.unstable, False)):
        k = int(np.argmin(np.abs(curve - z0)))
        d = curve[k + 1] - z0
        if vertical:
            assert abs(d.real) < 1e-8 * abs(d)
        else:
            assert abs(d.imag) < 1e-8 * abs(d)


def test_stable_manifold_reaches_repelling_pair(manifolds):
    w = 0.1 + math.sqrt(0.05) * 1j
    ends = manifolds.stable[[0, -1]]
    assert min(abs(ends - w)) < 1e-4 and min(abs(ends - w.conjugate())) < 1e-4


def test_stable_manifold_is_invariant(manifolds, saddle_record):
    # H maps the stable curve into itself, up to the vertex spacing
    pts = manifolds.stable[::40]
    img = np.array([H_apply(SADDLE, z) for z in pts])
    assert np.all(np.abs(img.real - saddle_record.z.real) < 0.05)
    assert np.all(np.abs(img.imag) <= np.abs(pts.imag) + 1e-12)


def test_unstable_manifold_is_on_the_axis(manifolds):
    assert np.all(np.abs(manifolds.unstable.imag) < 1e-12)


def test_manifold_argument_errors():
    attracting = classify(MapParams(1.0), 0j)
    with pytest.raises(ValueError):
        trace_manifolds(MapParams(1.0), attracting)
    with pytest.raises(ManifoldError):
        local_inverse(MapParams(2.0), 1.0 + 0j, 0j, max_iter=0)


def test_local_inverse():
    p = MapParams(3.0, 0.3, 0.1j)
    z = 0.2 - 0.1j
    w = local_inverse(p, H_apply(p, z), z + 1e-3)
    assert abs(w - z) < 1e-12
    assert np.linalg.det(jacobian(p, z)) != 0
