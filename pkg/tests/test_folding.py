import math
import xml.etree.ElementTree as ET

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import cKDTree

from powerinterp.errors import (DegenerateCell, DegenerateDegrees, InsideDisk, OnSlitWithoutSide,
                                OutsideAnnulus, OutsideStrip)
from powerinterp.folding import (branched_data, build_cell, build_fold_region, cell_svg, eta,
                                 g_annulus, g_annulus_arrays, in_fold_support, on_slit, psi,
                                 sigma, tau)
from powerinterp.logpoint import LogPoint, log_residual, wrap_angle

PI = math.pi
ACCEPT_NM = [(2, 4), (2, 5), (2, 6), (3, 7), (8, 24)]


# -- cell --------------------------------------------------------------------

@pytest.mark.parametrize("m", range(2, 9))
def test_cell_triangle_count_and_area(m):
    cell = build_cell(m)
    assert len(cell.domain) == m + 2
    area = 0.0
    for P in cell.domain:
        e1, e2 = P[1] - P[0], P[2] - P[0]
        area += abs(e1.real * e2.imag - e1.imag * e2.real) / 2
    assert area == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_cell_interiors_disjoint(m):
    cell = build_cell(m)
    rng = np.random.default_rng(m)
    z = rng.random(4000) + 1j * rng.random(4000)
    hits = np.zeros(z.shape, dtype=int)
    for P0, P1, P2 in cell.domain:
        e1, e2 = P1 - P0, P2 - P0
        det = e1.real * e2.imag - e1.imag * e2.real
        d = z - P0
        l1 = (d.real * e2.imag - d.imag * e2.real) / det
        l2 = (e1.real * d.imag - e1.imag * d.real) / det
        hits += (l1 > 1e-9) & (l2 > 1e-9) & (1 - l1 - l2 > 1e-9)
    assert hits.max() == 1


@pytest.mark.parametrize("m", [2, 3, 4, 7])
def test_cell_vertex_correspondence(m):
    cell = build_cell(m)
    for j in range(m + 1):
        v = 1 + 1j * j / m
        assert psi(v, m) == pytest.approx(v, abs=1e-12)
    for j in range(1, m):
        assert psi(1j + j / (2 * m - 2), m, side="below") == pytest.approx(1j * (j + 1) / m, abs=1e-12)
    assert psi(1j, m, side="below") == pytest.approx(1j / m, abs=1e-12)
    assert psi(0, m) == 0
    assert np.allclose(cell.domain[0], cell.image[0])
    assert cell.names[0] == "identity"


def test_cell_m2_examples():
    cell = build_cell(2)
    assert np.allclose(cell.domain[0], [0, 1, 1 + 0.5j])
    k = cell.names.index("slit0")
    assert np.allclose(cell.domain[k], [1j, 1j + 0.5, 1 + 0.5j])
    assert np.allclose(cell.image[k], [0.5j, 1j, 1 + 0.5j])
    assert len(build_cell(3).domain) == 5


@pytest.mark.parametrize("m", [2, 3, 6])
def test_cell_edges_continuous(m):
    cell = build_cell(m)
    edges = {}
    for k, tri in enumerate(cell.domain):
        for a, b in ((0, 1), (1, 2), (0, 2)):
            key = frozenset((complex(round(tri[a].real, 12), round(tri[a].imag, 12)),
                             complex(round(tri[b].real, 12), round(tri[b].imag, 12))))
            edges.setdefault(key, []).append((k, tri[a], tri[b]))
    shared = [ks for ks in edges.values() if len(ks) == 2]
    assert shared
    for (k1, p, q), (k2, _, _) in shared:
        for lam in (0.25, 0.5, 0.75):
            z = p + lam * (q - p)
            u1 = cell.a[k1] * z + cell.b[k1] * np.conj(z) + cell.off[k1]
            u2 = cell.a[k2] * z + cell.b[k2] * np.conj(z) + cell.off[k2]
            assert abs(u1 - u2) < 1e-12


def test_cell_dilatation_oracle_and_monotone():
    prev = 0.0
    for m in range(2, 13):
        cell = build_cell(m)
        for k in range(len(cell.domain)):
            sv = np.linalg.svd(cell.affine_matrix(k), compute_uv=False)
            assert cell.K_tri[k] == pytest.approx(sv[0] / sv[1], rel=1e-12)
        assert np.all(np.isfinite(cell.K_tri))
        assert cell.K_tri.max() >= prev - 1e-12
        prev = cell.K_tri.max()


def test_cell_degenerate():
    with pytest.raises(DegenerateCell):
        build_cell(1)


# -- psi / eta ---------------------------------------------------------------

def test_psi_examples():
    assert psi(0.5 + 0.25j, 2) == pytest.approx(0.5 + 0.25j, abs=1e-14)
    assert psi(0.5j, 2) == pytest.approx(0.25j, abs=1e-14)
    assert psi(1 + 0.7j, 5) == pytest.approx(1 + 0.7j, abs=1e-14)
    for m in (2, 3, 9):
        assert psi(2j, m) == pytest.approx(2j, abs=1e-14)


def test_psi_slit_needs_side():
    with pytest.raises(OnSlitWithoutSide):
        psi(1j + 0.2, 3)
    lo = psi(1j + 0.2, 3, side="below")
    hi = psi(1j + 0.2, 3, side="above")
    assert lo.real == pytest.approx(0.0, abs=1e-14) and hi.real == pytest.approx(0.0, abs=1e-14)
    assert lo.imag + hi.imag == pytest.approx(2.0, abs=1e-14)


def test_psi_outside_strip():
    with pytest.raises(OutsideStrip):
        psi(1.5 + 0.2j, 3)


@settings(max_examples=200)
@given(st.floats(0, 1), st.floats(-6, 6).filter(lambda y: abs(y - round(y)) > 1e-6),
       st.integers(2, 6))
def test_psi_periodic_and_reflective(x, y, m):
    u = psi(complex(x, y), m)
    assert psi(complex(x, y + 2), m) == pytest.approx(u + 2j, abs=1e-12)
    # Schwarz reflection across Im = 0
    assert psi(complex(x, -y), m) == pytest.approx(np.conj(u), abs=1e-12)
    assert -1e-12 <= u.real <= 1 + 1e-12


def test_eta_examples():
    for n, m in ((2, 3), (3, 2), (5, 4)):
        for th in np.linspace(-3, 3, 7):
            z = LogPoint(PI / n, th)
            assert eta(z, n, m).close_to(z, 1e-12)
        assert eta(LogPoint(0.0, 0.0), n, m).close_to(LogPoint(0.0, 0.0), 1e-14)
    z = LogPoint(PI * 1.0, 0.3 * PI)
    assert eta(z, 1, 2).close_to(z, 1e-12)
    with pytest.raises(OutsideAnnulus):
        eta(LogPoint(2.0, 0.0), 2, 3)


def test_psi_injective_on_period():
    m = 3
    x = (np.arange(100) + 0.5) / 100
    y = (np.arange(100) + 0.37) / 100 * 2.0
    X, Y = np.meshgrid(x, y)
    pts = X.ravel() + 1j * Y.ravel()
    keep = np.abs(pts.imag - 1.0) > 1e-9
    u = psi(pts[keep], m)
    tree = cKDTree(np.column_stack([u.real, u.imag]))
    pairs = tree.query_pairs(1e-10)
    src = pts[keep]
    assert all(abs(src[a] - src[b]) < 1e-8 for a, b in pairs)


# -- sigma ---------------------------------------------------------------------

def _sigma_oracle(z):
    """mu o nu o mu in mpmath, written out from the definitions."""
    z = mpmath.mpc(z)
    w = (z + 1) / (z - 1)
    phi = mpmath.arg(w)
    a = abs(phi)
    phi2 = phi if a <= mpmath.pi / 4 else mpmath.sign(phi) * (3 * a - mpmath.pi / 2)
    v = abs(w) * mpmath.expj(phi2)
    return complex((v + 1) / (v - 1))


def test_sigma_examples():
    assert sigma(2) == pytest.approx(2, abs=1e-15)
    assert abs(sigma(1j)) < 1e-14 and abs(sigma(-1j)) < 1e-14
    # mu(2i) = (3-4i)/5; its angle tripled past -pi/4 gives exactly 13i/9
    assert sigma(2j) == pytest.approx(13j / 9, abs=1e-14)
    assert sigma(2j) == pytest.approx(_sigma_oracle(2j), abs=1e-14)
    assert abs(sigma(2j) - 1.4441j) < 1e-3


def test_sigma_against_oracle():
    rng = np.random.default_rng(3)
    r = 1 + 3 * rng.random(200)
    th = 2 * PI * rng.random(200)
    z = r * np.exp(1j * th)
    got = sigma(z)
    want = np.array([_sigma_oracle(x) for x in z])
    assert np.max(np.abs(got - want)) < 1e-12


def test_sigma_identifies_conjugates_on_circle():
    th = np.linspace(0.05, PI - 0.05, 50)
    a = sigma(np.exp(1j * th))
    b = sigma(np.exp(-1j * th))
    assert np.allclose(a, b, atol=1e-12)
    assert np.all(np.abs(a.imag) < 1e-12) and np.all(np.abs(a.real) <= 1 + 1e-12)


def test_sigma_inside_disk():
    with pytest.raises(InsideDisk):
        sigma(0.5)


def test_fold_support():
    assert not in_fold_support(100)
    assert in_fold_support(1.01j)
    assert not in_fold_support(0.5j)


# -- tau and fold regions --------------------------------------------------------

def test_tau_examples():
    assert tau(0.0, 2, 5) == 0
    assert tau(PI, 2, 5) == pytest.approx(4 * PI / 5, abs=1e-14)
    th = np.linspace(-3, 3, 13)
    assert np.allclose(wrap_angle(tau(th, 3, 6)), wrap_angle(th), atol=1e-14)
    assert np.allclose(tau(th, 2, 5, radial=1.0), wrap_angle(th), atol=1e-14)


@pytest.mark.parametrize("n,M", [(2, 5), (3, 7), (4, 11), (5, 12), (7, 30)])
def test_tau_covers_circle(n, M):
    m, p = M // n, n - M + n * (M // n)
    assert (n * m / M) * (2 * p * PI / n) + ((m + 1) * n / M) * (2 * PI * (n - p) / n) == pytest.approx(2 * PI)
    assert m * p + (m + 1) * (n - p) == M
    assert 1 <= p <= n and (p == n) == (M % n == 0)


def test_fold_region_examples():
    r = build_fold_region(2, 6)
    assert (r.m, r.p, r.cell_params) == (3, 2, (3, 3))
    r = build_fold_region(2, 5)
    assert (r.m, r.p, r.cell_params) == (2, 1, (2, 3))
    r = build_fold_region(3, 6)
    assert (r.m, r.p, r.cell_params) == (2, 3, (2, 2, 2))
    with pytest.raises(DegenerateDegrees):
        build_fold_region(3, 3)


@pytest.mark.parametrize("n,M", ACCEPT_NM + [(3, 10), (4, 9)])
def test_fold_region_arcs_disjoint(n, M):
    r = build_fold_region(n, M)
    arcs = sorted(a for a in r.slit_arcs if a is not None)
    for (a0, a1), (b0, b1) in zip(arcs, arcs[1:]):
        assert a1 < b0
    assert sum(r.cell_params) == M


# -- g_annulus ---------------------------------------------------------------------

@pytest.mark.parametrize("n,M", ACCEPT_NM)
@pytest.mark.parametrize("logR", [0.0, math.log(10)])
@pytest.mark.parametrize("c", [(0.0, 0.0), (math.log(2), PI / 2)])
def test_boundary_identities(n, M, logR, c):
    region = build_fold_region(n, M)
    t = wrap_angle(2 * PI * (np.arange(1000) + 0.5) / 1000)
    s = np.full_like(t, logR)
    got = g_annulus_arrays(s, t, region, logR, c)
    assert log_residual(*got, c[0] + n * s, c[1] + n * t).max() < 1e-9
    s2 = s + PI / n
    got = g_annulus_arrays(s2, t, region, logR, c)
    want = (c[0] + M * s2 - (M - n) * logR, c[1] + M * t)
    assert log_residual(*got, *want).max() < 1e-9


@pytest.mark.parametrize("n,M", ACCEPT_NM)
def test_slit_continuity(n, M):
    region = build_fold_region(n, M)
    x = (np.arange(100) + 0.5) / 200
    for k in range(n):
        y = np.full_like(x, 2.0 * k + 1.0)
        if not np.all(on_slit(region, x, y)):
            continue
        s, t = x * PI / n, wrap_angle(y * PI / n)
        a = g_annulus_arrays(s, t, region, 0.0, side="below")
        b = g_annulus_arrays(s, t, region, 0.0, side="above")
        assert log_residual(*a, *b).max() < 1e-8


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ACCEPT_NM), st.floats(-50, 50), st.floats(-5, 5), st.floats(-3, 3))
def test_boundary_identity_random_scale(nm, logR, cs, ct):
    n, M = nm
    region = build_fold_region(n, M)
    t = wrap_angle(np.linspace(-PI, PI, 64, endpoint=False) + 0.01)
    s = np.full_like(t, logR + PI / n)
    got = g_annulus_arrays(s, t, region, logR, (cs, ct))
    want = (cs + M * s - (M - n) * logR, ct + M * t)
    assert log_residual(*got, *want).max() < 1e-9 * max(1.0, abs(logR))


def test_g_examples():
    assert g_annulus(LogPoint(0.0, PI / 2), 2, 6).close_to(LogPoint(0.0, PI), 1e-12)
    z = LogPoint(0.3, 1.0)
    assert g_annulus(z, 3, 3, 0.0).close_to(LogPoint(0.9, 3.0), 1e-14)
    with pytest.raises(OutsideAnnulus):
        g_annulus(LogPoint(5.0, 0.0), 2, 6)


def test_branched_data_examples():
    bd = branched_data(2, 6)
    assert len(bd.branched_points) == 4
    pts = {(round(b.point.log_mod, 12), round(b.point.arg, 12)) for b in bd.branched_points}
    want = {(round(PI / 2 * l / 4, 12), round(wrap_angle(PI * (2 * k - 1) / 2), 12))
            for l in (0, 1) for k in (1, 2)}
    assert pts == want
    first = [b for b in bd.branched_points if b.k == 1 and b.l == 0][0]
    assert first.point.close_to(LogPoint.from_complex(1j), 1e-14)
    plus, minus = bd.branched_values
    assert plus.close_to(LogPoint(0.0, 0.0)) and minus.close_to(LogPoint(0.0, PI))
    assert bd.origin_multiplicity == 2


@pytest.mark.parametrize("n,M", ACCEPT_NM)
def test_branched_values_hit(n, M):
    region = build_fold_region(n, M)
    bd = branched_data(n, M, 1.0, (0.5, 0.2))
    for b in bd.branched_points:
        v = g_annulus_arrays(np.array([b.point.log_mod]), np.array([b.point.arg]), region, 1.0,
                             (0.5, 0.2))
        target = bd.branched_values[0 if b.sign > 0 else 1]
        assert log_residual(*v, target.log_mod, target.arg)[0] < 1e-8
    for z in bd.zeros:
        v = g_annulus_arrays(np.array([z.point.log_mod]), np.array([z.point.arg]), region, 1.0)
        assert v[0][0] < -25


def test_cell_svg():
    for m, tris in ((2, 4), (3, 5)):
        doc = cell_svg(build_cell(m))
        root = ET.fromstring(doc)
        assert root.get("version") == "1.1"
        ns = "{http://www.w3.org/2000/svg}"
        assert len(root.findall(f"{ns}polygon")) == 2 * tris
        assert any(el.get("stroke") == "#dd0000" for el in root.findall(f"{ns}line"))
        circles = root.findall(f"{ns}circle")
        # panel 0: black at 0 and 1, white at i
        def color_at(x, y):
            for el in circles:
                if abs(float(el.get("cx")) - x) < 1e-3 and abs(float(el.get("cy")) - y) < 1e-3:
                    return el.get("class")
        size, margin = 320, 30
        assert color_at(margin, margin + size) == "black"
        assert color_at(margin + size, margin + size) == "black"
        assert color_at(margin, margin) == "white"
