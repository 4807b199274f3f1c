"""Quasiregular interpolation between z -> c z^n and z -> c z^M / r^(M-n).

Coordinates used throughout:

* ``w``: normalized log coordinate on the interpolation annulus,
  ``w = (n/pi) * (log z - log r)``, so the annulus is the strip
  ``0 <= Re w <= 1`` and the radial slits sit on ``Im w`` odd,
  ``0 <= Re w <= 1/2``.
* ``u``: the unfolded coordinate ``u = psi_m(w)``.  The slit strip is opened
  onto the plain strip ``0 <= Re u <= 1``; the two sides of the slit through
  ``Im w = 1`` land on ``Re u = 0, 1/m <= Im u <= 2 - 1/m``.

The fundamental cell is the unit square with the slit ``[i, i + 1/2]`` on its
top edge.  Its triangulation is a fan around the apex ``1 + i(m-1)/m``:
identity, left, m-1 slit triangles and top, m+2 pieces in total.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (ContinuityFailure, DegenerateCell, DegenerateDegrees, InsideDisk,
                     OnSlitWithoutSide, OutsideAnnulus, OutsideStrip)
from .logpoint import LogPoint, log_of, log_residual, wrap_angle

EDGE_EPS = 1e-12
SLIT_TOL = 1e-12
_LENS_LOGMOD = math.log1p(math.sqrt(2.0))   # sup of log|z| over the fold support


# -- triangulated cell ---------------------------------------------------------

@dataclass(frozen=True)
class CellMap:
    m: int
    domain: np.ndarray      # (m+2, 3) complex
    image: np.ndarray       # (m+2, 3) complex
    colors: tuple           # per triangle, per vertex: "black" / "white" / None
    a: np.ndarray           # affine part: T(z) = a z + b conj(z) + off
    b: np.ndarray
    off: np.ndarray
    K_tri: np.ndarray
    names: tuple

    @property
    def apex(self) -> complex:
        return 1 + 1j * (self.m - 1) / self.m

    def affine_matrix(self, k: int) -> np.ndarray:
        """Real 2x2 linear part of triangle k."""
        a, b = self.a[k], self.b[k]
        return np.array([[a.real + b.real, -a.imag + b.imag],
                         [a.imag + b.imag, a.real - b.real]])


def _affine(P, Q):
    e1, e2 = P[1] - P[0], P[2] - P[0]
    f1, f2 = Q[1] - Q[0], Q[2] - Q[0]
    A = np.array([[e1, np.conj(e1)], [e2, np.conj(e2)]])
    a, b = np.linalg.solve(A, np.array([f1, f2]))
    off = Q[0] - a * P[0] - b * np.conj(P[0])
    return a, b, off


def _vertex_color(z, m):
    """Black/white labels: black vertices go to +1, white to -1."""
    if abs(z.real - 1) < 1e-12:                      # right edge 1 + ij/m
        j = int(round(z.imag * m))
        return "black" if j % 2 == 0 else "white"
    if abs(z.imag - 1) < 1e-12 and z.real <= 0.5 + 1e-12:   # slit i + j/(2m-2)
        j = int(round(z.real * (2 * m - 2)))
        return "white" if j % 2 == 0 else "black"
    if abs(z) < 1e-12:
        return "black"
    return None


def _image_color(z, m):
    if abs(z.real) < 1e-12 and abs(z.imag) > 1e-12:   # left edge ik/m of the image square
        k = int(round(z.imag * m))
        return "white" if k % 2 == 1 else "black"
    return _vertex_color(z, m)


def build_cell(m: int) -> CellMap:
    """Matched domain/image triangulations of the fundamental cell of psi_m."""
    if m < 2:
        raise DegenerateCell(f"cell parameter m={m} < 2", m=m)
    A = 1 + 1j * (m - 1) / m
    dom = [(0, 1, A), (0, 1j, A)]
    img = [(0, 1, A), (0, 1j / m, A)]
    names = ["identity", "left"]
    for j in range(m - 1):
        dom.append((1j + j / (2 * m - 2), 1j + (j + 1) / (2 * m - 2), A))
        img.append((1j * (j + 1) / m, 1j * (j + 2) / m, A))
        names.append(f"slit{j}")
    dom.append((1j + 0.5, 1 + 1j, A))
    img.append((1j, 1 + 1j, A))
    names.append("top")
    dom = np.array(dom, dtype=complex)
    img = np.array(img, dtype=complex)
    coeffs = np.array([_affine(P, Q) for P, Q in zip(dom, img)])
    a, b, off = coeffs[:, 0], coeffs[:, 1], coeffs[:, 2]
    K = (np.abs(a) + np.abs(b)) / (np.abs(a) - np.abs(b))
    colors = tuple(tuple(_vertex_color(v, m) for v in tri) for tri in dom)
    return CellMap(m=m, domain=dom, image=img, colors=colors, a=a, b=b, off=off,
                   K_tri=K, names=tuple(names))


def _locate(cell: CellMap, z: np.ndarray) -> np.ndarray:
    """Index of the containing triangle, -1 when outside the cell."""
    idx = np.full(z.shape, -1, dtype=int)
    for k, (P0, P1, P2) in enumerate(cell.domain):
        e1, e2 = P1 - P0, P2 - P0
        det = e1.real * e2.imag - e1.imag * e2.real
        d = z - P0
        l1 = (d.real * e2.imag - d.imag * e2.real) / det
        l2 = (e1.real * d.imag - e1.imag * d.real) / det
        inside = (l1 >= -EDGE_EPS) & (l2 >= -EDGE_EPS) & (1 - l1 - l2 >= -EDGE_EPS)
        idx = np.where((idx < 0) & inside, k, idx)
    return idx


def _psi_arrays(cell: Optional[CellMap], x, y, side: Optional[str]):
    """psi on the strip 0 <= x <= 1 (arrays); returns (Re u, Im u).

    ``cell is None`` is the identity unfolding used for cell parameter 1.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if cell is None:
        return x.copy(), y.copy()
    k2 = np.floor(y / 2.0)
    y2 = y - 2.0 * k2
    on = (np.abs(y2 - 1.0) <= SLIT_TOL) & (x < 0.5 - SLIT_TOL)
    if side is None and np.any(on):
        raise OnSlitWithoutSide("point on a slit needs a side hint", x=float(x[on][0]))
    flip = y2 > 1.0
    if side == "above":
        flip = flip | on
    else:
        flip = flip & ~on
    yc = np.where(on, 1.0, np.where(flip, 2.0 - y2, y2))
    yc = np.clip(yc, 0.0, 1.0)
    zc = x + 1j * yc
    idx = _locate(cell, zc)
    if np.any(idx < 0):
        bad = zc[idx < 0][0]
        raise OutsideStrip(f"point {bad!r} not located in the cell", point=complex(bad))
    u = cell.a[idx] * zc + cell.b[idx] * np.conj(zc) + cell.off[idx]
    uy = np.where(flip, 2.0 - u.imag, u.imag) + 2.0 * k2
    return u.real, uy


def psi(z, m: int, side: Optional[str] = None):
    """PWL unfolding psi_m of the slit strip onto the plain strip 0 <= Re <= 1.

    Accepts a complex scalar or array.  Points on a slit (Im odd, Re < 1/2)
    are two-valued and need ``side`` ("below" or "above").
    """
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(zz.real < -EDGE_EPS) or np.any(zz.real > 1 + EDGE_EPS):
        raise OutsideStrip("psi is defined on 0 <= Re z <= 1", point=complex(zz[0]))
    x = np.clip(zz.real, 0.0, 1.0)
    cell = build_cell(m) if m >= 2 else None
    ux, uy = _psi_arrays(cell, x, zz.imag, side)
    out = ux + 1j * uy
    return complex(out[0]) if np.ndim(z) == 0 else out


def eta(z: LogPoint, n: int, m: int, side: Optional[str] = None) -> LogPoint:
    """Conjugated unfolding exp(pi/n .) o psi_m o (n/pi) log on the unit annulus."""
    if not (-EDGE_EPS <= z.log_mod * n / math.pi <= 1 + EDGE_EPS):
        raise OutsideAnnulus("eta needs 0 <= log|z| <= pi/n", log_mod=z.log_mod, n=n)
    w = complex(min(max(z.log_mod * n / math.pi, 0.0), 1.0), z.arg * n / math.pi)
    u = psi(w, m, side=side)
    return LogPoint(u.real * math.pi / n, u.imag * math.pi / n)


# -- the fold map ----------------------------------------------------------------

def _mobius(z):
    return (z + 1) / (z - 1)


def _nu(zeta):
    phi = np.clip(np.angle(zeta), -np.pi / 2, np.pi / 2)
    rho = np.abs(zeta)
    a = np.abs(phi)
    new = np.where(a <= np.pi / 4, phi, np.sign(phi) * (3 * a - np.pi / 2))
    return rho * np.exp(1j * new)


def _sigma_unchecked(z):
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = _mobius(_nu(_mobius(z)))
    return np.where(z == 1, 1.0 + 0j, out)


def sigma(z):
    """The 3-quasiconformal fold {|z| > 1} -> C minus [-1, 1]; extends to the circle."""
    zz = np.asarray(z, dtype=complex)
    if np.any(np.abs(zz) < 1 - 1e-12):
        raise InsideDisk("sigma is defined on |z| >= 1", z=complex(np.atleast_1d(zz)[0]))
    out = _sigma_unchecked(zz)
    return complex(out) if np.ndim(z) == 0 else out


def in_fold_support(z):
    """Membership in the support of the fold's Beltrami coefficient."""
    zz = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.abs(np.angle(_mobius(zz)))
    out = (np.abs(zz) > 1) & (a > np.pi / 4) & (a < np.pi / 2)
    return bool(out) if np.ndim(z) == 0 else out


# -- circle reparametrization ----------------------------------------------------

def _m_p(n: int, M: int):
    m = M // n
    return m, n - M + n * m


def tau_rep(theta, n: int, M: int):
    """Representative of theta in [-2pi(n-p)/n, 2pi p/n] (branch cut at 2pi p/n)."""
    _, p = _m_p(n, M)
    t = np.mod(np.asarray(theta, dtype=float), 2 * np.pi)
    cut = 2 * np.pi * p / n
    return np.where(t > cut + 1e-15, t - 2 * np.pi, t)


def tau(theta, n: int, M: int, radial: float = 0.0):
    """Piecewise-linear circle homeomorphism.

    ``radial`` in [0, 1] is the normalized log-radius in the annulus
    1 <= |z| <= exp(pi/n); the map is linearly interpolated with the
    identity, which it equals on the outer circle.
    """
    if M <= n:
        raise DegenerateDegrees(f"tau needs M > n (got n={n}, M={M})", n=n, M=M)
    m, _ = _m_p(n, M)
    th = tau_rep(theta, n, M)
    inner = np.where(th >= 0, n * m / M * th, (m + 1) * n / M * th)
    out = (1 - radial) * inner + radial * th
    return float(out) if np.ndim(out) == 0 else out


# -- sector bookkeeping ------------------------------------------------------------

@dataclass(frozen=True)
class FoldRegion:
    n: int
    M: int
    m: int
    p: int
    cell_params: tuple          # cell parameter per sector, sectors 1..n
    slit_arcs: tuple            # per sector: (lo, hi) angle on the unit circle, or None
    cells: dict                 # cell parameter -> CellMap (parameters >= 2)

    def sector_degree(self, k: int) -> int:
        return self.cell_params[k - 1]


def build_fold_region(n: int, M: int) -> FoldRegion:
    if not (M > n >= 1):
        raise DegenerateDegrees(f"need M > n >= 1 (got n={n}, M={M})", n=n, M=M)
    m, p = _m_p(n, M)
    params = tuple(m if k <= p else m + 1 for k in range(1, n + 1))
    arcs = []
    for k, mp in enumerate(params, start=1):
        if mp < 2:
            arcs.append(None)
            continue
        base_y = 2 * (k - 1) if k <= p else 2 * (k - 1) - 2 * n
        K0 = mp * base_y
        arcs.append(((K0 + 1) * math.pi / M, (K0 + 2 * mp - 1) * math.pi / M))
    cells = {mp: build_cell(mp) for mp in sorted(set(params)) if mp >= 2}
    return FoldRegion(n=n, M=M, m=m, p=p, cell_params=params, slit_arcs=tuple(arcs),
                      cells=cells)


@dataclass
class _Unfolded:
    lam: np.ndarray         # Re u, the normalized log-radius after unfolding
    r_ang: np.ndarray       # angle of (tau o eta)^M, relative to an even multiple of pi
    mprime: np.ndarray      # cell parameter of the sector
    log_mod: np.ndarray     # log-modulus of (tau o eta)^M on the unit annulus
    in_U: np.ndarray


def _unfold(region: FoldRegion, x, y, side):
    """(tau o eta)(z)^M on the unit annulus, in relative angle form, plus U membership."""
    n, M, p = region.n, region.M, region.p
    y = np.mod(y, 2.0 * n)
    j = np.minimum(np.floor(y / 2.0), n - 1).astype(int)          # 0-based sector
    y_loc = y - 2.0 * j
    mprime = np.where(j < p, region.m, region.m + 1)
    lam = np.empty_like(x)
    uy = np.empty_like(x)
    for mp in np.unique(mprime):
        sel = mprime == mp
        cell = region.cells.get(int(mp))
        lam[sel], uy[sel] = _psi_arrays(cell, x[sel], y_loc[sel], side)
    base_y = np.where(j < p, 2.0 * j, 2.0 * j - 2.0 * n)
    r_ang = ((1 - lam) * mprime * np.pi * uy
             + lam * np.pi * (M * (base_y + uy) / n - mprime * base_y))
    log_mod = M * np.pi / n * lam
    k_rel = np.floor(r_ang / np.pi)
    in_range = (k_rel >= 1) & (k_rel <= 2 * mprime - 2)
    near = in_range & (log_mod < _LENS_LOGMOD + 1e-9)
    in_U = np.zeros(x.shape, dtype=bool)
    if np.any(near):
        zeta = np.exp(log_mod[near] + 1j * r_ang[near])
        in_U[near] = (lam[near] <= 0.0) | in_fold_support(zeta)
    return _Unfolded(lam=lam, r_ang=r_ang, mprime=mprime, log_mod=log_mod, in_U=in_U)


def _unit_value(region: FoldRegion, x, y, side):
    uf = _unfold(region, x, y, side)
    s = uf.log_mod.copy()
    t = uf.r_ang.copy()
    if np.any(uf.in_U):
        zeta = np.exp(uf.log_mod[uf.in_U] + 1j * uf.r_ang[uf.in_U])
        fs, ft = log_of(_sigma_unchecked(zeta))
        s[uf.in_U] = fs
        t[uf.in_U] = ft
    return s, wrap_angle(t), uf


def on_slit(region: FoldRegion, x, y):
    """Mask of normalized points lying on a radial slit of a folded sector."""
    y = np.mod(np.asarray(y, dtype=float), 2.0 * region.n)
    j = np.minimum(np.floor(y / 2.0), region.n - 1).astype(int)
    mprime = np.where(j < region.p, region.m, region.m + 1)
    return ((np.abs(y - 2.0 * j - 1.0) <= SLIT_TOL) & (np.asarray(x) < 0.5 - SLIT_TOL)
            & (mprime >= 2))


def g_annulus_arrays(s, t, region: FoldRegion, logR: float, c=(0.0, 0.0),
                     side: Optional[str] = "below", check_slits: bool = False):
    """Vectorized interpolation map on logR <= s <= logR + pi/n.

    Returns (log|g|, arg g).  ``check_slits`` evaluates slit points from both
    sides and raises ContinuityFailure if the fold fails to identify them.
    """
    n = region.n
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    x = (s - logR) * n / math.pi
    if np.any(x < -1e-9) or np.any(x > 1 + 1e-9):
        bad = s[(x < -1e-9) | (x > 1 + 1e-9)].ravel()[0]
        raise OutsideAnnulus("point outside the interpolation annulus", log_mod=float(bad),
                             logR=logR, n=n)
    x = np.clip(x, 0.0, 1.0)
    y = t * n / math.pi
    us, ut, _ = _unit_value(region, x, y, side)
    if check_slits:
        sl = on_slit(region, x, y)
        if np.any(sl):
            other = "above" if side != "above" else "below"
            os_, ot, _ = _unit_value(region, x[sl], y[sl], other)
            res = log_residual(us[sl], ut[sl], os_, ot)
            res = np.where(np.isneginf(us[sl]) & np.isneginf(os_), 0.0, res)
            if np.any(res > 1e-8):
                raise ContinuityFailure("slit sides disagree after folding",
                                        residual=float(np.nanmax(res)))
    cs, ct = c
    return cs + n * logR + us, wrap_angle(ct + ut)


def g_extended_arrays(s, t, region: FoldRegion, logR: float, c=(0.0, 0.0), side="below"):
    """g continued by c z^n inside and c z^M / r^(M-n) outside the annulus.

    This is the quasiregular map of the whole plane that g interpolates
    between; small circles around boundary branched points need it.
    """
    n, M = region.n, region.M
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    cs, ct = c
    out_s = cs + n * s
    out_t = wrap_angle(ct + n * t)
    outer = s > logR + math.pi / n
    out_s = np.where(outer, cs + M * s - (M - n) * logR, out_s)
    out_t = np.where(outer, wrap_angle(ct + M * t), out_t)
    mid = (s >= logR) & ~outer
    if np.any(mid):
        out_s[mid], out_t[mid] = g_annulus_arrays(s[mid], t[mid], region, logR, c, side=side)
    return out_s, out_t


def g_annulus(z: LogPoint, n: int, M: int, logR: float = 0.0, c=(0.0, 0.0),
              side: Optional[str] = None, region: Optional[FoldRegion] = None) -> LogPoint:
    """Interpolation g_{n,M,r,c} at a single point.

    Equals c z^n on |z| = r and c z^M / r^(M-n) on |z| = r exp(pi/n).  For
    M == n this is the pure power map.  Slit points default to the
    smaller-argument side and are cross-checked against the other side.
    """
    c = c.as_tuple() if isinstance(c, LogPoint) else c
    if M == n:
        if not (logR - 1e-12 <= z.log_mod <= logR + math.pi / n + 1e-12):
            raise OutsideAnnulus("point outside the interpolation annulus",
                                 log_mod=z.log_mod, logR=logR, n=n)
        return LogPoint(c[0] + n * z.log_mod, c[1] + n * z.arg)
    region = region if region is not None else build_fold_region(n, M)
    gs, gt = g_annulus_arrays(np.array([z.log_mod]), np.array([z.arg]), region, logR, c,
                              side=side or "below", check_slits=side is None)
    return LogPoint(float(gs[0]), float(gt[0]))


def fold_support_mask(s, t, region: FoldRegion, logR: float = 0.0):
    """Membership in the slit-adjacent fold set U, for normalized plotting."""
    n = region.n
    x = np.clip((np.asarray(s, dtype=float) - logR) * n / math.pi, 0.0, 1.0)
    y = np.asarray(t, dtype=float) * n / math.pi
    sl = on_slit(region, x, y)
    uf = _unfold(region, x, y, "below")
    return uf.in_U & ~sl


# -- branched points and zeros --------------------------------------------------

@dataclass(frozen=True)
class BranchedPoint:
    point: LogPoint
    k: int          # sector / slit index, 1..n
    l: float        # vertex index along the slit (half-integers for zeros)
    family: int     # 1: cell parameter m, 2: cell parameter m+1
    sign: int       # value is sign * c r^n (0 for zeros)


@dataclass(frozen=True)
class BranchedData:
    branched_points: tuple
    branched_values: tuple      # (+c r^n, -c r^n) as LogPoints
    zeros: tuple
    origin_multiplicity: int


def branched_data(n: int, M: int, logR: float = 0.0, c=(0.0, 0.0)) -> BranchedData:
    if M <= n:
        raise DegenerateDegrees(f"need M > n (got n={n}, M={M})", n=n, M=M)
    c = c.as_tuple() if isinstance(c, LogPoint) else c
    m, p = _m_p(n, M)
    pts, zeros = [], []
    families = [(1, m, range(1, p + 1)), (2, m + 1, range(p + 1, n + 1))]
    for fam, mp, ks in families:
        denom = 2 * mp - 2
        if denom == 0:
            continue
        for k in ks:
            arg = math.pi * (2 * k - 1) / n
            for l in range(0, mp - 1):
                pts.append(BranchedPoint(LogPoint(logR + math.pi / n * l / denom, arg),
                                         k, l, fam, (-1) ** (l + 1)))
                zeros.append(BranchedPoint(LogPoint(logR + math.pi / n * (l + 0.5) / denom, arg),
                                           k, l + 0.5, fam, 0))
    base = c[0] + n * logR
    values = (LogPoint(base, c[1]), LogPoint(base, c[1] + math.pi))
    return BranchedData(tuple(pts), values, tuple(zeros), n)


# -- SVG export ------------------------------------------------------------------

def cell_svg(cell: CellMap, size: int = 320, margin: int = 30) -> str:
    """Domain and image triangulations side by side as an SVG 1.1 document."""
    width = 2 * size + 3 * margin
    height = size + 2 * margin

    def xy(z, panel):
        ox = margin + panel * (size + margin)
        return ox + z.real * size, margin + (1 - z.imag) * size

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}">',
           f'<title>psi_{cell.m}: domain (left) and image (right) triangulations</title>']
    for panel, tris in ((0, cell.domain), (1, cell.image)):
        for tri in tris:
            pts = " ".join("%.4f,%.4f" % xy(v, panel) for v in tri)
            out.append(f'<polygon points="{pts}" fill="#eeeeee" stroke="#333333" '
                       f'stroke-width="1"/>')
    x0, y0 = xy(1j, 0)
    x1, y1 = xy(1j + 0.5, 0)
    out.append(f'<line x1="{x0:.4f}" y1="{y0:.4f}" x2="{x1:.4f}" y2="{y1:.4f}" '
               f'stroke="#dd0000" stroke-width="3"/>')
    seen = set()
    for panel, tris in ((0, cell.domain), (1, cell.image)):
        for tri in tris:
            for v in tri:
                key = (panel, round(v.real, 9), round(v.imag, 9))
                if key in seen:
                    continue
                seen.add(key)
                color = _vertex_color(v, cell.m) if panel == 0 else _image_color(v, cell.m)
                if color is None:
                    continue
                fill = "#000000" if color == "black" else "#ffffff"
                cx, cy = xy(v, panel)
                out.append(f'<circle cx="{cx:.4f}" cy="{cy:.4f}" r="4" fill="{fill}" '
                           f'stroke="#000000" stroke-width="1" class="{color}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
