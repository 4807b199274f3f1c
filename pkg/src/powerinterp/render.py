"""Raster renderings of h as binary PPM (P6) images.

Pixels are evaluated in fixed blocks of rows on a thread pool and written in
row order, so the bytes depend only on the family and the render spec.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from matplotlib.colors import hsv_to_rgb

from .config import RenderSpec
from .errors import PowerInterpError
from .folding import fold_support_mask
from .globalmap import GlobalMap, RegionKind
from .logpoint import log_of, wrap_angle
from .parallel import chunks, map_ordered

ROW_BLOCK = 16

SENTINEL = (255, 0, 255)
SLIT = (220, 20, 20)
BACKGROUND = (255, 255, 255)
OTHER_REGION = (225, 225, 225)
LENS = (30, 60, 160)
ORIGIN_COLOR = (0, 0, 0)
BEYOND = (90, 90, 90)
OUTSIDE_DISK = (40, 40, 40)

_POWER_SHADES = [(70, 110, 200), (120, 160, 230)]
_INTERP_SHADES = [(240, 160, 60), (250, 205, 120)]
_ESCAPE_PALETTE = [(20, 20, 60), (60, 40, 120), (110, 60, 160), (170, 80, 150), (220, 110, 110),
                   (245, 160, 90), (250, 215, 110), (250, 245, 190)]


@dataclass
class RenderResult:
    image: np.ndarray           # (height, width, 3) uint8
    sentinel_pixels: int
    spec: RenderSpec

    def ppm_bytes(self) -> bytes:
        h, w, _ = self.image.shape
        return f"P6\n{w} {h}\n255\n".encode("ascii") + self.image.tobytes()

    def report(self):
        return {"width": self.spec.width, "height": self.spec.height,
                "coloring": self.spec.coloring, "sentinel_pixels": self.sentinel_pixels}


def pixel_coordinates(spec: RenderSpec, rows=None):
    """(log|z|, arg) at pixel centres; row 0 is the top of the image."""
    a0, a1, b0, b1 = spec.window
    r0, r1 = rows if rows is not None else (0, spec.height)
    a = a0 + (a1 - a0) * (np.arange(spec.width) + 0.5) / spec.width
    b = b1 - (b1 - b0) * (np.arange(r0, r1) + 0.5) / spec.height
    A, B = np.meshgrid(a, b)
    if spec.cartesian:
        return log_of(A + 1j * B)
    return A, wrap_angle(B)


def _slit_band(gm: GlobalMap, s, t, kind, j, half_width):
    """Pixels within ``half_width`` (radians) of a radial slit of an interpolation annulus."""
    out = np.zeros(s.shape, dtype=bool)
    p = gm.params
    for jj in range(1, p.n_interp + 1):
        sel = (kind == int(RegionKind.INTERP)) & (j == jj)
        if not np.any(sel):
            continue
        region = gm.regions[jj - 1]
        n = region.n
        x = (s[sel] - p.radius_log(jj)) * n / math.pi
        y = np.mod(t[sel] * n / math.pi, 2.0 * n)
        k = np.floor(y / 2.0)
        d = np.abs(y - 2.0 * k - 1.0)
        mprime = np.where(k < region.p, region.m, region.m + 1)
        tol = half_width[sel] * n / math.pi if np.ndim(half_width) else half_width * n / math.pi
        out[sel] = (d <= tol) & (x <= 0.5) & (mprime >= 2)
    return out


def _angular_half_width(spec: RenderSpec, s):
    if spec.cartesian:
        a0, a1, b0, b1 = spec.window
        px = max((a1 - a0) / spec.width, (b1 - b0) / spec.height)
        with np.errstate(over="ignore"):
            return 0.5 * px / np.exp(s)
    return 0.5 * (spec.window[3] - spec.window[2]) / spec.height


def _region_colors(gm, s, t, kind, j, spec):
    img = np.empty(s.shape + (3,), dtype=np.uint8)
    img[...] = BEYOND
    for code, color in ((RegionKind.INNER_DISK, ORIGIN_COLOR), (RegionKind.OUTSIDE_DISK, OUTSIDE_DISK)):
        img[kind == int(code)] = color
    pw = kind == int(RegionKind.POWER)
    it = kind == int(RegionKind.INTERP)
    for par in (0, 1):
        img[pw & (j % 2 == par)] = _POWER_SHADES[par]
        img[it & (j % 2 == par)] = _INTERP_SHADES[par]
    img[_slit_band(gm, s, t, kind, j, _angular_half_width(spec, s))] = SLIT
    return img, np.zeros(s.shape, dtype=bool)


def _fold_colors(gm, s, t, kind, j, spec):
    img = np.empty(s.shape + (3,), dtype=np.uint8)
    img[...] = OTHER_REGION
    p = gm.params
    for jj in range(1, p.n_interp + 1):
        sel = (kind == int(RegionKind.INTERP)) & (j == jj)
        if not np.any(sel):
            continue
        mask = fold_support_mask(s[sel], t[sel], gm.regions[jj - 1], p.radius_log(jj))
        block = np.empty(mask.shape + (3,), dtype=np.uint8)
        block[...] = BACKGROUND
        block[mask] = LENS
        img[sel] = block
    img[_slit_band(gm, s, t, kind, j, _angular_half_width(spec, s))] = SLIT
    return img, np.zeros(s.shape, dtype=bool)


def _logmod_colors(gm, s, t, kind, j, spec):
    bad = kind >= int(RegionKind.BEYOND)
    hs = np.zeros(s.shape)
    ht = np.zeros(s.shape)
    ok = ~bad
    if np.any(ok):
        hs[ok], ht[ok] = gm.h_arrays(s[ok], t[ok])
    # asinh compresses the doubly exponential growth of log|h| onto [0, 1)
    value = np.where(np.isfinite(hs), np.arctan(np.arcsinh(hs) / 4.0) / math.pi + 0.5, 0.0)
    hue = (ht / (2 * math.pi)) % 1.0
    rgb = hsv_to_rgb(np.stack([hue, np.full(hue.shape, 0.65), 0.15 + 0.85 * value], axis=-1))
    return np.round(rgb * 255).astype(np.uint8), bad


def _escape_colors(gm, s, t, kind, j, spec):
    p = gm.params
    escape = p.radius_log(p.J)
    steps = np.full(s.shape, -1)
    cs, ct = s.copy(), t.copy()
    bad = np.zeros(s.shape, dtype=bool)
    active = np.ones(s.shape, dtype=bool)
    for k in range(spec.max_steps + 1):
        done = active & (cs > escape)
        steps[done] = k
        active &= ~done
        kd, _ = gm.classify_arrays(cs)
        lost = active & (kd >= int(RegionKind.BEYOND))
        bad |= lost
        active &= ~lost
        if k == spec.max_steps or not np.any(active):
            break
        cs[active], ct[active] = gm.h_arrays(cs[active], ct[active])
    img = np.empty(s.shape + (3,), dtype=np.uint8)
    img[...] = ORIGIN_COLOR
    esc = steps >= 0
    img[esc] = np.array(_ESCAPE_PALETTE)[np.minimum(steps[esc], len(_ESCAPE_PALETTE) - 1)]
    return img, bad


_COLORINGS = {
    "region-tag": _region_colors,
    "fold-support-mask": _fold_colors,
    "log-modulus-of-h": _logmod_colors,
    "escape-step": _escape_colors,
}


def _render_rows(gm: GlobalMap, spec: RenderSpec, rows):
    s, t = pixel_coordinates(spec, rows)
    kind, j = gm.classify_arrays(s)
    fn = _COLORINGS[spec.coloring]
    try:
        img, bad = fn(gm, s, t, kind, j, spec)
    except PowerInterpError:
        # isolate the failing pixels one by one
        img = np.empty(s.shape + (3,), dtype=np.uint8)
        bad = np.zeros(s.shape, dtype=bool)
        for idx in np.ndindex(s.shape):
            one = tuple(np.atleast_1d(x[idx]) for x in (s, t, kind, j))
            try:
                px, pb = fn(gm, *one, spec)
                img[idx], bad[idx] = px[0], pb[0]
            except PowerInterpError:
                bad[idx] = True
    img[bad] = SENTINEL
    return img, int(bad.sum())


def render(p, spec: RenderSpec, workers=None) -> RenderResult:
    gm = p if isinstance(p, GlobalMap) else GlobalMap(p)
    parts = map_ordered(lambda rows: _render_rows(gm, spec, rows),
                        chunks(spec.height, ROW_BLOCK), workers)
    image = np.concatenate([im for im, _ in parts], axis=0)
    return RenderResult(image, sum(b for _, b in parts), spec)


def write_ppm(result: RenderResult, path) -> None:
    with open(path, "wb") as fh:
        fh.write(result.ppm_bytes())


def read_ppm(path) -> np.ndarray:
    """Minimal P6 reader (for checking rendered files)."""
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6":
        raise ValueError("not a P6 file")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4], dtype=np.uint8).reshape(h, w, 3)


def count_components(image: np.ndarray, color) -> int:
    """4-connected components of pixels of exactly ``color``."""
    from scipy import ndimage
    mask = np.all(image == np.array(color, dtype=np.uint8), axis=-1)
    _, count = ndimage.label(mask)
    return int(count)


def count_bands(image: np.ndarray, row: int, ignore=(SLIT,)) -> int:
    """Number of constant-colour runs along one image row, skipping ``ignore`` colours."""
    line = [tuple(px) for px in image[row] if tuple(px) not in ignore]
    return sum(1 for k, px in enumerate(line) if k == 0 or px != line[k - 1])
