"""Global quasiregular map h assembled from power maps and annulus interpolations.

Region layout for Params with degrees M_1 < ... < M_J and radii r_1 < ... < r_J:

    PowerAnnulus(j):  r_{j-1} exp(pi/M_{j-1}) <= |z| < r_j      (r_0 = 0)
    InterpAnnulus(j): r_j <= |z| < r_j exp(pi/M_j)

h is c_j z^{M_j} on PowerAnnulus(j) and g_{M_j, M_{j+1}, r_j, c_j} on
InterpAnnulus(j).  Critical points are reported in the domain of h; the
critical points of the holomorphic f = h o phi^{-1} are their images under
the (not computed) straightening map phi.  f has no asymptotic values: any
curve to infinity has unbounded image, so the critical values below are all
of its singular values.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ModeMismatch, OutsideDomain
from .folding import branched_data, build_fold_region, fold_support_mask, g_annulus_arrays
from .logpoint import LogPoint, wrap_angle
from .sequences import Params


class RegionKind(enum.IntEnum):
    INNER_DISK = 0      # the origin itself, where h(0) = 0
    POWER = 1
    INTERP = 2
    BEYOND = 3
    OUTSIDE_DISK = 4


@dataclass(frozen=True)
class RegionTag:
    kind: RegionKind
    j: Optional[int] = None
    sector: Optional[int] = None
    in_fold_support: Optional[bool] = None

    def __str__(self):
        if self.kind in (RegionKind.POWER, RegionKind.INTERP):
            name = "PowerAnnulus" if self.kind == RegionKind.POWER else "InterpAnnulus"
            return f"{name}({self.j})"
        return {RegionKind.INNER_DISK: "InnerDisk", RegionKind.BEYOND: "BeyondTruncation",
                RegionKind.OUTSIDE_DISK: "OutsideDisk"}[self.kind]


class GlobalMap:
    """h for one parameter family; fold regions are built once here."""

    def __init__(self, params: Params):
        self.params = params
        self.regions = [build_fold_region(params.degree(j), params.degree(j + 1))
                        for j in range(1, params.n_interp + 1)]
        edges = []
        for j in range(1, params.J + 1):
            edges.append(params.radius_log(j))
            if j <= params.n_interp:
                edges.append(params.radius_log(j) + math.pi / params.M[j - 1])
        self._edges = np.array(edges)

    # -- classification ------------------------------------------------------

    def classify_arrays(self, s):
        """(kind codes, annulus index) arrays for log-moduli ``s``."""
        p = self.params
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(self._edges, s, side="right")
        kind = np.where(idx % 2 == 0, int(RegionKind.POWER), int(RegionKind.INTERP))
        j = np.where(idx % 2 == 0, idx // 2 + 1, (idx + 1) // 2)
        end = p.domain_end
        last_kind = RegionKind.INTERP if p.next_degree is not None else RegionKind.POWER
        at_end = s == end
        kind = np.where(at_end, int(last_kind), kind)
        j = np.where(at_end, p.J, j)
        kind = np.where(s > end, int(RegionKind.BEYOND), kind)
        if p.mode == "disk":
            kind = np.where(s >= p.log_r_inf, int(RegionKind.OUTSIDE_DISK), kind)
        kind = np.where(np.isneginf(s), int(RegionKind.INNER_DISK), kind)
        j = np.where(kind >= int(RegionKind.BEYOND), 0, j)
        j = np.where(kind == int(RegionKind.INNER_DISK), 1, j)
        return kind, j

    def classify(self, z: LogPoint) -> RegionTag:
        kind, j = self.classify_arrays(np.array([z.log_mod]))
        kind, j = RegionKind(int(kind[0])), int(j[0])
        if kind == RegionKind.INTERP:
            n = self.params.degree(j)
            y = np.mod(z.arg * n / math.pi, 2 * n)
            sector = int(min(y // 2, n - 1)) + 1
            mask = fold_support_mask(np.array([z.log_mod]), np.array([z.arg]),
                                     self.regions[j - 1], self.params.radius_log(j))
            return RegionTag(kind, j, sector, bool(mask[0]))
        if kind in (RegionKind.BEYOND, RegionKind.OUTSIDE_DISK):
            return RegionTag(kind)
        return RegionTag(kind, j)

    # -- evaluation ----------------------------------------------------------

    def _power(self, j, s, t):
        cs, ct = self.params.log_c[j - 1]
        M = self.params.degree(j)
        return cs + M * s, wrap_angle(ct + M * t)

    def h_arrays(self, s, t, side: str = "below", check_slits: bool = False):
        """Vectorized h in log form.  Raises OutsideDomain past the truncation."""
        p = self.params
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        kind, j = self.classify_arrays(s)
        bad = kind >= int(RegionKind.BEYOND)
        if np.any(bad):
            k0 = RegionKind(int(kind[bad].ravel()[0]))
            raise OutsideDomain(f"h is not materialized at log|z| = {s[bad].ravel()[0]!r}",
                                tag=str(RegionTag(k0)), log_mod=float(s[bad].ravel()[0]))
        out_s = np.full(s.shape, -np.inf)
        out_t = np.zeros(s.shape)
        for jj in np.unique(j[kind == int(RegionKind.POWER)]):
            sel = (kind == int(RegionKind.POWER)) & (j == jj)
            out_s[sel], out_t[sel] = self._power(int(jj), s[sel], t[sel])
        for jj in np.unique(j[kind == int(RegionKind.INTERP)]):
            jj = int(jj)
            sel = (kind == int(RegionKind.INTERP)) & (j == jj)
            out_s[sel], out_t[sel] = g_annulus_arrays(
                s[sel], t[sel], self.regions[jj - 1], p.radius_log(jj), p.log_c[jj - 1],
                side=side, check_slits=check_slits)
        return out_s, out_t

    def h(self, z: LogPoint, side: Optional[str] = None) -> LogPoint:
        hs, ht = self.h_arrays(np.array([z.log_mod]), np.array([z.arg]),
                               side=side or "below", check_slits=side is None)
        return LogPoint(float(hs[0]), float(ht[0]))

    def h_truncated_arrays(self, s, t, n_cut: int, side: str = "below"):
        """h_n: c_n z^{M_n} inside |z| = r_n, h elsewhere (n_cut = 0 gives h).

        The circle itself goes through h, where both formulas agree, so h_n
        and h share one code path on |z| >= r_n.
        """
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        if n_cut == 0:
            return self.h_arrays(s, t, side=side)
        inner = s < self.params.radius_log(n_cut)
        out_s = np.empty(s.shape)
        out_t = np.empty(s.shape)
        if np.any(~inner):
            out_s[~inner], out_t[~inner] = self.h_arrays(s[~inner], t[~inner], side=side)
        if np.any(inner):
            ps, pt = self._power(n_cut, s[inner], t[inner])
            out_s[inner] = np.where(np.isneginf(s[inner]), -np.inf, ps)
            out_t[inner] = np.where(np.isneginf(s[inner]), 0.0, pt)
        return out_s, out_t

    def h_truncated(self, z: LogPoint, n_cut: int) -> LogPoint:
        hs, ht = self.h_truncated_arrays(np.array([z.log_mod]), np.array([z.arg]), n_cut)
        return LogPoint(float(hs[0]), float(ht[0]))

    def singular_data(self) -> "SingularData":
        p = self.params
        crit, values, zeros = [], [], []
        zeros.append(ZeroRecord(LogPoint(-math.inf, 0.0), 0, 0, 0.0, 0, p.M[0]))
        for j in range(1, p.n_interp + 1):
            bd = branched_data(p.degree(j), p.degree(j + 1), p.radius_log(j), p.log_c[j - 1])
            values.append((j, bd.branched_values[0], bd.branched_values[1]))
            for b in bd.branched_points:
                crit.append(CriticalPoint(b.point, j, b.k, b.l, b.family, b.sign))
            for b in bd.zeros:
                zeros.append(ZeroRecord(b.point, j, b.k, b.l, b.family, 1))
        return SingularData(tuple(crit), tuple(values), tuple(zeros))


@dataclass(frozen=True)
class CriticalPoint:
    point: LogPoint
    j: int
    k: int
    l: float
    family: int
    sign: int


@dataclass(frozen=True)
class ZeroRecord:
    point: LogPoint
    j: int
    k: int
    l: float
    family: int
    multiplicity: int


@dataclass(frozen=True)
class SingularData:
    critical_points: tuple
    critical_values: tuple      # (j, +c_j r_j^{M_j}, -c_j r_j^{M_j})
    zeros: tuple

    def count_per_annulus(self):
        out = {}
        for cp in self.critical_points:
            out[cp.j] = out.get(cp.j, 0) + 1
        return out

    def records(self):
        """Flat rows for delimited output: kind, annulus, k, l, family, log_mod, arg, tag."""
        rows = []
        for cp in self.critical_points:
            rows.append(("critical_point", cp.j, cp.k, cp.l, cp.family,
                         cp.point.log_mod, cp.point.arg, "+" if cp.sign > 0 else "-"))
        for j, plus, minus in self.critical_values:
            rows.append(("critical_value", j, "", "", "", plus.log_mod, plus.arg, "+"))
            rows.append(("critical_value", j, "", "", "", minus.log_mod, minus.arg, "-"))
        for z in self.zeros:
            rows.append(("zero", z.j, z.k, z.l, z.family, z.point.log_mod, z.point.arg,
                         f"mult={z.multiplicity}"))
        return rows


def _gm(p) -> GlobalMap:
    return p if isinstance(p, GlobalMap) else GlobalMap(p)


def classify(z: LogPoint, p) -> RegionTag:
    return _gm(p).classify(z)


def h(z: LogPoint, p, side: Optional[str] = None) -> LogPoint:
    return _gm(p).h(z, side=side)


def h_truncated(z: LogPoint, p, n_cut: int) -> LogPoint:
    return _gm(p).h_truncated(z, n_cut)


def singular_data(p) -> SingularData:
    return _gm(p).singular_data()


def disk_mode_domain(p: Params) -> float:
    """log r_inf of a disk-mode family."""
    p = p.params if isinstance(p, GlobalMap) else p
    if p.mode != "disk":
        raise ModeMismatch("family is in plane mode", mode=p.mode)
    return p.log_r_inf
