"""Invariant suites run by ``powerinterp verify``.

Every check records its measured value, its tolerance and a verdict, so the
JSON report carries all margins and residuals.  Outputs contain no timings
and depend only on the family, the seed and the sample counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .analysis import dilatation_report, global_map, integral_bound, mu_grid, winding_number
from .dynamics import verify_wandering
from .folding import g_annulus_arrays, on_slit
from .globalmap import GlobalMap, RegionKind
from .logpoint import LogPoint, log_residual, wrap_angle
from .parallel import map_ordered
from .sequences import is_strongly_permissible

SUITES = ("boundaries", "singular", "dilatation", "wandering")
BOUNDARY_TOL = 1e-9
SLIT_TOL = 1e-8
VALUE_TOL = 1e-8
K_AGREE_TOL = 1e-4


@dataclass
class Check:
    name: str
    value: object
    tol: Optional[float]
    passed: bool

    def as_dict(self):
        v = self.value
        if isinstance(v, float) and not math.isfinite(v):
            v = repr(v)
        return {"name": self.name, "value": v, "tol": self.tol, "passed": self.passed}


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    hypothesis_violated: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, tol=None, passed=None):
        if passed is None:
            passed = bool(value < tol)
        self.checks.append(Check(name, value, tol, bool(passed)))

    def as_dict(self):
        return {"suite": self.name, "passed": self.passed,
                "hypothesis_violated": self.hypothesis_violated,
                "checks": [c.as_dict() for c in self.checks], **self.extra}


def _angles(samples):
    # offset keeps the grid off the slit angles
    return wrap_angle(2 * math.pi * (np.arange(samples) + 0.5) / samples - math.pi)


def suite_boundaries(gm: GlobalMap, samples: int = 1000, slit_radii: int = 100, **_):
    p = gm.params
    res = SuiteResult("boundaries")
    t = _angles(samples)
    for j in range(1, p.n_interp + 1):
        lr = p.radius_log(j)
        region = gm.regions[j - 1]
        for label, s0, jp in (("inner", lr, j), ("outer", lr + math.pi / p.M[j - 1], j + 1)):
            s = np.full(samples, s0)
            power = gm._power(jp, s, t)
            interp = g_annulus_arrays(s, t, region, lr, p.log_c[j - 1])
            res.add(f"circle {label} j={j}", float(log_residual(*power, *interp).max()), BOUNDARY_TOL)
        # slits: both one-sided values at interior radii of the slit
        n = region.n
        x = (np.arange(slit_radii) + 0.5) / slit_radii * 0.5
        worst = 0.0
        for k in range(n):
            y = np.full(slit_radii, 2.0 * k + 1.0)
            if not np.all(on_slit(region, x, y)):
                continue
            s = lr + x * math.pi / n
            tt = wrap_angle(y * math.pi / n)
            a = g_annulus_arrays(s, tt, region, lr, p.log_c[j - 1], side="below")
            b = g_annulus_arrays(s, tt, region, lr, p.log_c[j - 1], side="above")
            r = log_residual(*a, *b)
            r = np.where(np.isneginf(a[0]) & np.isneginf(b[0]), 0.0, r)
            worst = max(worst, float(r.max()))
        res.add(f"slits j={j}", worst, SLIT_TOL)
    for j in range(1, p.J + 1):
        lo = p.radius_log(j - 1) + math.pi / p.degree(j - 1) if j > 1 else p.radius_log(1) - math.pi
        mid = 0.5 * (lo + p.radius_log(j))
        w = winding_number(gm, LogPoint(-math.inf), mid)
        res.add(f"winding power j={j}", w, None, w == p.M[j - 1])
    if p.n_interp == p.J and p.next_degree is not None:
        edge = p.domain_end
        w = winding_number(gm, LogPoint(-math.inf), edge - 1e-9)
        res.add(f"winding outer edge j={p.J}", w, None, w == p.next_degree)
    return res


def suite_singular(gm: GlobalMap, workers=None, **_):
    p = gm.params
    res = SuiteResult("singular")
    sd = gm.singular_data()
    counts = sd.count_per_annulus()
    fn = global_map(gm)
    for j in range(1, p.n_interp + 1):
        expect = p.degree(j + 1) - p.degree(j)
        res.add(f"critical count j={j}", counts.get(j, 0), None, counts.get(j, 0) == expect)
    values = {j: (plus, minus) for j, plus, minus in sd.critical_values}

    def certify(cp):
        target = values[cp.j][0 if cp.sign > 0 else 1]
        hs, ht = fn(np.array([cp.point.log_mod]), np.array([cp.point.arg]))
        closure = float(log_residual(hs, ht, target.log_mod, target.arg)[0])
        w = winding_number(fn, cp.point, cp.point.log_mod + math.log(1e-4), about=target)
        return closure, w

    out = map_ordered(certify, sd.critical_points, workers)
    closures = [c for c, _ in out]
    windings = [w for _, w in out]
    res.add("critical value closure", max(closures) if closures else 0.0, VALUE_TOL)
    res.add("critical winding == 2", sorted(set(windings)), None, all(w == 2 for w in windings))

    def zero_winding(z):
        if z.point.is_origin:
            return winding_number(fn, z.point, p.radius_log(1) + math.log(1e-4))
        return winding_number(fn, z.point, z.point.log_mod + math.log(1e-4))

    zw = map_ordered(zero_winding, sd.zeros, workers)
    res.add("zero windings match multiplicity", [int(w) for w in zw], None,
            all(w == z.multiplicity for w, z in zip(zw, sd.zeros)))
    res.extra["critical_points"] = len(sd.critical_points)
    res.extra["zeros"] = len(sd.zeros)
    return res


def suite_dilatation(gm: GlobalMap, samples: int = 400, seed: int = 0, grid: int = 200, **_):
    p = gm.params
    res = SuiteResult("dilatation")
    rep = dilatation_report(gm, samples, seed)
    res.add("K_hat finite", rep.K_hat, None, math.isfinite(rep.K_hat))
    for a in rep.annuli:
        if a.kind == "power":
            res.add(f"power j={a.j} K - 1", a.max_K - 1.0, 1e-6)
    groups = {}
    for a in rep.annuli:
        if a.kind == "interp":
            groups.setdefault(Fraction(p.degree(a.j + 1), p.degree(a.j)), []).append(a.max_K)
    for ratio, ks in sorted(groups.items()):
        if len(ks) > 1:
            res.add(f"K agreement ratio {ratio}", max(ks) - min(ks), K_AGREE_TOL)
    S, T, amu, valid, kind, j = mu_grid(gm, grid, grid)
    stray = int(np.sum(valid & (amu > 1e-3) & (kind != int(RegionKind.INTERP))))
    res.add("|mu| > 1e-3 only in interpolation annuli", stray, None, stray == 0)
    bound = integral_bound(p, rep.K_hat)
    res.add("integral bound closed vs area form", abs(bound.closed_form - bound.area_form), 1e-10)
    perm = is_strongly_permissible(p)
    res.extra["K_hat"] = rep.K_hat
    res.extra["annuli"] = [{"kind": a.kind, "j": a.j, "max_K": a.max_K, "samples": a.samples,
                            "discards": a.discards} for a in rep.annuli]
    res.extra["integral_bound"] = {"closed_form": bound.closed_form, "area_form": bound.area_form,
                                   "tail_bound": bound.tail_bound, "verdict": bound.verdict}
    res.extra["strong_permissibility"] = {"partial_sum": perm.partial_sum, "verdict": perm.verdict,
                                          "tail_bound": perm.tail_bound}
    return res


def default_wandering_range(p):
    """j = 2 .. J-1.  A_1 is a punctured disk whose small points stay near 0."""
    return range(2, p.J)


def suite_wandering(gm: GlobalMap, samples: int = 1000, seed: int = 0, alpha: float = 1.1,
                    mode: str = "shrink", j_range=None, workers=None, **_):
    p = gm.params
    res = SuiteResult("wandering")
    jr = list(j_range) if j_range is not None else list(default_wandering_range(p))
    rep = verify_wandering(gm, alpha, jr, samples, mode=mode, seed=seed, workers=workers)
    res.hypothesis_violated = not rep.hypothesis_ok
    res.add("radius rule residual", rep.rule_residual, 1e-10, rep.hypothesis_ok)
    for r in rep.inclusions:
        res.add(f"inclusion j={r.j} margin", r.margin, None, r.holds)
    for j, r in rep.ladder:
        res.add(f"circle ladder j={j}", r, 1e-9)
    res.extra["wandering"] = rep.as_dict()
    return res


_RUNNERS = {"boundaries": suite_boundaries, "singular": suite_singular,
            "dilatation": suite_dilatation, "wandering": suite_wandering}


def run_suite(p, name: str, samples: Optional[int] = None, seed: int = 0, workers=None, **kw):
    """Run one suite or ``all``; returns a list of SuiteResult."""
    gm = p if isinstance(p, GlobalMap) else GlobalMap(p)
    names = SUITES if name == "all" else (name,)
    out = []
    for nm in names:
        if nm not in _RUNNERS:
            raise ValueError(f"unknown suite {nm!r}")
        args = dict(kw, seed=seed, workers=workers)
        if samples is not None:
            args["samples"] = samples
        out.append(_RUNNERS[nm](gm, **args))
    return out
