"""Orbits of h and its truncations, and the wandering-annulus inclusion check.

The annuli tested are the power annuli shrunk by a factor alpha,

    shrink mode:  alpha r_{j-1} exp(pi/M_{j-1}) < |z| < r_j / alpha   (alpha > 1)
    literal mode: r_{j-1} exp(pi/M_{j-1}) / alpha < |z| < alpha r_j   (0 < alpha < 1)

which coincide after alpha -> 1/alpha.  Under the radius rule
r_{j+1} = |c_j| r_j^{M_j}, h should map the j-th one into the (j+1)-th.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (EmptyAnnulus, HypothesisViolated, InclusionFailure, PowerInterpError,
                     PreconditionError)
from .globalmap import GlobalMap, RegionKind
from .logpoint import LogPoint, wrap_angle
from .parallel import chunks, map_ordered
from .sequences import radius_rule_residuals

RULE_TOL = 1e-10
LADDER_TOL = 1e-9
SAMPLE_CHUNK = 256


def _gm(p) -> GlobalMap:
    return p if isinstance(p, GlobalMap) else GlobalMap(p)


def annulus_A(j: int, alpha: float, p, mode: str = "shrink"):
    """(log inner, log outer) radii of A_j^alpha; the inner radius is -inf for j = 1."""
    p = p.params if isinstance(p, GlobalMap) else p
    if j < 1 or j > p.J:
        raise EmptyAnnulus(f"annulus index {j} outside 1..{p.J}", j=j, alpha=alpha)
    if not alpha > 0:
        raise EmptyAnnulus("alpha must be positive", j=j, alpha=alpha)
    if mode not in ("shrink", "literal"):
        raise ValueError(f"unknown mode {mode!r}")
    la = math.log(alpha) if mode == "shrink" else -math.log(alpha)
    inner = p.radius_log(j - 1) + math.pi / p.degree(j - 1) + la if j > 1 else -math.inf
    outer = p.radius_log(j) - la
    if not inner < outer:
        raise EmptyAnnulus(f"A_{j} is empty for alpha = {alpha!r}", j=j, alpha=alpha)
    return inner, outer


# -- orbits ------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitStatus:
    kind: str           # "Completed", "Escaped" or "LeftTruncation"
    step: int

    def __str__(self):
        return f"{self.kind}({self.step})"


@dataclass
class OrbitTrace:
    points: list
    tags: list
    status: OrbitStatus

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "logMod", "arg", "tag"])
        for k, (z, tag) in enumerate(zip(self.points, self.tags)):
            w.writerow([k, repr(z.log_mod), repr(z.arg), str(tag)])
        return buf.getvalue()


def orbit(z0: LogPoint, p, max_steps: int, escape_log: Optional[float] = None,
          n_cut: int = 0) -> OrbitTrace:
    """Iterate h (or h_{n_cut}) from z0.

    Stops with Escaped once log|z| exceeds ``escape_log`` (default log r_J),
    with LeftTruncation once a point leaves the materialized domain, and with
    Completed after ``max_steps`` steps.
    """
    gm = _gm(p)
    p = gm.params
    escape = p.radius_log(p.J) if escape_log is None else escape_log
    points, tags = [z0], []
    z = z0
    for step in range(max_steps + 1):
        tag = gm.classify(z)
        tags.append(tag)
        if z.log_mod > escape:
            return OrbitTrace(points, tags, OrbitStatus("Escaped", step))
        if tag.kind >= RegionKind.BEYOND:
            return OrbitTrace(points, tags, OrbitStatus("LeftTruncation", step))
        if step == max_steps:
            break
        try:
            hs, ht = gm.h_truncated_arrays(np.array([z.log_mod]), np.array([z.arg]), n_cut)
        except PowerInterpError as exc:
            exc.datum["step"] = step
            raise
        z = LogPoint(float(hs[0]), float(ht[0]))
        points.append(z)
    return OrbitTrace(points, tags, OrbitStatus("Completed", max_steps))


@dataclass
class TruncatedComparison:
    identical: bool
    steps: int
    first_divergence: Optional[int]
    first_dip: Optional[int]
    trace_h: OrbitTrace
    trace_hn: OrbitTrace


def truncated_orbit_compare(z0: LogPoint, p, n_cut: int, steps: int) -> TruncatedComparison:
    """Orbits of h and h_{n_cut} from z0; identical while the orbit stays in |z| >= r_n."""
    gm = _gm(p)
    if n_cut > 0 and not z0.log_mod >= gm.params.radius_log(n_cut):
        raise PreconditionError(f"|z0| must be at least r_{n_cut}", log_mod=z0.log_mod,
                                n_cut=n_cut)
    a = orbit(z0, gm, steps)
    b = orbit(z0, gm, steps, n_cut=n_cut)
    lim = gm.params.radius_log(n_cut) if n_cut > 0 else -math.inf
    dip = next((k for k, z in enumerate(a.points) if z.log_mod < lim), None)
    div = None
    for k in range(max(len(a.points), len(b.points))):
        if k >= len(a.points) or k >= len(b.points) or a.points[k].as_tuple() != b.points[k].as_tuple():
            div = k
            break
    same = div is None and a.status == b.status
    return TruncatedComparison(same, len(a.points) - 1, div, dip, a, b)


# -- wandering annuli --------------------------------------------------------

@dataclass
class InclusionResult:
    j: int
    source: tuple
    target: tuple
    samples: int
    failures: int
    margin: float
    first_failure: Optional[tuple] = None
    empty: Optional[str] = None         # set when A_j or A_{j+1} degenerates

    @property
    def holds(self) -> bool:
        return self.empty is None and self.failures == 0 and self.margin > 0


@dataclass
class WanderingReport:
    alpha: float
    mode: str
    hypothesis_ok: bool
    rule_residual: float
    inclusions: list
    ladder: list = field(default_factory=list)      # (j, max residual)

    @property
    def margins_nondecreasing(self) -> bool:
        m = [r.margin for r in self.inclusions]
        return all(b >= a for a, b in zip(m, m[1:]))

    @property
    def ladder_ok(self) -> bool:
        return all(r < LADDER_TOL for _, r in self.ladder)

    @property
    def passed(self) -> bool:
        return self.hypothesis_ok and self.ladder_ok and all(r.holds for r in self.inclusions)

    def as_dict(self):
        return {
            "alpha": self.alpha, "mode": self.mode,
            "hypothesis_ok": self.hypothesis_ok, "rule_residual": self.rule_residual,
            "inclusions": [{"j": r.j, "source": list(r.source), "target": list(r.target),
                            "samples": r.samples, "failures": r.failures, "margin": r.margin,
                            "holds": r.holds, "empty": r.empty,
                            "first_failure": list(r.first_failure) if r.first_failure else None}
                           for r in self.inclusions],
            "ladder": [{"j": j, "residual": r} for j, r in self.ladder],
            "ladder_ok": self.ladder_ok,
            "margins_nondecreasing": self.margins_nondecreasing,
            "passed": self.passed,
        }


def sample_annulus(inner: float, outer: float, count: int, rng: np.random.Generator):
    """Quasi-uniform (log|z|, arg) samples of the open annulus.

    Stratified in log|z| and arg; a punctured disk (inner = -inf) is sampled
    uniformly in area instead.
    """
    u = (np.arange(count) + 0.05 + 0.9 * rng.random(count)) / count
    v = rng.permutation((np.arange(count) + 0.05 + 0.9 * rng.random(count)) / count)
    if math.isinf(inner):
        s = outer + 0.5 * np.log(u)
    else:
        s = inner + (outer - inner) * u
    return s, wrap_angle(2 * math.pi * v - math.pi)


def circle_ladder(p, samples: int = 1000):
    """max_theta |log|h(r_j e^{i theta})| - log r_{j+1}| for j = 1..J-1."""
    gm = _gm(p)
    p = gm.params
    t = wrap_angle(2 * math.pi * np.arange(samples) / samples - math.pi)
    out = []
    for j in range(1, p.J):
        hs, _ = gm.h_arrays(np.full(samples, p.radius_log(j)), t)
        out.append((j, float(np.abs(hs - p.radius_log(j + 1)).max())))
    return out


def verify_wandering(p, alpha: float, j_range, samples: int = 1000, mode: str = "shrink",
                     seed: int = 0, strict: bool = False, workers: Optional[int] = None
                     ) -> WanderingReport:
    """Check h(A_j^alpha) in A_{j+1}^alpha on sampled points for j in ``j_range``.

    Without the radius rule the report is marked hypothesis-violated (raised
    as HypothesisViolated when ``strict``); inclusion failures are reported,
    and raised as InclusionFailure when ``strict``.
    """
    gm = _gm(p)
    p = gm.params
    res = radius_rule_residuals(p)
    rule_res = max(res) if res else 0.0
    hyp = rule_res <= RULE_TOL
    if strict and not hyp:
        raise HypothesisViolated("radius rule r_{j+1} = |c_j| r_j^M_j fails",
                                 residual=rule_res)
    results = []
    for j in j_range:
        try:
            src = annulus_A(j, alpha, p, mode)
            tgt = annulus_A(j + 1, alpha, p, mode)
        except EmptyAnnulus as exc:
            if strict:
                raise
            results.append(InclusionResult(j, (), (), 0, 0, -math.inf, empty=str(exc)))
            continue
        rng = np.random.default_rng([seed, j])
        s, t = sample_annulus(*src, samples, rng)

        def run(bounds, s=s, t=t):
            a, b = bounds
            return gm.h_arrays(s[a:b], t[a:b])[0]

        hs = np.concatenate(map_ordered(run, chunks(samples, SAMPLE_CHUNK), workers))
        margins = np.minimum(hs - tgt[0], tgt[1] - hs)
        bad = np.flatnonzero(~(margins > 0))
        first = None
        if bad.size:
            k = int(bad[0])
            first = (float(s[k]), float(t[k]), float(hs[k]))
        r = InclusionResult(j, src, tgt, samples, int(bad.size), float(margins.min()), first)
        if strict and bad.size:
            raise InclusionFailure(f"h(A_{j}) leaves A_{j + 1} at a sample", j=j, sample=first)
        results.append(r)
    return WanderingReport(alpha, mode, hyp, rule_res, results, circle_ladder(gm))
