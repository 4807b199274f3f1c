"""Numerical quasiconformality checks: Beltrami coefficients, dilatation
reports, the integral bound for conformality at infinity, winding numbers.

Maps are plain callables ``f(s, t) -> (s', t')`` on log-polar arrays, so the
same code handles h, g, psi (through :func:`complex_map`) and sigma.  All K
values produced here are sampled estimates, i.e. lower bounds for the true
essential supremum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateDerivative, NonIntegralWinding, TooCloseToBoundary, ZeroOnContour
from .globalmap import GlobalMap, RegionKind
from .logpoint import LogPoint, exp_of, log_of, log_sub, wrap_angle
from .sequences import GrowthRule, Params

LogMap = Callable[[np.ndarray, np.ndarray], tuple]

DEFAULT_STEP = 1e-5
KINK_TOL = 1e-6          # step-halving consistency of mu; smooth points agree to ~1e-10
MAX_SHRINK = 6


def complex_map(fn) -> LogMap:
    """Wrap a vectorized complex function as a log-form map."""
    def wrapped(s, t):
        return log_of(fn(exp_of(s, t)))
    return wrapped


def global_map(gm: GlobalMap, side: str = "below") -> LogMap:
    def wrapped(s, t):
        return gm.h_arrays(s, t, side=side)
    return wrapped


# -- Beltrami coefficients ---------------------------------------------------

_STENCIL = np.array([1.0, -1.0, 1j, -1j])


def _stencil_points(s, t, delta):
    """Log form of z0 (1 + delta * e) for the four stencil directions e."""
    w = 1.0 + np.multiply.outer(delta, _STENCIL)
    return (s[..., None] + np.log(np.abs(w)), t[..., None] + np.angle(w))


def _mu_raw(fn: LogMap, s, t, delta):
    """Central-difference mu in the flat chart w = z/z0 - 1, rotated back to z."""
    ss, tt = _stencil_points(s, t, delta)
    f0s, f0t = fn(s, t)
    fs, ft = fn(ss, tt)
    F = np.exp(fs - f0s[..., None]) * np.exp(1j * wrap_angle(ft - f0t[..., None]))
    dx = F[..., 0] - F[..., 1]
    dy = F[..., 2] - F[..., 3]
    fw = (dx - 1j * dy) / (4 * delta)
    fwb = (dx + 1j * dy) / (4 * delta)
    return fw, fwb


def beltrami_arrays(fn: LogMap, s, t, delta=DEFAULT_STEP, tag_fn=None):
    """Vectorized Beltrami estimate.

    ``delta`` is the relative chart step (step = delta * |z|).  Returns
    ``(mu, valid, delta_used)``.  A sample is valid when the estimate is
    unchanged (to KINK_TOL) under halving the step, i.e. the stencil does not
    straddle a triangle edge, slit or region boundary.  ``tag_fn`` maps log
    moduli to integer region codes; stencils crossing codes are shrunk first.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    delta = np.broadcast_to(np.asarray(delta, dtype=float), s.shape).copy()
    if tag_fn is not None:
        centre = tag_fn(s)
        for _ in range(MAX_SHRINK):
            ss, _tt = _stencil_points(s, t, delta)
            crossing = np.any(tag_fn(ss) != centre[..., None], axis=-1)
            if not np.any(crossing):
                break
            delta = np.where(crossing, delta / 4, delta)
        else:
            ss, _tt = _stencil_points(s, t, delta)
            crossing = np.any(tag_fn(ss) != centre[..., None], axis=-1)
    else:
        crossing = np.zeros(s.shape, dtype=bool)
    fw, fwb = _mu_raw(fn, s, t, delta)
    fw2, fwb2 = _mu_raw(fn, s, t, delta / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu_w = fwb / fw
        mu_w2 = fwb2 / fw2
    rot = np.exp(2j * t)
    valid = (~crossing) & (np.abs(fw) > 1e-14) & (np.abs(mu_w - mu_w2) <= KINK_TOL)
    return mu_w2 * rot, valid, delta


@dataclass(frozen=True)
class BeltramiSample:
    point: LogPoint
    mu: complex
    K_local: float
    step: float
    region_tag: Optional[str] = None


def k_of_mu(mu):
    a = np.abs(mu)
    with np.errstate(divide="ignore"):
        return (1 + a) / (1 - a)


def beltrami_estimate(fn, z: LogPoint, step: float = DEFAULT_STEP, *, region_tag=None,
                      tag_fn=None) -> BeltramiSample:
    """Beltrami coefficient of ``fn`` at ``z``; ``step`` is relative to |z|.

    ``fn`` may be a log-form map or a :class:`GlobalMap`.
    """
    if isinstance(fn, GlobalMap):
        gm = fn
        fn = global_map(gm)
        tag_fn = tag_fn or (lambda s: _tag_codes(gm, s))
        region_tag = region_tag or str(gm.classify(z))
    s = np.array([z.log_mod])
    t = np.array([z.arg])
    fw, _ = _mu_raw(fn, s, t, np.array([step]))
    if not abs(fw[0]) > 1e-14:
        raise DegenerateDerivative("f_z vanishes numerically", point=z.as_tuple(), f_z=complex(fw[0]))
    mu, valid, used = beltrami_arrays(fn, s, t, step, tag_fn=tag_fn)
    if not valid[0]:
        raise TooCloseToBoundary("stencil straddles an edge, slit or region boundary",
                                 point=z.as_tuple(), step=step)
    m = complex(mu[0])
    return BeltramiSample(z, m, float(k_of_mu(m)), float(used[0]) * math.exp(z.log_mod), region_tag)


def _tag_codes(gm: GlobalMap, s):
    kind, j = gm.classify_arrays(s)
    return kind * 1000 + j


# -- dilatation report -------------------------------------------------------

@dataclass
class AnnulusDilatation:
    kind: str
    j: int
    max_K: float
    samples: int
    discards: int


@dataclass
class DilatationReport:
    annuli: list
    K_hat: float

    def rows(self):
        return [(a.kind, a.j, a.max_K, a.samples, a.discards) for a in self.annuli]


def _jittered_unit_grid(count: int, rng: np.random.Generator):
    """Quasi-uniform points of (0,1)^2: a jittered sqrt(count) x sqrt(count) grid."""
    side = max(1, int(math.ceil(math.sqrt(count))))
    i, k = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    u = (i.ravel() + 0.1 + 0.8 * rng.random(side * side)) / side
    v = (k.ravel() + 0.1 + 0.8 * rng.random(side * side)) / side
    return u[:count], v[:count]


def dilatation_report(p, samples_per_annulus: int = 400, seed: int = 0,
                      step: float = DEFAULT_STEP) -> DilatationReport:
    """Sampled max K per annulus (power and interpolation) and the global K-hat.

    Interpolation annulus j is sampled at the same normalized positions for
    every j: radial fraction u of its width pi/M_j and angular position v of
    one sector of width 2 pi/M_j, cycling through sectors.  The relative step
    is scaled by pi/M_j as well, so annuli of the same (n, M) shape give
    identical estimates.
    """
    gm = p if isinstance(p, GlobalMap) else GlobalMap(p)
    p = gm.params
    fn = global_map(gm)
    tag_fn = lambda s: _tag_codes(gm, s)  # noqa: E731
    annuli = []
    for j in range(1, p.J + 1):
        for kind in ("power", "interp"):
            if kind == "interp" and j > p.n_interp:
                continue
            rng = np.random.default_rng([seed, 0 if kind == "power" else 1])
            u, v = _jittered_unit_grid(samples_per_annulus, rng)
            n = p.M[j - 1]
            if kind == "interp":
                width = math.pi / n
                s = p.radius_log(j) + width * u
                sector = np.arange(u.size) % n
                t = wrap_angle(2 * math.pi * (sector + v) / n)
                delta = step * width
            else:
                lo = p.radius_log(j - 1) + math.pi / p.degree(j - 1) if j > 1 else p.radius_log(1) - math.pi
                s = lo + (p.radius_log(j) - lo) * u
                t = wrap_angle(2 * math.pi * v - math.pi)
                delta = step
            mu, valid, _ = beltrami_arrays(fn, s, t, delta, tag_fn=tag_fn)
            K = k_of_mu(mu[valid])
            annuli.append(AnnulusDilatation(kind, j, float(K.max()) if K.size else 1.0,
                                            int(valid.sum()), int((~valid).sum())))
    K_hat = max(a.max_K for a in annuli)
    return DilatationReport(annuli, K_hat)


def annulus_max_mu(n: int, M: int, samples: int = 400, seed: int = 0, logR: float = 0.0,
                   c=(0.0, 0.0), step: float = DEFAULT_STEP):
    """Max sampled |mu| of g_{n,M,r,c} at normalized jittered positions; (max, valid count)."""
    from .folding import build_fold_region, g_annulus_arrays
    region = build_fold_region(n, M)
    rng = np.random.default_rng([seed, 1])
    u, v = _jittered_unit_grid(samples, rng)
    width = math.pi / n
    s = logR + width * u
    t = wrap_angle(2 * math.pi * (np.arange(u.size) % n + v) / n)
    fn = lambda ss, tt: g_annulus_arrays(ss, tt, region, logR, c)  # noqa: E731
    inside = lambda ss: np.where((ss >= logR) & (ss <= logR + width), 0, 1)  # noqa: E731
    mu, valid, _ = beltrami_arrays(fn, s, t, step * width, tag_fn=inside)
    return float(np.abs(mu[valid]).max()), int(valid.sum())


def mu_grid(gm: GlobalMap, width: int = 200, height: int = 200, s_range=None, t_range=None,
            step: float = DEFAULT_STEP):
    """|mu| and region codes on a cell-centred log-polar grid over the materialized domain."""
    p = gm.params
    s0, s1 = s_range or (p.radius_log(1) - math.pi, p.domain_end)
    t0, t1 = t_range or (-math.pi, math.pi)
    s = s0 + (s1 - s0) * (np.arange(width) + 0.5) / width
    t = t0 + (t1 - t0) * (np.arange(height) + 0.5) / height
    S, T = np.meshgrid(s, t, indexing="ij")
    S, T = S.ravel(), T.ravel()
    kind, j = gm.classify_arrays(S)
    delta = np.where(kind == int(RegionKind.INTERP), step * math.pi / np.asarray(p.M)[j - 1], step)
    mu, valid, _ = beltrami_arrays(global_map(gm), S, T, delta, tag_fn=lambda x: _tag_codes(gm, x))
    return S, T, np.abs(mu), valid, kind, j


# -- integral bound ----------------------------------------------------------

@dataclass
class IntegralBound:
    closed_form: float          # (K-1)/2 * sum_{j<=J} (exp(2 pi/M_j) - 1)
    area_form: float            # same sum assembled from annulus areas over inner radii
    exact_integral: float       # (K-1) pi sum 1/M_j, the integral of (K-1)/|z|^2 itself
    verdict: str                # "convergent", "divergent" or "finite-prefix only"
    tail_bound: Optional[float] = None
    partial_sums: list = field(default_factory=list)

    @property
    def total_bound(self) -> Optional[float]:
        if self.tail_bound is None:
            return None
        return self.closed_form + self.tail_bound


def _bound_terms(M):
    return [math.expm1(2 * math.pi / m) for m in M]


def geometric_tail(rule: GrowthRule, J: int) -> float:
    """Bound for sum_{j>J} (exp(2 pi/M_j) - 1) under a geometric rule.

    exp(x) - 1 <= x (exp(x0) - 1)/x0 for 0 <= x <= x0, and the x_j = 2 pi/M_j
    form a geometric series of ratio 1/rho.
    """
    x0 = 2 * math.pi / rule.degree(J + 1)
    rho = rule.ratio
    return math.expm1(x0) * rho / (rho - 1)


def integral_bound(p, K_hat: float, rule: Optional[GrowthRule] = None) -> IntegralBound:
    """Truncated bound on I(r) for the straightening map, plus a tail verdict.

    ``p`` is a Params or a plain degree sequence.
    """
    if K_hat < 1:
        raise ValueError("K_hat must be >= 1")
    if isinstance(p, Params):
        M = list(p.M)
        rule = rule if rule is not None else p.rule
    else:
        M = [int(x) for x in p]
    k = (K_hat - 1) / 2
    terms = _bound_terms(M)
    closed = k * math.fsum(terms)
    partials = [float(x) for x in np.cumsum([k * x for x in terms])]
    # B_j = {exp(-pi/M_j) <= |z| <= 1} after scaling by r_j: area over inner radius squared.
    areas = []
    for m in M:
        inner_sq = math.exp(-2 * math.pi / m)
        areas.append((K_hat - 1) / (2 * math.pi) * math.pi * (1.0 - inner_sq) / inner_sq)
    area = math.fsum(areas)
    exact = (K_hat - 1) * math.pi * math.fsum(1.0 / m for m in M)
    tail = None
    if rule is None:
        verdict = "finite-prefix only"
    elif rule.kind == "geometric" and rule.ratio > 1:
        verdict = "convergent"
        tail = k * geometric_tail(rule, len(M))
    else:
        verdict = "divergent"
    if K_hat == 1:
        tail = 0.0 if tail is not None else None
    return IntegralBound(closed, area, exact, verdict, tail, partials)


def series_value(rule: GrowthRule, K_hat: float, tol: float = 1e-12):
    """Value of the full bound series for a convergent geometric rule, and the residual tail bound."""
    if rule.kind != "geometric" or rule.ratio <= 1:
        raise ValueError("series converges only for geometric rules with ratio > 1")
    k = (K_hat - 1) / 2
    terms = []
    J = 0
    while True:
        J += 1
        terms.append(math.expm1(2 * math.pi / rule.degree(J)))
        tail = k * geometric_tail(rule, J)
        if tail < tol:
            return k * math.fsum(terms), tail, J


# -- winding numbers ---------------------------------------------------------

def circle_points(center: LogPoint, radius_log: float, samples: int):
    theta = 2 * math.pi * np.arange(samples) / samples
    if center.is_origin:
        return np.full(samples, float(radius_log)), wrap_angle(theta)
    delta = math.exp(radius_log - center.log_mod)
    w = 1.0 + delta * np.exp(1j * theta)
    return center.log_mod + np.log(np.abs(w)), wrap_angle(center.arg + np.angle(w))


def shifted(fn: LogMap, value: LogPoint) -> LogMap:
    """f - value in log form."""
    def wrapped(s, t):
        fs, ft = fn(s, t)
        return log_sub(fs, ft, value.log_mod, value.arg)
    return wrapped


def winding_number(fn, center: LogPoint, radius_log: float, samples: int = 1024,
                   about: Optional[LogPoint] = None, max_samples: int = 2 ** 20) -> int:
    """Winding number about 0 (or ``about``) of fn along |z - center| = exp(radius_log).

    Samples double until every argument increment is below pi/4 and the total
    is within 0.05 turns of an integer.
    """
    if isinstance(fn, GlobalMap):
        fn = global_map(fn)
    if about is not None:
        fn = shifted(fn, about)
    n = samples
    while True:
        s, t = circle_points(center, radius_log, n)
        fs, ft = fn(s, t)
        if not np.all(np.isfinite(fs)) or fs.min() < np.median(fs) - 28.0:
            raise ZeroOnContour("map vanishes (numerically) on the circle",
                                center=center.as_tuple(), radius_log=radius_log)
        inc = wrap_angle(np.diff(np.append(ft, ft[0])))
        turns = inc.sum() / (2 * math.pi)
        w = int(round(turns))
        if np.abs(inc).max() < math.pi / 4 and abs(turns - w) < 0.05:
            return w
        if n >= max_samples:
            raise NonIntegralWinding("winding number did not settle",
                                     turns=float(turns), samples=n)
        n *= 2
