"""Degree/radius sequences, permissibility checks and scaling constants.

All radii and constants are kept in log space from the moment they are
ingested.  Conventions: ``M_0 = 1`` and ``r_0 = 0`` are implicit and never
stored.  Indices in the public API are 1-based to match the usual
``M_1 < M_2 < ...`` labelling; the tuples themselves are 0-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (DiskRadiusViolation, GrowthViolation, NonIncreasingDegrees,
                     ParameterOverflow, ParamsError, ZeroBaseConstant)
from .logpoint import LogPoint

# Annulus widths pi/M_j must stay resolvable next to log r_j.
_RESOLUTION = 1e6


@dataclass(frozen=True)
class GrowthRule:
    """Generator for the infinite continuation of the degree sequence.

    ``kind`` is ``"geometric"`` (M_j = first * ratio**(j-1)) or ``"linear"``
    (M_j = first + step*(j-1)).
    """
    kind: str
    first: int
    ratio: float = 2.0
    step: int = 1

    def __post_init__(self):
        if self.kind not in ("geometric", "linear"):
            raise ParamsError(f"unknown growth rule {self.kind!r}", kind=self.kind)

    def degree(self, j: int) -> int:
        if self.kind == "geometric":
            return int(round(self.first * self.ratio ** (j - 1)))
        return self.first + self.step * (j - 1)


@dataclass(frozen=True)
class Params:
    M: tuple
    log_r: tuple
    c: LogPoint
    log_c: tuple
    mode: str = "plane"
    log_r_inf: Optional[float] = None
    next_degree: Optional[int] = None
    rule: Optional[GrowthRule] = None
    ratio_bound: float = 1.0
    growth_ok: bool = True
    growth_failures: tuple = field(default=())

    @property
    def J(self) -> int:
        return len(self.M)

    @property
    def n_interp(self) -> int:
        """Number of materialized interpolation annuli."""
        return self.J if self.next_degree is not None else self.J - 1

    def degree(self, j: int) -> int:
        """M_j with M_0 = 1; j = J+1 gives the next degree when known."""
        if j == 0:
            return 1
        if j <= self.J:
            return self.M[j - 1]
        if j == self.J + 1 and self.next_degree is not None:
            return self.next_degree
        raise IndexError(f"degree index {j} beyond truncation")

    def radius_log(self, j: int) -> float:
        """log r_j with log r_0 = -inf."""
        if j == 0:
            return -math.inf
        return self.log_r[j - 1]

    def scale(self, j: int) -> LogPoint:
        """c_j as a LogPoint."""
        s, t = self.log_c[j - 1]
        return LogPoint(s, t)

    @property
    def domain_end(self) -> float:
        """Log-modulus beyond which evaluation is refused."""
        if self.next_degree is not None:
            return self.log_r[-1] + math.pi / self.M[-1]
        return self.log_r[-1]


def _as_logpoint(c) -> LogPoint:
    if isinstance(c, LogPoint):
        return c
    if isinstance(c, tuple) and len(c) == 2:
        return LogPoint(*c)
    return LogPoint.from_complex(complex(c))


def _recursion(M, log_r, c: LogPoint, upto: int):
    out = [(c.log_mod, c.arg)]
    for j in range(2, upto + 1):
        prev = out[-1][0]
        out.append((prev + (M[j - 2] - M[j - 1]) * log_r[j - 2], c.arg))
    return out


def validate(M: Sequence[int], r: Optional[Sequence[float]] = None, c=1.0,
             mode: str = "plane", *, log_r: Optional[Sequence[float]] = None,
             r_inf: Optional[float] = None, log_r_inf: Optional[float] = None,
             next_degree: Optional[int] = None, rule: Optional[GrowthRule] = None,
             strict: bool = True) -> Params:
    """Check a truncated parameter family and build :class:`Params`.

    Either ``r`` (plain radii) or ``log_r`` must be given.  ``M`` may carry one
    more entry than the radii, in which case the last entry is taken as the
    next degree M_{J+1}, materializing the outermost interpolation annulus.
    With ``strict=False`` growth violations are recorded in the result instead
    of raised.
    """
    M = [int(x) for x in M]
    if log_r is None:
        if r is None:
            raise ParamsError("radii missing", operation="validate")
        if any(x <= 0 for x in r):
            raise ParamsError("radii must be positive", r=list(r))
        log_r = [math.log(x) for x in r]
    log_r = [float(x) for x in log_r]
    if len(M) == len(log_r) + 1 and next_degree is None:
        next_degree = M.pop()
    if not M or not log_r:
        raise ParamsError("degree and radius lists must be nonempty", M=M, log_r=log_r)
    if len(M) != len(log_r):
        raise ParamsError(f"length mismatch: {len(M)} degrees vs {len(log_r)} radii",
                          M=M, log_r=log_r)
    if M[0] < 1:
        raise NonIncreasingDegrees("degrees must be positive integers", M=M)
    full = M + ([next_degree] if next_degree is not None else [])
    for j in range(1, len(full)):
        if full[j] <= full[j - 1]:
            raise NonIncreasingDegrees(
                f"degrees must increase strictly: M_{j} = {full[j - 1]}, M_{j + 1} = {full[j]}",
                j=j, M=full)
    c = _as_logpoint(c)
    if c.is_origin or not math.isfinite(c.log_mod):
        raise ZeroBaseConstant("base constant c must be nonzero", c=c.as_tuple())
    if mode not in ("plane", "disk"):
        raise ParamsError(f"unknown mode {mode!r}", mode=mode)

    failures = []
    for j in range(1, len(log_r)):
        gap = log_r[j] - log_r[j - 1]
        required = math.pi / M[j - 1]
        if not gap >= required:
            if strict:
                raise GrowthViolation(j, gap, required)
            failures.append(j)

    if mode == "disk":
        if log_r_inf is None:
            if r_inf is None:
                raise ParamsError("disk mode needs r_inf", mode=mode)
            log_r_inf = math.log(r_inf)
        for j, lr in enumerate(log_r, start=1):
            if not lr < log_r_inf:
                raise DiskRadiusViolation(j, lr, log_r_inf)
        if next_degree is not None and log_r[-1] + math.pi / M[-1] > log_r_inf:
            raise DiskRadiusViolation(len(log_r), log_r[-1] + math.pi / M[-1], log_r_inf)
    else:
        log_r_inf = None

    for j, lr in enumerate(log_r, start=1):
        if not math.isfinite(lr) or abs(lr) * np.finfo(float).eps * _RESOLUTION > math.pi / M[j - 1]:
            raise ParameterOverflow(
                f"log r_{j} = {lr!r} leaves the annulus width pi/M_{j} unresolvable",
                j=j, log_r=lr)

    ratios = [full[j] / full[j - 1] for j in range(1, len(full))]
    upto = len(M) + (1 if next_degree is not None else 0)
    log_c = _recursion(full, log_r, c, upto)
    for j, (lc, _) in enumerate(log_c, start=1):
        if not math.isfinite(lc):
            raise ParameterOverflow(f"log c_{j} overflowed", j=j)
    return Params(M=tuple(M), log_r=tuple(log_r), c=c, log_c=tuple(log_c), mode=mode,
                  log_r_inf=log_r_inf, next_degree=next_degree, rule=rule,
                  ratio_bound=max(ratios) if ratios else 1.0,
                  growth_ok=not failures, growth_failures=tuple(failures))


def scaling_constants(p: Params):
    """(log|c_j|, arg c_j) for j = 1..J (and J+1 when the next degree is known)."""
    return list(p.log_c)


def scaling_constants_closed_form(p: Params):
    """Same constants from the telescoped product c * prod r_{k-1}^(M_{k-1}-M_k)."""
    full = list(p.M) + ([p.next_degree] if p.next_degree is not None else [])
    out = []
    for j in range(1, len(p.log_c) + 1):
        terms = [(full[k - 2] - full[k - 1]) * p.log_r[k - 2] for k in range(2, j + 1)]
        out.append((math.fsum([p.c.log_mod] + terms), p.c.arg))
    return out


@dataclass(frozen=True)
class Permissibility:
    partial_sum: float
    verdict: str            # "convergent", "divergent" or "finite-prefix only"
    tail_bound: Optional[float] = None


def is_strongly_permissible(p: Params, rule: Optional[GrowthRule] = None) -> Permissibility:
    """Partial sum of 1/M_j and, given a generator rule, a verdict on the full series."""
    rule = rule if rule is not None else p.rule
    partial = math.fsum(1.0 / m for m in p.M)
    if rule is None:
        return Permissibility(partial, "finite-prefix only")
    if rule.kind == "linear":
        return Permissibility(partial, "divergent" if rule.step >= 0 else "finite-prefix only")
    if rule.ratio > 1:
        nxt = rule.degree(p.J + 1)
        return Permissibility(partial, "convergent", (1.0 / nxt) * rule.ratio / (rule.ratio - 1.0))
    return Permissibility(partial, "divergent")


def wandering_radii(M: Sequence[int], c=1.0, log_r1: float = math.pi):
    """Radii from r_1 and the rule r_{j+1} = |c_j| r_j^{M_j}, in log form."""
    c = _as_logpoint(c)
    log_r = [float(log_r1)]
    log_c = c.log_mod
    for j in range(1, len(M)):
        nxt = log_c + M[j - 1] * log_r[-1]
        if not math.isfinite(nxt):
            raise ParameterOverflow(f"log r_{j + 1} overflowed", j=j + 1)
        log_r.append(nxt)
        log_c = log_c + (M[j - 1] - M[j]) * log_r[j - 1]
    return log_r


def generate_standard_family(M_1: int, ratio: int, J: int, c=1.0) -> Params:
    """Geometric degrees M_j = M_1*ratio^(j-1) with the wandering radius rule.

    The next degree M_{J+1} comes from the same geometric rule, so the J-th
    interpolation annulus is materialized.
    """
    if M_1 < 2 or ratio < 2 or J < 1:
        raise ParamsError("need M_1 >= 2, ratio >= 2, J >= 1", M_1=M_1, ratio=ratio, J=J)
    rule = GrowthRule("geometric", M_1, ratio)
    M = [M_1 * ratio ** (j - 1) for j in range(1, J + 1)]
    try:
        log_r = wandering_radii(M, c)
        return validate(M, log_r=log_r, c=c, next_degree=M_1 * ratio ** J, rule=rule)
    except ParameterOverflow as exc:
        raise ParameterOverflow(f"depth J={J} not representable: {exc}", J=J) from exc


def radius_rule_residuals(p: Params):
    """|log|c_j| + M_j log r_j - log r_{j+1}| for j = 1..J-1."""
    return [abs(p.log_c[j - 1][0] + p.M[j - 1] * p.log_r[j - 1] - p.log_r[j])
            for j in range(1, p.J)]
