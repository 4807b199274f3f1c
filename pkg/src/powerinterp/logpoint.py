"""Nonzero complex numbers stored as (log-modulus, argument).

Radii in the constructions here grow doubly exponentially, so every point
and every value is carried in log-polar form.  The origin is encoded by a
log-modulus of ``-inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a):
    """Reduce angles to (-pi, pi]; works on scalars and arrays."""
    a = np.asarray(a, dtype=float)
    # angles already in range pass through untouched, so they round-trip exactly
    w = np.where((a > -np.pi) & (a <= np.pi), a, np.pi - np.mod(np.pi - a, TWO_PI))
    if np.ndim(w) == 0:
        return float(w)
    return w


def angle_diff(a, b):
    """Signed difference a - b reduced to (-pi, pi]."""
    return wrap_angle(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))


def log_of(z):
    """Vectorized complex -> (log-modulus, arg)."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore"):
        s = np.log(np.abs(z))
    t = np.angle(z)
    return s, wrap_angle(t)


def exp_of(s, t):
    """Vectorized (log-modulus, arg) -> complex."""
    s = np.asarray(s, dtype=float)
    return np.exp(s) * np.exp(1j * np.asarray(t, dtype=float))


def log_sub(s1, t1, s2, t2):
    """Log form of z1 - z2 for log-form inputs, accurate for huge moduli.

    Factors out the larger modulus so nothing leaves double range.
    """
    s1, t1, s2, t2 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (s1, t1, s2, t2)))
    big = np.maximum(s1, s2)
    finite = np.isfinite(big)
    base = np.where(finite, big, 0.0)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        q = np.exp(s1 - base) * np.exp(1j * t1) - np.exp(s2 - base) * np.exp(1j * t2)
    qs, qt = log_of(q)
    return np.where(finite, qs + base, -np.inf), np.where(finite, qt, 0.0)


@dataclass(frozen=True)
class LogPoint:
    log_mod: float
    arg: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "log_mod", float(self.log_mod))
        object.__setattr__(self, "arg", wrap_angle(self.arg) if math.isfinite(self.log_mod) else 0.0)

    @classmethod
    def from_complex(cls, z: complex) -> "LogPoint":
        z = complex(z)
        if z == 0:
            return ORIGIN
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real))

    @classmethod
    def polar(cls, radius: float, angle: float = 0.0) -> "LogPoint":
        return cls(math.log(radius), angle)

    @property
    def is_origin(self) -> bool:
        return self.log_mod == -math.inf

    def to_complex(self) -> complex:
        if self.is_origin:
            return 0j
        return math.exp(self.log_mod) * complex(math.cos(self.arg), math.sin(self.arg))

    def __mul__(self, other: "LogPoint") -> "LogPoint":
        return LogPoint(self.log_mod + other.log_mod, self.arg + other.arg)

    def __truediv__(self, other: "LogPoint") -> "LogPoint":
        return LogPoint(self.log_mod - other.log_mod, self.arg - other.arg)

    def __pow__(self, k: int) -> "LogPoint":
        if self.is_origin:
            return ORIGIN
        return LogPoint(k * self.log_mod, k * self.arg)

    def __sub__(self, other: "LogPoint") -> "LogPoint":
        s, t = log_sub(self.log_mod, self.arg, other.log_mod, other.arg)
        return LogPoint(float(s), float(t))

    def close_to(self, other: "LogPoint", tol: float = 1e-12) -> bool:
        if self.is_origin or other.is_origin:
            return self.is_origin and other.is_origin
        return (abs(self.log_mod - other.log_mod) <= tol
                and abs(angle_diff(self.arg, other.arg)) <= tol)

    def as_tuple(self):
        return (self.log_mod, self.arg)


ORIGIN = LogPoint(-math.inf, 0.0)


def as_arrays(points):
    """Split a sequence of LogPoints into (log_mod, arg) arrays."""
    pts = list(points)
    return (np.array([p.log_mod for p in pts], dtype=float),
            np.array([p.arg for p in pts], dtype=float))


def log_residual(s1, t1, s2, t2):
    """Componentwise log-space residual, arg compared modulo 2*pi."""
    ds = np.abs(np.asarray(s1, dtype=float) - np.asarray(s2, dtype=float))
    dt = np.abs(angle_diff(t1, t2))
    return np.maximum(ds, dt)
