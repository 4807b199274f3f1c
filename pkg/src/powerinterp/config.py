"""Line-based ``key = value`` configuration files.

Family configs::

    # standard family
    mode = plane
    c = 1
    M.first = 2
    M.ratio = 2
    depth = 4
    r = wandering-rule
    seed = 0

Degrees are either an explicit ``M = 2, 4, 8`` list or a generator
(``M.first``/``M.ratio`` for geometric, ``M.first``/``M.step`` for linear
growth, plus ``depth``).  Radii are ``r = ...``, ``r.log = ...`` (log
radii; ``pi`` multiples allowed) or ``r = wandering-rule``.  ``c`` may be
written ``c = 2``, ``c.re``/``c.im`` or ``c.logmod``/``c.arg``.  Disk mode
needs ``r_inf`` or ``r_inf.log``.

Render specs use the same syntax with keys ``window`` (log|z| range then
arg range), ``window.cartesian`` (x range then y range), ``width``,
``height``, ``coloring``, ``output`` and ``max_steps``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError
from .sequences import GrowthRule, Params, validate, wandering_radii

FAMILY_KEYS = {
    "mode", "c", "c.re", "c.im", "c.logmod", "c.arg", "M", "M.first", "M.ratio", "M.step",
    "M.next", "r", "r.log", "r_inf", "r_inf.log", "depth", "seed", "samples", "alpha",
    "alpha.mode",
}
RENDER_KEYS = {"window", "window.cartesian", "width", "height", "coloring", "output", "max_steps"}
COLORINGS = ("region-tag", "log-modulus-of-h", "escape-step", "fold-support-mask")
MAX_RESOLUTION = 16384

_NUMBER = re.compile(r"^\s*([-+])?\s*((?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*(\*?\s*pi)?"
                     r"\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_number(text: str, line=None, key=None) -> float:
    """A float, optionally written as a multiple or fraction of pi (``2*pi``, ``pi/3``)."""
    m = _NUMBER.match(text)
    if not m or (m.group(2) is None and m.group(3) is None) \
            or (m.group(3) and m.group(2) and "*" not in m.group(3)):
        raise ConfigError(f"not a number: {text.strip()!r}", line, key)
    value = float(m.group(2)) if m.group(2) is not None else 1.0
    if m.group(3):
        value *= math.pi
    if m.group(4):
        value /= float(m.group(4))
    return -value if m.group(1) == "-" else value


def parse_lines(text: str, allowed) -> dict:
    """key -> (raw value, line number); rejects unknown, duplicate and malformed lines."""
    out = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", no)
        key, value = (x.strip() for x in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", no)
        if key not in allowed:
            raise ConfigError("unknown key", no, key)
        if key in out:
            raise ConfigError(f"duplicate key (first on line {out[key][1]})", no, key)
        if not value:
            raise ConfigError("empty value", no, key)
        out[key] = (value, no)
    return out


def _numbers(entry, key):
    value, no = entry
    return [parse_number(x, no, key) for x in value.split(",")]


def _integer(entry, key):
    value, no = entry
    x = parse_number(value, no, key)
    if x != int(x):
        raise ConfigError(f"expected an integer, got {value!r}", no, key)
    return int(x)


@dataclass
class FamilyConfig:
    params: Params
    seed: int = 0
    samples: Optional[int] = None
    alpha: Optional[float] = None
    alpha_mode: Optional[str] = None
    rule: Optional[GrowthRule] = None
    source: dict = field(default_factory=dict)


def _constant(kv):
    if "c" in kv:
        value, no = kv["c"]
        try:
            return complex(value.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise ConfigError(f"not a complex number: {value!r}", no, "c") from None
    if "c.logmod" in kv or "c.arg" in kv:
        s = _numbers(kv["c.logmod"], "c.logmod")[0] if "c.logmod" in kv else 0.0
        t = _numbers(kv["c.arg"], "c.arg")[0] if "c.arg" in kv else 0.0
        return (s, t)
    re_ = _numbers(kv["c.re"], "c.re")[0] if "c.re" in kv else (0.0 if "c.im" in kv else 1.0)
    im = _numbers(kv["c.im"], "c.im")[0] if "c.im" in kv else 0.0
    return complex(re_, im)


def build_family(kv: dict) -> FamilyConfig:
    """Params from parsed key/values.  Raises ConfigError or a ParamsError."""
    mode = kv.get("mode", ("plane", None))[0]
    if mode not in ("plane", "disk"):
        raise ConfigError(f"mode must be plane or disk, got {mode!r}", kv["mode"][1], "mode")
    forms = [k for k in ("c", "c.re", "c.logmod") if k in kv]
    if len(forms) > 1 or ("c.im" in kv and "c.logmod" in kv) or ("c.arg" in kv and "c.re" in kv):
        raise ConfigError("give c in one form only", kv[forms[-1]][1] if forms else None, "c")
    c = _constant(kv)

    rule = None
    if "M" in kv:
        if any(k in kv for k in ("M.first", "M.ratio", "M.step")):
            raise ConfigError("M list and M generator are exclusive", kv["M"][1], "M")
        M = [_integer((x, kv["M"][1]), "M") for x in kv["M"][0].split(",")]
    else:
        if "M.first" not in kv or "depth" not in kv:
            raise ConfigError("need either M or M.first with depth", None, "M")
        first = _integer(kv["M.first"], "M.first")
        depth = _integer(kv["depth"], "depth")
        if depth < 1:
            raise ConfigError("depth must be at least 1", kv["depth"][1], "depth")
        if "M.step" in kv:
            rule = GrowthRule("linear", first, step=_integer(kv["M.step"], "M.step"))
        else:
            ratio = _numbers(kv["M.ratio"], "M.ratio")[0] if "M.ratio" in kv else 2.0
            rule = GrowthRule("geometric", first, ratio)
        M = [rule.degree(j) for j in range(1, depth + 1)]
    next_degree = _integer(kv["M.next"], "M.next") if "M.next" in kv else None
    if next_degree is None and rule is not None:
        next_degree = rule.degree(len(M) + 1)

    rkey = [k for k in ("r", "r.log") if k in kv]
    if len(rkey) != 1:
        raise ConfigError("give exactly one of r, r.log", None, "r")
    rkey = rkey[0]
    value, no = kv[rkey]
    if value.strip() == "wandering-rule":
        log_r = wandering_radii(M, c)
    elif rkey == "r":
        log_r = [math.log(x) if x > 0 else math.nan for x in _numbers(kv[rkey], rkey)]
        if any(math.isnan(x) for x in log_r):
            raise ConfigError("radii must be positive", no, rkey)
    else:
        log_r = _numbers(kv[rkey], rkey)
    if rule is None and len(M) == len(log_r) + 1 and next_degree is None:
        next_degree = M.pop()

    log_r_inf = None
    if mode == "disk":
        if "r_inf.log" in kv:
            log_r_inf = _numbers(kv["r_inf.log"], "r_inf.log")[0]
        elif "r_inf" in kv:
            x = _numbers(kv["r_inf"], "r_inf")[0]
            if not x > 0:
                raise ConfigError("r_inf must be positive", kv["r_inf"][1], "r_inf")
            log_r_inf = math.log(x)
        else:
            raise ConfigError("disk mode needs r_inf", None, "r_inf")
        if next_degree is not None and log_r[-1] + math.pi / M[-1] > log_r_inf and "M.next" not in kv:
            next_degree = None          # the generator's next annulus would leave the disk
    params = validate(M, log_r=log_r, c=c, mode=mode, log_r_inf=log_r_inf,
                      next_degree=next_degree, rule=rule)
    return _extras(kv, FamilyConfig(params, rule=rule))


def _extras(kv, cfg: FamilyConfig) -> FamilyConfig:
    if "seed" in kv:
        cfg.seed = _integer(kv["seed"], "seed")
    if "samples" in kv:
        cfg.samples = _integer(kv["samples"], "samples")
    if "alpha" in kv:
        cfg.alpha = _numbers(kv["alpha"], "alpha")[0]
    if "alpha.mode" in kv:
        cfg.alpha_mode = kv["alpha.mode"][0]
        if cfg.alpha_mode not in ("shrink", "literal"):
            raise ConfigError("alpha.mode must be shrink or literal", kv["alpha.mode"][1], "alpha.mode")
    cfg.source = {k: v for k, (v, _) in kv.items()}
    return cfg


def load_family(path) -> FamilyConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return build_family(parse_lines(text, FAMILY_KEYS))


@dataclass(frozen=True)
class RenderSpec:
    window: tuple           # (a0, a1, b0, b1)
    cartesian: bool
    width: int
    height: int
    coloring: str
    output: Optional[str] = None
    max_steps: int = 12

    def __post_init__(self):
        a0, a1, b0, b1 = self.window
        if not (a1 > a0 and b1 > b0):
            raise ConfigError("window must be nonempty", None, "window")
        if not (1 <= self.width <= MAX_RESOLUTION and 1 <= self.height <= MAX_RESOLUTION):
            raise ConfigError(f"resolution must be within 1..{MAX_RESOLUTION}", None, "width")
        if self.coloring not in COLORINGS:
            raise ConfigError(f"coloring must be one of {', '.join(COLORINGS)}", None, "coloring")


def parse_render_spec(text: str) -> RenderSpec:
    kv = parse_lines(text, RENDER_KEYS)
    if ("window" in kv) == ("window.cartesian" in kv):
        raise ConfigError("give exactly one of window, window.cartesian", None, "window")
    key = "window" if "window" in kv else "window.cartesian"
    win = _numbers(kv[key], key)
    if len(win) != 4:
        raise ConfigError("window needs four numbers", kv[key][1], key)
    for k in ("width", "height", "coloring"):
        if k not in kv:
            raise ConfigError("missing key", None, k)
    coloring = kv["coloring"][0]
    if coloring not in COLORINGS:
        raise ConfigError(f"coloring must be one of {', '.join(COLORINGS)}", kv["coloring"][1], "coloring")
    return RenderSpec(tuple(win), key == "window.cartesian", _integer(kv["width"], "width"),
                      _integer(kv["height"], "height"), coloring,
                      kv["output"][0] if "output" in kv else None,
                      _integer(kv["max_steps"], "max_steps") if "max_steps" in kv else 12)


def load_render_spec(path) -> RenderSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_render_spec(text)
