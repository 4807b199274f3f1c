"""Command line interface.

Exit codes: 0 pass, 1 failure, 2 configuration parse error, 3 hypothesis
violated (wandering suite on a family without the radius rule).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

from .config import ConfigError, load_family, load_render_spec
from .errors import PowerInterpError

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_HYPOTHESIS = 0, 1, 2, 3


def _emit(obj, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if hasattr(o, "item"):
        return o.item()
    if isinstance(o, tuple):
        return list(o)
    return repr(o)


def _clean(obj):
    """Replace non-finite floats so the output stays strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _fail(exc: PowerInterpError, code: int) -> int:
    _emit({"status": "error", "diagnostic": _clean(exc.diagnostic())})
    print(f"error: {exc}", file=sys.stderr)
    return code


def _family(args):
    cfg = load_family(args.config)
    if getattr(args, "seed", None) is None:
        args.seed = cfg.seed
    return cfg


def _params_summary(p):
    return {"M": list(p.M), "next_degree": p.next_degree, "log_r": list(p.log_r),
            "log_c": [list(x) for x in p.log_c], "mode": p.mode, "log_r_inf": p.log_r_inf,
            "growth_ok": p.growth_ok, "ratio_bound": p.ratio_bound}


# -- subcommands ---------------------------------------------------------------

def cmd_validate(args) -> int:
    from .sequences import is_strongly_permissible, radius_rule_residuals
    cfg = _family(args)
    p = cfg.params
    perm = is_strongly_permissible(p)
    res = radius_rule_residuals(p)
    _emit(_clean({"status": "valid", "params": _params_summary(p),
                  "permissibility": {"partial_sum": perm.partial_sum, "verdict": perm.verdict,
                                     "tail_bound": perm.tail_bound},
                  "radius_rule_residual": max(res) if res else 0.0}))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .suites import run_suite
    cfg = _family(args)
    kw = {}
    alpha = args.alpha if args.alpha is not None else cfg.alpha
    if alpha is not None:
        kw["alpha"] = alpha
    mode = args.mode or cfg.alpha_mode
    if mode is not None:
        kw["mode"] = mode
    samples = args.samples if args.samples is not None else cfg.samples
    results = run_suite(cfg.params, args.suite, samples=samples, seed=args.seed, **kw)
    hyp = any(r.hypothesis_violated for r in results)
    passed = all(r.passed for r in results)
    status = "hypothesis-violated" if hyp else ("pass" if passed else "fail")
    first = next((c.as_dict() | {"suite": r.name} for r in results for c in r.checks
                  if not c.passed), None)
    _emit(_clean({"status": status, "suite": args.suite, "seed": args.seed, "samples": samples,
                  "params": _params_summary(cfg.params), "first_failure": first,
                  "results": [r.as_dict() for r in results]}))
    if hyp:
        return EXIT_HYPOTHESIS
    return EXIT_OK if passed else EXIT_FAIL


def cmd_render(args) -> int:
    from .render import render
    cfg = _family(args)
    spec = load_render_spec(args.spec)
    out = args.output or spec.output
    if not out:
        raise ConfigError("no output path (give --output or 'output' in the render file)", None, "output")
    result = render(cfg.params, spec)
    try:
        with open(out, "wb") as fh:
            fh.write(result.ppm_bytes())
    except OSError as exc:
        _emit({"status": "error", "diagnostic": {
            "error": "OSError", "module": "cli", "operation": "render",
            "message": f"cannot write {out}: {exc.strerror}", "datum": {"path": out}}})
        return EXIT_FAIL
    _emit({"status": "ok", "output": out, **result.report()})
    return EXIT_OK


def cmd_render_cell(args) -> int:
    from .folding import build_cell, cell_svg
    m = args.m
    if m < 2:
        _emit({"status": "error", "diagnostic": {
            "error": "DegenerateCell", "module": "folding", "operation": "build_cell",
            "message": f"cell parameter must be at least 2, got {m}", "datum": {"m": m}}})
        return EXIT_FAIL
    cell = build_cell(m)
    out = args.output or f"cell_m{m}.svg"
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(cell_svg(cell))
    except OSError as exc:
        _emit({"status": "error", "diagnostic": {
            "error": "OSError", "module": "cli", "operation": "render-cell",
            "message": f"cannot write {out}: {exc.strerror}", "datum": {"path": out}}})
        return EXIT_FAIL
    _emit({"status": "ok", "output": out, "m": m, "triangles": len(cell.K_tri),
           "max_affine_K": max(cell.K_tri)})
    return EXIT_OK


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in row])


def cmd_report(args) -> int:
    from . import plotting
    from .analysis import dilatation_report, integral_bound
    from .dynamics import verify_wandering
    from .globalmap import GlobalMap
    from .suites import default_wandering_range
    cfg = _family(args)
    p = cfg.params
    gm = GlobalMap(p)
    out = args.output or "report"
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        _emit({"status": "error", "diagnostic": {
            "error": "OSError", "module": "cli", "operation": "report",
            "message": f"cannot create {out}: {exc.strerror}", "datum": {"path": out}}})
        return EXIT_FAIL
    samples = args.samples if args.samples is not None else (cfg.samples or 400)
    sd = gm.singular_data()
    dil = dilatation_report(gm, samples, args.seed)
    bound = integral_bound(p, dil.K_hat)
    files = {}

    def path(name):
        files[name] = os.path.join(out, name)
        return files[name]

    _write_csv(path("singular.csv"),
               ["kind", "annulus", "k", "l", "family", "logMod", "arg", "tag"], sd.records())
    _write_csv(path("dilatation.csv"), ["kind", "annulus", "max_K", "samples", "discards"],
               dil.rows())
    _write_csv(path("bound.csv"), ["J", "partial_bound"],
               [(j + 1, v) for j, v in enumerate(bound.partial_sums)])
    plotting.plot_singular(sd, path("singular.png"))
    plotting.plot_dilatation(dil, path("dilatation.png"))
    plotting.plot_bound(bound, path("bound.png"))
    summary = {"status": "ok", "params": _params_summary(p), "K_hat": dil.K_hat,
               "critical_points": len(sd.critical_points), "zeros": len(sd.zeros),
               "integral_bound": {"closed_form": bound.closed_form, "area_form": bound.area_form,
                                  "tail_bound": bound.tail_bound, "verdict": bound.verdict}}
    jr = list(default_wandering_range(p))
    if jr:
        alpha = args.alpha if args.alpha is not None else (cfg.alpha or 1.1)
        mode = args.mode or cfg.alpha_mode or "shrink"
        wr = verify_wandering(gm, alpha, jr, samples, mode=mode, seed=args.seed)
        _write_csv(path("wandering.csv"), ["j", "samples", "failures", "margin"],
                   [(r.j, r.samples, r.failures, r.margin) for r in wr.inclusions])
        plotting.plot_wandering(wr, path("wandering.png"))
        summary["wandering"] = wr.as_dict()
    summary["files"] = files
    _emit(_clean(summary))
    return EXIT_OK


def cmd_orbit(args) -> int:
    from .dynamics import orbit
    from .logpoint import LogPoint
    cfg = _family(args)
    if args.z is not None:
        try:
            z0 = LogPoint.from_complex(complex(args.z.replace("i", "j")))
        except ValueError:
            raise ConfigError(f"not a complex number: {args.z!r}", None, "--z") from None
    else:
        s, t = (float(x) for x in args.start.split(","))
        z0 = LogPoint(s, t)
    tr = orbit(z0, cfg.params, args.steps)
    text = tr.to_csv()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        _emit({"status": "ok", "output": args.output, "orbit_status": str(tr.status),
               "points": len(tr.points)})
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="powerinterp",
                                 description="Quasiregular interpolation of power maps.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="family config file")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--samples", type=int, default=None)
        sp.add_argument("--output", default=None)
        sp.add_argument("--alpha", type=float, default=None)
        sp.add_argument("--mode", choices=("literal", "shrink"), default=None)

    sp = sub.add_parser("validate", help="check a family for permissibility")
    common(sp)
    sp.set_defaults(func=cmd_validate)
    sp = sub.add_parser("verify", help="run invariant suites")
    common(sp)
    sp.add_argument("--suite", default="all",
                    choices=("boundaries", "singular", "dilatation", "wandering", "all"))
    sp.set_defaults(func=cmd_verify)
    sp = sub.add_parser("render", help="render a PPM image")
    common(sp)
    sp.add_argument("--spec", required=True, help="render spec file")
    sp.set_defaults(func=cmd_render)
    sp = sub.add_parser("render-cell", help="draw the cell triangulation as SVG")
    sp.add_argument("m", type=int, nargs="?", default=None)
    sp.add_argument("--m", dest="m_opt", type=int, default=None)
    sp.add_argument("--output", default=None)
    sp.set_defaults(func=cmd_render_cell)
    sp = sub.add_parser("report", help="write CSV tables and PNG figures")
    common(sp)
    sp.set_defaults(func=cmd_report)
    sp = sub.add_parser("orbit", help="iterate h and export the orbit as CSV")
    common(sp)
    sp.add_argument("--z", default=None, help="start point as a complex number, e.g. 30+2i")
    sp.add_argument("--start", default="0,0", help="start point as 'logMod,arg'")
    sp.add_argument("--steps", type=int, default=20)
    sp.set_defaults(func=cmd_orbit)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "render-cell":
        args.m = args.m if args.m is not None else args.m_opt
        if args.m is None:
            ap.error("render-cell needs m")
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(exc, EXIT_PARSE)
    except PowerInterpError as exc:
        return _fail(exc, EXIT_FAIL)


if __name__ == "__main__":
    sys.exit(main())
