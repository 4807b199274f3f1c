"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints a single ``criterion N PASS|FAIL`` line; the lines are
repeated in the pytest terminal summary.  Run with::

    pytest tests/test_acceptance.py -v
"""
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from powerinterp.analysis import (beltrami_estimate, complex_map, dilatation_report,
                                  integral_bound, mu_grid, winding_number)
from powerinterp.dynamics import circle_ladder, truncated_orbit_compare, verify_wandering
from powerinterp.folding import (branched_data, build_fold_region, g_annulus_arrays,
                                 g_extended_arrays, on_slit, sigma)
from powerinterp.globalmap import GlobalMap, RegionKind
from powerinterp.logpoint import LogPoint, log_residual, wrap_angle
from powerinterp.sequences import GrowthRule, generate_standard_family

PI = math.pi
NM = [(2, 4), (2, 5), (2, 6), (3, 7), (8, 24)]
RADII = [0.0, math.log(10.0)]                      # r = 1, 10
CONSTANTS = [(0.0, 0.0), (math.log(2.0), PI / 2)]  # c = 1, 2i


def _finish(log, number, title, ok, detail, elapsed, budget=None):
    in_time = budget is None or elapsed < budget
    verdict = "PASS" if ok and in_time else "FAIL"
    timing = f"{elapsed:.2f}s" + (f" < {budget:g}s" if budget is not None and in_time else
                                  f" over {budget:g}s budget" if budget is not None else "")
    log(f"criterion {number} {verdict}: {title} [{detail}; {timing}]")
    assert ok, detail
    assert in_time, f"runtime {elapsed:.2f}s exceeds {budget}s"


@pytest.fixture(scope="module")
def standard():
    return generate_standard_family(2, 2, 4)


def test_criterion_1_boundary_identities(acceptance_log):
    t0 = time.perf_counter()
    theta = wrap_angle(2 * PI * (np.arange(1000) + 0.5) / 1000 - PI)
    worst = 0.0
    for n, M in NM:
        region = build_fold_region(n, M)
        for logR in RADII:
            for c in CONSTANTS:
                s = np.full(theta.size, logR)
                got = g_annulus_arrays(s, theta, region, logR, c)
                worst = max(worst, log_residual(*got, c[0] + n * s, c[1] + n * theta).max())
                s = s + PI / n
                got = g_annulus_arrays(s, theta, region, logR, c)
                want = (c[0] + M * s - (M - n) * logR, c[1] + M * theta)
                worst = max(worst, log_residual(*got, *want).max())
    _finish(acceptance_log, 1, "boundary identities", worst < 1e-9,
            f"max residual {worst:.2e} < 1e-9", time.perf_counter() - t0, 10)


def test_criterion_2_slit_continuity(acceptance_log):
    t0 = time.perf_counter()
    worst, slits = 0.0, 0
    x = (np.arange(100) + 0.5) / 200          # 100 radii along the slit Re w in (0, 1/2)
    for n, M in NM:
        region = build_fold_region(n, M)
        for logR in RADII:
            for c in CONSTANTS:
                for k in range(n):
                    y = np.full(x.size, 2.0 * k + 1.0)
                    if not np.all(on_slit(region, x, y)):
                        continue
                    slits += 1
                    s, t = logR + x * PI / n, wrap_angle(y * PI / n)
                    a = g_annulus_arrays(s, t, region, logR, c, side="below")
                    b = g_annulus_arrays(s, t, region, logR, c, side="above")
                    r = log_residual(*a, *b)
                    r = np.where(np.isneginf(a[0]) & np.isneginf(b[0]), 0.0, r)
                    worst = max(worst, r.max())
    ok = worst < 1e-8 and slits > 0
    _finish(acceptance_log, 2, "slit continuity", ok,
            f"{slits} slits, max residual {worst:.2e} < 1e-8", time.perf_counter() - t0, 10)


def test_criterion_3_branched_points(acceptance_log):
    t0 = time.perf_counter()
    problems = []
    checked = 0
    for n, M in [(2, 6), (2, 5)]:
        region = build_fold_region(n, M)
        bd = branched_data(n, M)

        def g(s, t, region=region):
            return g_extended_arrays(s, t, region, 0.0)

        if len(bd.branched_points) != M - n:
            problems.append(f"({n},{M}) count {len(bd.branched_points)} != {M - n}")
        plus, minus = bd.branched_values
        # +-c r^n with c = 1, r = 1
        if not (plus.close_to(LogPoint(0.0, 0.0), 1e-8) and minus.close_to(LogPoint(0.0, PI), 1e-8)):
            problems.append(f"({n},{M}) branched values {plus}, {minus}")
        for b in bd.branched_points:
            target = plus if b.sign > 0 else minus
            v = g(np.array([b.point.log_mod]), np.array([b.point.arg]))
            if log_residual(*v, target.log_mod, target.arg)[0] >= 1e-8:
                problems.append(f"({n},{M}) value at {b.point}")
            w = winding_number(g, b.point, b.point.log_mod + math.log(1e-4), about=target)
            checked += 1
            if w != 2:
                problems.append(f"({n},{M}) winding {w} at {b.point}")
        for z in bd.zeros:
            w = winding_number(g, z.point, z.point.log_mod + math.log(1e-4))
            checked += 1
            if w != 1:
                problems.append(f"({n},{M}) zero winding {w} at {z.point}")
        w = winding_number(g, LogPoint(-math.inf, 0.0), 0.0)
        checked += 1
        if w != n:
            problems.append(f"({n},{M}) origin winding {w}")
    detail = f"{checked} windings certified" if not problems else "; ".join(problems[:3])
    _finish(acceptance_log, 3, "branched-point certification", not problems, detail,
            time.perf_counter() - t0, 30)


def test_criterion_4_global_assembly(acceptance_log, standard):
    t0 = time.perf_counter()
    gm = GlobalMap(standard)
    p = standard
    theta = wrap_angle(2 * PI * (np.arange(1000) + 0.5) / 1000 - PI)
    worst, circles = 0.0, 0
    for j in range(1, p.n_interp + 1):
        lr = p.radius_log(j)
        for s0, jp in ((lr, j), (lr + PI / p.M[j - 1], j + 1)):
            s = np.full(theta.size, s0)
            power = gm._power(jp, s, theta)
            interp = g_annulus_arrays(s, theta, gm.regions[j - 1], lr, p.log_c[j - 1])
            worst = max(worst, log_residual(*power, *interp).max())
            circles += 1
    windings = []
    for j in range(1, p.J + 1):
        lo = p.radius_log(j - 1) + PI / p.degree(j - 1) if j > 1 else p.radius_log(1) - PI
        windings.append(winding_number(gm, LogPoint(-math.inf, 0.0), 0.5 * (lo + p.radius_log(j))))
    ok = worst < 1e-9 and windings == list(p.M)
    _finish(acceptance_log, 4, "global assembly", ok,
            f"{circles} circles, max residual {worst:.2e} < 1e-9; windings {windings} vs {list(p.M)}",
            time.perf_counter() - t0, 60)


def test_criterion_5_dilatation_localization(acceptance_log, standard):
    t0 = time.perf_counter()
    gm = GlobalMap(standard)
    _, _, amu, valid, kind, _ = mu_grid(gm, 200, 200)
    stray = int(np.sum(valid & (amu > 1e-3) & (kind != int(RegionKind.INTERP))))
    rep = dilatation_report(gm, 400, 0)
    ks = [a.max_K for a in rep.annuli if a.kind == "interp"]     # all of degree ratio 2
    spread = max(ks) - min(ks)
    k_sigma = beltrami_estimate(complex_map(sigma), LogPoint.from_complex(2j)).K_local
    ok = (stray == 0 and math.isfinite(rep.K_hat) and spread < 1e-4
          and abs(k_sigma - 3.0) < 1e-3)
    detail = (f"stray samples {stray}, K_hat {rep.K_hat:.6f}, spread {spread:.1e} < 1e-4, "
              f"sigma K {k_sigma:.9f}")
    _finish(acceptance_log, 5, "dilatation localization", ok, detail, time.perf_counter() - t0, 60)


def test_criterion_6_integral_bound(acceptance_log, standard):
    K_hat = dilatation_report(standard, 400, 0).K_hat
    t0 = time.perf_counter()
    b = integral_bound(standard, K_hat)
    closed = (K_hat - 1) / 2 * math.fsum(math.expm1(2 * PI / 2 ** j) for j in range(1, 5))
    err = max(abs(b.closed_form - closed), abs(b.area_form - closed),
              abs(b.partial_sums[-1] - closed))
    lin = integral_bound([j + 1 for j in range(1, 9)], K_hat, GrowthRule("linear", 2, step=1))
    ok = (err < 1e-10 and b.verdict == "convergent" and b.tail_bound is not None
          and math.isfinite(b.tail_bound) and lin.verdict == "divergent")
    detail = (f"closed-form error {err:.1e} < 1e-10, geometric verdict {b.verdict} "
              f"(tail <= {b.tail_bound:.4f}), linear verdict {lin.verdict}")
    _finish(acceptance_log, 6, "integral bound", ok, detail, time.perf_counter() - t0, 1)


def test_criterion_7_wandering_inclusion(acceptance_log, standard):
    t0 = time.perf_counter()
    rep = verify_wandering(standard, 1.1, [1, 2, 3], 1000, mode="shrink", seed=0)
    ladder = max(r for _, r in circle_ladder(standard, 1000))
    ok = all(r.holds for r in rep.inclusions) and ladder < 1e-9
    parts = [f"j={r.j}: {r.failures}/{r.samples} outside, margin {r.margin:.4f}"
             for r in rep.inclusions]
    detail = "; ".join(parts) + f"; ladder residual {ladder:.1e} < 1e-9"
    _finish(acceptance_log, 7, "wandering inclusion", ok, detail, time.perf_counter() - t0, 60)


def test_criterion_8_truncated_agreement(acceptance_log, standard):
    t0 = time.perf_counter()
    gm = GlobalMap(standard)
    rng = np.random.default_rng(8)
    compared, mismatched = 0, 0
    for n_cut in (1, 2):
        lo = standard.radius_log(n_cut)
        while True:
            s = lo + (standard.domain_end - lo) * rng.random()
            z0 = LogPoint(s, float(wrap_angle(PI * (2 * rng.random() - 1))))
            cmp = truncated_orbit_compare(z0, gm, n_cut, 20)
            if cmp.first_dip is not None:
                continue        # orbit re-enters |z| < r_n; not covered by the criterion
            compared += 1
            if not cmp.identical or cmp.trace_h.to_csv() != cmp.trace_hn.to_csv():
                mismatched += 1
            if compared == 100 * n_cut:
                break
    _finish(acceptance_log, 8, "truncated-family agreement", mismatched == 0,
            f"{compared} orbits (n = 1, 2), {mismatched} differing traces",
            time.perf_counter() - t0, 10)


def _cli(args, workers, cwd):
    env = dict(os.environ, POWERINTERP_WORKERS=str(workers))
    proc = subprocess.run([sys.executable, "-m", "powerinterp.cli", *args], capture_output=True,
                          env=env, cwd=cwd)
    return proc.returncode, proc.stdout


def test_criterion_9_determinism(acceptance_log, configs, tmp_path):
    t0 = time.perf_counter()
    verify = ["verify", "--config", str(configs / "standard.cfg"), "--suite", "all"]
    outs = [_cli(verify, w, tmp_path) for w in (1, 1, 8)]
    verify_ok = outs[0] == outs[1] == outs[2] and outs[0][0] == 0
    images = []
    for k, w in enumerate((1, 1, 8)):
        path = tmp_path / f"regions{k}.ppm"
        code, _ = _cli(["render", "--config", str(configs / "standard.cfg"), "--spec",
                        str(configs / "standard_regions.render"), "--output", str(path)], w, tmp_path)
        images.append((code, path.read_bytes() if path.exists() else b""))
    render_ok = images[0] == images[1] == images[2] and images[0][0] == 0 and images[0][1]
    ok = bool(verify_ok and render_ok)
    detail = (f"verify output identical: {verify_ok}; render bytes identical: {bool(render_ok)} "
              f"(two runs, 1 vs 8 workers)")
    _finish(acceptance_log, 9, "determinism", ok, detail, time.perf_counter() - t0)
