"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run directly (``python3 tests/test_acceptance.py``) or through pytest, where the
lines are also repeated in the terminal summary.
"""
import json
import math
import time

import numpy as np
import pytest

from trirev import cli, harness
from trirev import continuous as c
from trirev import discrete as d
from trirev import gen
from trirev.functionals import (Functional, FunctionalFamily, SearchConfig, family_cap,
                                family_constant, gram_eigen, op_norm, sphere_search)
from trirev.rng import stream
from trirev.spaces import INF, cmod, lp, norm
from trirev.transformers import ball_equality_witness

LINES = []


def _report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_cmod_operator_norms():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst_closed, worst_search = 0.0, 0.0
    for _ in range(5):
        a = complex(*rng.standard_normal(2))
        cases = [(1.0, abs(a)), (INF, math.sqrt(2) * abs(a))]
        cases += [(2 * p, 2 ** (0.5 - 1 / (2 * p)) * abs(a)) for p in (1.0, 1.5, 2.0, 3.0)]
        for s, want in cases:
            F = Functional(cmod(s), [a])
            got = op_norm(F).value
            worst_closed = max(worst_closed, abs(got - want) / want)
            est = sphere_search(FunctionalFamily.of(F), 1.0, SearchConfig(starts=8, iters=200))
            worst_search = max(worst_search, abs(est.value - want) / want)
    dt = time.perf_counter() - t0
    _report(1, worst_closed <= 1e-12 and worst_search <= 1e-6 and dt < 1.0,
            f"closed-form rel err {worst_closed:.1e}, sphere_search rel err {worst_search:.1e}, {dt:.2f}s")


def test_criterion_2_family_constants():
    t0 = time.perf_counter()
    worst, cap_bad, range_bad = 0.0, 0, 0
    search = SearchConfig(seeded_starts=False)
    for k in range(50):
        rng = stream(2, "acceptance-c2", k)
        dim, m = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        sp = lp(2, dim, "real" if k % 2 else "complex")
        fam = gen.random_family(sp, rng, m)
        g = gram_eigen(fam).value
        s = sphere_search(fam, 2.0, search).value
        worst = max(worst, abs(g - s) / g)
        if not 1 - 1e-9 <= g * g <= m + 1e-9:
            range_bad += 1
        for p in (1.0, 3.0, INF):
            v = family_constant(fam, p).value
            cap = family_cap(fam, p) if p is not INF else max(op_norm(F).value for F in fam)
            cap_bad += v > cap + 1e-9
        raw = gen.random_family(lp(3, dim, "complex"), rng, m, unit=False)
        for p in (2.0, INF):
            cap_bad += family_constant(raw, p).value > family_cap(raw, p) + 1e-9
    dt = time.perf_counter() - t0
    _report(2, worst <= 1e-6 and cap_bad == 0 and range_bad == 0 and dt < 30,
            f"gram vs sphere rel {worst:.1e} over 50 families, cap breaches {cap_bad}, "
            f"1<=c<=m breaches {range_bad}, {dt:.1f}s")


def test_criterion_3_bound_suites():
    t0 = time.perf_counter()
    rep = harness.run_suite(harness.SuiteConfig(suites=("discrete",), trials=200, seed=42))
    dt = time.perf_counter() - t0
    recs = {r["theorem_id"]: r for r in rep["records"]}
    want = {"DM_SINGLE", "DM_FAMILY", "MULT_SUMFUNC", "MULT_CINF", "MULT_CP[p=1]", "MULT_CP[p=2]",
            "MULT_CP[p=3]", "ADD_SINGLE", "ADD_FAMILY", "ADD_CINF", "ADD_CP[p=1]", "ADD_CP[p=2]",
            "ADD_CP[p=3]"}
    missing = want - set(recs)
    short = [k for k in want & set(recs) if recs[k]["trials"] < 200]
    viol = sum(len(r["violations"]) for r in rep["records"])
    errs = sum(len(r["errors"]) for r in rep["records"])
    _report(3, not missing and not short and viol == 0 and errs == 0 and dt < 60,
            f"{len(want)} theorem records x 200 trials, {viol} violations, {errs} errors, {dt:.1f}s")


def test_criterion_4_equality_constructors():
    gaps, bad = [], []
    sp3 = lp(2, 3, "complex")
    one = FunctionalFamily.from_vectors(sp3, [[1, 0, 0]])
    two = FunctionalFamily.from_vectors(sp3, [[1, 0, 0], [0.6, 0.8j, 0]])
    for tid, fam, p in [("DM_SINGLE", one, None), ("MULT_SUMFUNC", two, None), ("ADD_SINGLE", one, None),
                        ("ADD_FAMILY", two, None), ("MULT_CP", two, 2.0), ("MULT_CP", two, 3.0)]:
        inst = d.equality_instance(tid, {"family": fam, "rho": 0.7, "n": 3, "p": p})
        res = d.check(tid, inst, p=p)
        gaps.append(abs(res.lhs - res.rhs))
        if not (res.equality.holds and res.hypothesis_ok):
            bad.append(tid)
    for tid in ("CONT_MULT_FAMILY", "CONT_ADD_SINGLE", "CONT_ADD_FAMILY"):
        fam = one if tid.endswith("SINGLE") else two
        inst = c.cont_equality_instance(tid, {"family": fam, "rho": 0.7, "n": 3})
        res = c.cont_check(tid, inst)
        gaps.append(abs(res.lhs - res.rhs))
        if not (res.equality.holds and res.hypothesis_ok):
            bad.append(tid)
    sp = lp(2, 2)
    A = FunctionalFamily.from_vectors(sp, [[1, 0]])
    r1 = d.dm_single(d.DiscreteInstance(sp, [[0.6, 0.8], [0.6, -0.8]], A, d.Margin([0.6])))
    E = FunctionalFamily.from_vectors(sp, [[1, 0], [0, 1]])
    r2 = d.mult_sumfunc(d.DiscreteInstance(sp, [[1, 1]], E, d.Margin([2 ** -0.5] * 2)))
    t = math.pi / 3
    r3 = c.cont_add_single(c.circular(sp, -t, t), A[0], c.SlackFunction.of_time(lambda ts: 1 - np.cos(ts)))
    w3 = 2 * math.pi / 3 - math.sqrt(3)
    worked = (abs(r1.lhs - 1.2) <= 1e-8 and abs(r1.rhs - 1.2) <= 1e-8 and
              abs(r2.lhs - math.sqrt(2)) <= 1e-8 and abs(r2.rhs - math.sqrt(2)) <= 1e-8 and
              abs(r3.lhs - w3) <= 1e-8 and abs(r3.rhs - w3) <= 1e-8 and
              r1.equality.holds and r2.equality.holds and r3.equality.holds)
    g = max(gaps)
    _report(4, g <= 1e-8 and not bad and worked,
            f"{len(gaps)} constructed instances, max |lhs-rhs| {g:.1e}, failing {bad or 'none'}, "
            f"worked examples {'ok' if worked else 'off'}")


def test_criterion_5_continuous_suites():
    t0 = time.perf_counter()
    rep = harness.run_suite(harness.SuiteConfig(suites=("continuous",), trials=200, seed=42))
    dt = time.perf_counter() - t0
    viol = sum(len(r["violations"]) for r in rep["records"])
    errs = sum(len(r["errors"]) for r in rep["records"])
    f = c.complex_phase(cmod(2), -math.pi / 3, math.pi / 3)
    k = c.cont_mult_single(f, Functional(cmod(2), [1]), 0.5)
    kar = abs(k.lhs - math.pi / 3) <= 1e-9 and abs(k.rhs - math.sqrt(3)) <= 1e-9
    ref = {r["theorem_id"]: r for r in rep["records"]}["QUADRATURE_REFINEMENT"]
    # numeric records store (value − limit) with limit 1e-9
    _report(5, viol == 0 and errs == 0 and kar and not ref["violations"] and dt < 60,
            f"{len(rep['records'])} records, {viol} violations, {errs} errors, Karamata "
            f"lhs-pi/3 {k.lhs - math.pi / 3:.1e} rhs-sqrt3 {k.rhs - math.sqrt(3):.1e}, "
            f"refinement max change {ref['max_violation'] + 1e-9:.1e}, {dt:.1f}s")


def test_criterion_6_transformer_soundness():
    rec = harness.transformer_soundness(seed=42, configs=20, points=10_000)
    x = ball_equality_witness(lp(2, 2), [1.0, 0.0], 0.6)
    sp = lp(2, 2)
    c1 = abs(norm(sp, x - np.array([1.0, 0.0])) - 0.6)
    c2 = abs(norm(sp, x) ** 2 + 0.36 - 1.0)
    point = np.allclose(np.abs(x), [0.64, 0.48], atol=1e-12)
    _report(6, not rec.violations and not rec.errors and c1 <= 1e-12 and c2 <= 1e-12 and point,
            f"20 configs x 1e4 points, {len(rec.violations)} violations; witness {np.round(x.real, 12).tolist()} "
            f"conditions off by {c1:.1e}, {c2:.1e}")


def test_criterion_7_discrete_continuous_consistency():
    worst, count = 0.0, 0
    pairs = [("DM_SINGLE", "CONT_MULT_SINGLE"), ("MULT_SUMFUNC", "CONT_MULT_FAMILY"),
             ("MULT_CP", "CONT_MULT_CP"), ("ADD_SINGLE", "CONT_ADD_SINGLE"), ("ADD_FAMILY", "CONT_ADD_FAMILY")]
    for k in range(50):
        rng = stream(7, "acceptance-dc", k)
        dim = int(rng.integers(2, 6))
        sp = lp([2.0, 3.0, 1.5][k % 3], dim, "real" if k % 2 else "complex")
        dtid, ctid = pairs[k % len(pairs)]
        m = 1 if dtid.endswith("SINGLE") else int(rng.integers(2, 4))
        cfg = gen.GenConfig(seed=k, n=int(rng.integers(1, 6)), space=sp)
        if dtid.startswith("ADD"):
            fam = gen.random_family(sp, rng, m)
            inst = gen.gen_slack(cfg, fam)
            h = c.SlackFunction.piecewise_constant(inst.hypothesis.M)
        else:
            # margin theorems need members sharing a cone; redraw until they do
            for _ in range(100):
                fam = gen.random_family(sp, rng, m)
                try:
                    r = gen.feasible_margins(fam, rng)
                    break
                except d.ConstructionFailure:
                    continue
            inst = gen.gen_margin(cfg, fam, r)
            h = inst.hypothesis
        p = 2.0 if dtid == "MULT_CP" else None
        a = d.check(dtid, inst, p=p)
        b = c.cont_check(ctid, c.ContinuousInstance(c.piecewise_constant(sp, inst.vectors), fam, h), p=p)
        # additive lhs is a difference of totals; measure it against the total it cancels
        scale = float(d.norms(sp, inst.vectors).sum())
        for u, v in ((a.lhs, b.lhs), (a.rhs, b.rhs)):
            worst = max(worst, abs(u - v) / max(abs(u), abs(v), scale))
        count += 1
    _report(7, worst <= 1e-12 and count == 50,
            f"{count} random instances over 5 theorem pairs, max relative difference {worst:.1e}")


def test_criterion_8_sharpness(monkeypatch):
    out = []
    for tid in ("MULT_SUMFUNC", "DM_SINGLE"):
        res = gen.sharpness_search(tid, budget=10_000, seed=42)
        out.append((tid, res.best_ratio, res.bound, res.exceeded))
    ok = all(b - r <= 1e-3 and not ex for _, r, b, ex in out)
    # an exceedance must serialize the witness and fail the run
    real = gen.sharpness_search

    def inflated(*a, **kw):
        res = real(*a, **kw)
        res.best_ratio = res.bound * 1.01
        return res

    monkeypatch.setattr(gen, "sharpness_search", inflated)
    rec = harness._sharp_record(harness.SuiteConfig(sharpness_budget=100), d.TheoremId.DM_SINGLE)
    monkeypatch.undo()
    flagged = bool(rec.violations) and "witness" in rec.violations[0]
    reloaded = flagged and d.instance_from_json(rec.violations[0]["witness"]).n >= 1
    _report(8, ok and flagged and reloaded,
            "; ".join(f"{t} best {r:.6f} / bound {b:g}" for t, r, b, _ in out)
            + f"; forced exceedance {'serialized' if reloaded else 'NOT serialized'}")


def test_criterion_9_determinism(tmp_path):
    paths = []
    for jobs in (1, 4):
        p = tmp_path / f"r{jobs}.json"
        code = cli.main(["verify", "--suite", "all", "--seed", "42", "--trials", "200",
                         "--jobs", str(jobs), "--out", str(p)])
        assert code == 0, f"verify exited {code} with jobs={jobs}"
        paths.append(p)
    a, b = (json.loads(p.read_text()) for p in paths)
    same = harness.dumps(harness.strip_envelope(a)) == harness.dumps(harness.strip_envelope(b))
    _report(9, same and a["summary"]["passed"],
            f"jobs=1 vs jobs=4 reports {'identical' if same else 'DIFFER'} outside the envelope, "
            f"{a['summary']['records']} records, passed={a['summary']['passed']}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
