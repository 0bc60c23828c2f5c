"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line
(visible with ``pytest -s`` or in the terminal summary) before asserting."""
import json
import subprocess
import sys
import time

import mpmath as mp
import numpy as np
import pytest

import oracles
from qlauricella import qcore, suites
from qlauricella.descriptor import bundled, parse_descriptor, serialize
from qlauricella.paramderiv import eval_derivative_closed, expand_derivative
from qlauricella.series import Block, ParamRef, SeriesSpec, evaluate

QS = (0.2, 0.5, 0.8)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail

    return emit


def _rel(a, b):
    return abs(a - b) / abs(b) if b else abs(a)


def test_split_identity(report):
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(1000):
        k = int(rng.integers(1, 6))
        theta = rng.uniform(0, 3, k)
        m = rng.integers(0, 11, k)
        q = float(rng.choice(QS))
        total = sum(c.weight * c.bracket for c in qcore.split_q_bracket(theta, m, q))
        target = oracles.bracket(mp.fsum(mp.mpf(float(t)) * int(v) for t, v in zip(theta, m)), q)
        worst = max(worst, float(_rel(total, target)) if target else abs(total))
    report(1, worst <= 1e-12, f"split recombination, 1000 draws, max rel err {worst:.2e}")


def test_pochhammer_extensions(report):
    rng = np.random.default_rng(2)
    worst = {"telescoping": 0.0, "negative dual": 0.0, "real vs integer": 0.0}
    for _ in range(1000):
        q = float(rng.choice(QS))
        a = float(rng.uniform(-3, 3))
        n = int(rng.integers(0, 30))
        lhs = qcore.q_pochhammer(a, q, n + 1)
        rhs = qcore.q_pochhammer(a, q, n) * (1 - a * q**n)
        worst["telescoping"] = max(worst["telescoping"], _rel(lhs, rhs))

        b = float(rng.choice([-1, 1]) * rng.uniform(0.05, 3))
        k = int(rng.integers(1, 10))
        neg = qcore.q_pochhammer(b, q, -k)
        worst["negative dual"] = max(worst["negative dual"], _rel(neg, qcore.poch_negative_dual(b, q, k)))

        c = float(rng.uniform(-0.95, 0.95))
        worst["real vs integer"] = max(worst["real vs integer"],
                                       _rel(qcore.poch_real(c, q, float(n)), qcore.poch_finite(c, q, n)))
    ok = all(v <= 1e-10 for v in worst.values())
    report(2, ok, "1000 draws, max rel err " + ", ".join(f"{k} {v:.2e}" for k, v in worst.items()))


def test_known_identities(report):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        q = float(rng.choice(QS))
        x = float(rng.uniform(-0.5, 0.5))
        a = float(rng.uniform(-0.9, 0.9))
        with mp.workdps(30):
            e = 1 / oracles.poch_inf(x, q)
            binom = oracles.poch_inf(mp.mpf(a) * x, q) / oracles.poch_inf(x, q)
        worst = max(worst, _rel(evaluate(SeriesSpec(q, 1), [x]).value, float(e)))
        spec = SeriesSpec(q, 1, upper_single=[[(a, 1)]])
        worst = max(worst, _rel(evaluate(spec, [x]).value, float(binom)))
    report(3, worst <= 1e-12, f"q-exponential and q-binomial, 100 draws, max rel err {worst:.2e}")


def test_main_theorems(report):
    started = time.perf_counter()
    rep = suites.run_suite("theorems", tol=1e-8)
    elapsed = time.perf_counter() - started
    s = rep["summary"]
    worst = max(c["values"].get("rel_diff", float("inf")) for c in rep["cases"])
    ok = s["total"] >= 500 and s["failed"] == 0 and elapsed < 120
    report(4, ok, f"{s['passed']}/{s['total']} cases at 1e-8, max rel diff {worst:.2e}, {elapsed:.1f} s")


def test_h3_fixtures(report):
    rep = suites.run_suite("h3", tol=1e-8)
    s = rep["summary"]
    shift = next(c for c in rep["cases"] if c["id"] == "h3/b-shift-reading")["values"]
    detail = (f"{s['passed']}/{s['total']} grid and regression cases; b formula without shift rel err "
              f"{shift['rel_err_unshifted']:.1e}, with q-shift {shift['rel_err_q_shifted']:.1e}")
    report(5, s["failed"] == 0 and s["total"] == 82, detail)


def test_structure_exact(report):
    rng = np.random.default_rng(6)
    problems = []
    for _ in range(100):
        spec = suites.random_spec(rng)
        for ref in spec.params():
            row = spec.exponent_row(ref)
            active = sum(e > 0 for e in row)
            terms = expand_derivative(spec, ref)
            want = (1 if active else 0) if ref.block.is_single else active * active
            if len(terms) != want:
                problems.append(f"{ref}: {len(terms)} terms, want {want}")
            sign = -1 if ref.block.is_upper else 1
            subs = () if ref.block.is_upper else ((ref, spec.q),)
            for t in terms:
                if t.sign != sign or t.param_substitutions != subs:
                    problems.append(f"{ref}: sign law broken")
                if t.prefactor != sign / (active * (1 - spec.value_of(ref))):
                    problems.append(f"{ref}: prefactor")

    # a multi-index parameter with exponent row phi * e_i behaves as a single-index one
    for upper in (True, False):
        for phi in (0.5, 1.0, 2.0):
            for var in (0, 1, 2):
                row = tuple(phi if i == var else 0.0 for i in range(3))
                singles = [[(0.4, phi)] if i == var else [] for i in range(3)]
                if upper:
                    m, s = SeriesSpec(0.5, 3, upper_multi=[(0.4, row)]), SeriesSpec(0.5, 3, upper_single=singles)
                    rm, rs = ParamRef(Block.UPPER_MULTI, 0), ParamRef(Block.UPPER_SINGLE, 0, var)
                else:
                    m, s = SeriesSpec(0.5, 3, lower_multi=[(0.4, row)]), SeriesSpec(0.5, 3, lower_single=singles)
                    rm, rs = ParamRef(Block.LOWER_MULTI, 0), ParamRef(Block.LOWER_SINGLE, 0, var)
                (tm,), (ts,) = expand_derivative(m, rm), expand_derivative(s, rs)
                if (tm.sign, tm.divisor, tm.count, tm.target_var, tm.bracket_exponents, tm.prefix_shift_vars) != (
                        ts.sign, ts.divisor, ts.count, ts.target_var, ts.bracket_exponents, ts.prefix_shift_vars):
                    problems.append(f"specialisation terms differ for {rm}")
                x = (0.11, -0.07, 0.13)
                if eval_derivative_closed(m, x, rm) != eval_derivative_closed(s, x, rs):
                    problems.append(f"specialisation value differs for {rm} phi={phi}")
    report(6, not problems, "term counts, sign law and single/multi specialisation"
           + (": " + "; ".join(problems[:3]) if problems else ", no mismatches"))


def _small_spec(rng, n):
    exps = [0.0, 0.5, 1.0, 2.0]

    def v(scale):
        return float(rng.uniform(-scale, scale))

    return SeriesSpec(
        float(rng.choice(QS)), n,
        [(v(0.9), tuple(rng.choice(exps, n).tolist())) for _ in range(int(rng.integers(0, 3)))],
        [(v(0.5), tuple(rng.choice(exps, n).tolist())) for _ in range(int(rng.integers(0, 3)))],
        [[(v(0.9), float(rng.choice(exps))) for _ in range(int(rng.integers(0, 3)))] for _ in range(n)],
        [[(v(0.5), float(rng.choice(exps))) for _ in range(int(rng.integers(0, 3)))] for _ in range(n)],
    )


def test_brute_force(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 3))
        spec = _small_spec(rng, n)
        x = rng.uniform(-0.05, 0.05, n).tolist()
        worst = max(worst, float(_rel(evaluate(spec, x).value, oracles.naive_sum(spec, x, 12))))
    report(7, worst <= 1e-12, f"shell sum vs nested loops, 50 specs, cap 12, max rel err {worst:.2e}")


def test_cli(report):
    doc = bundled("h3")
    problems = []
    if parse_descriptor(serialize(doc)) != doc:
        problems.append("round trip")
    if suites.report_body(suites.run_deriv(doc)) != suites.report_body(suites.run_deriv(doc)):
        problems.append("deriv report not deterministic")
    codes = {}
    for name in ("h3", "identities"):
        args = [sys.executable, "-m", "qlauricella", "suite", name, "--format", "json"]
        runs = [subprocess.run(args, capture_output=True, text=True) for _ in range(2)]
        codes[name] = runs[0].returncode
        bodies = [suites.report_body(json.loads(r.stdout)) for r in runs]
        if bodies[0] != bodies[1]:
            problems.append(f"suite {name} output differs between runs")
    if any(codes.values()):
        problems.append(f"exit codes {codes}")
    report(8, not problems, f"round trip, determinism, suite exit codes {codes}"
           + (": " + "; ".join(problems) if problems else ""))
