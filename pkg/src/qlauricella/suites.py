"""Batch runners behind the command line: evaluation, derivatives and the
built-in verification suites. Every runner returns a plain ``dict`` report
whose body (everything except ``wall_time_s``) is deterministic."""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import replace

import mpmath
import numpy as np

from . import horn, paramderiv, qcore, series
from .descriptor import SCHEMA_ID, DescriptorDocument, to_dict
from .errors import QLauricellaError, UnknownSuite
from .series import EvalConfig, ParamRef, SeriesSpec

DEFAULT_SEED = 20180501
H3_POINT = horn.H3Params(a=0.3, b=0.2, c=0.7, q=0.5)


def _plain(v):
    if isinstance(v, mpmath.mpf):
        return mpmath.nstr(v, mpmath.mp.dps if mpmath.mp.dps > 17 else 40, strip_zeros=False)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def digest(obj) -> str:
    text = json.dumps(obj, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _case(case_id, operation, inputs, values, passed, diagnostics=()):
    return {
        "id": case_id,
        "operation": operation,
        "inputs_digest": digest(inputs),
        "values": {k: _plain(v) for k, v in values.items()},
        "diagnostics": list(diagnostics),
        "passed": bool(passed),
    }


def _report(kind, cases, started, **extra):
    cases = sorted(cases, key=lambda c: c["id"])
    failed = sum(not c["passed"] for c in cases)
    return {
        "schema": SCHEMA_ID,
        "kind": kind,
        **extra,
        "cases": cases,
        "summary": {"total": len(cases), "passed": len(cases) - failed, "failed": failed},
        "wall_time_s": round(time.perf_counter() - started, 3),
    }


def _point_id(x) -> str:
    return "(" + ",".join(f"{v:.6g}" for v in x) + ")"


# -- descriptor driven -------------------------------------------------------


def run_eval(doc: DescriptorDocument) -> dict:
    started = time.perf_counter()
    spec_inputs = to_dict(doc)["series"]
    cases = []
    diags = [f"{d.kind}: {d.message}" for d in series.validate(doc.spec, doc.config)]
    for i, x in enumerate(doc.points):
        cid = f"eval/{i:04d}"
        inputs = {"series": spec_inputs, "x": list(x)}
        if diags:
            cases.append(_case(cid, "eval", inputs, {}, False, diags))
            continue
        try:
            res = series.evaluate(doc.spec, x, doc.config)
        except QLauricellaError as exc:
            cases.append(_case(cid, "eval", inputs, {}, False, [f"{type(exc).__name__}: {exc}"]))
            continue
        notes = ["hit n_max_per_index"] if res.truncated_flag else []
        cases.append(_case(cid, "eval", inputs, {
            "x": list(x),
            "value": res.value,
            "shells_used": res.shells_used,
            "last_shell_magnitude": res.last_shell_magnitude,
            "truncated": res.truncated_flag,
        }, not res.truncated_flag, notes))
    return _report("eval", cases, started)


def _refs(doc: DescriptorDocument) -> tuple[ParamRef, ...]:
    return doc.params or tuple(doc.spec.params())


def run_deriv(doc: DescriptorDocument, tol: float = 1e-9) -> dict:
    """Closed-form and definitional q-derivative for every (point, parameter)."""
    started = time.perf_counter()
    spec_inputs = to_dict(doc)["series"]
    cases = []
    for i, x in enumerate(doc.points):
        for ref in _refs(doc):
            rep = paramderiv.verify(doc.spec, x, ref, doc.config, tol)
            cases.append(_case(
                f"deriv/{i:04d}/{ref}", "deriv",
                {"series": spec_inputs, "x": list(x), "param": str(ref)},
                {
                    "x": list(x),
                    "param": str(ref),
                    "definitional": rep.lhs,
                    "closed": rep.rhs,
                    "abs_diff": rep.abs_diff,
                    "rel_diff": rep.rel_diff,
                },
                rep.passed, rep.diagnostics,
            ))
    return _report("deriv", cases, started, tolerance=tol)


# -- built-in suites ---------------------------------------------------------


def _rel(a, b, tol):
    err = abs(a - b)
    return err if abs(b) < tol else err / abs(b)


def _family(cid, draws, tol, op="identity"):
    worst = 0.0
    for lhs, rhs in draws:
        worst = max(worst, float(_rel(lhs, rhs, tol)))
    return _case(f"identities/{cid}", op, {"family": cid, "draws": len(draws)},
                 {"draws": len(draws), "max_rel_err": worst}, worst <= tol)


def identity_draws(seed: int = DEFAULT_SEED, draws: int = 200) -> dict[str, list[tuple[float, float]]]:
    """Pairs (computed, reference) for each qcore invariant family."""
    rng = np.random.default_rng(seed)
    qs = (0.2, 0.5, 0.8)
    fam: dict[str, list] = {k: [] for k in (
        "split_recombination", "bracket_additivity", "poch_telescoping", "poch_negative_dual",
        "poch_negative_inverse", "poch_real_vs_integer", "q_exponential", "q_binomial",
        "jackson_quotient_rule", "jackson_q_exponential",
    )}
    for _ in range(draws):
        q = float(rng.choice(qs))
        size = int(rng.integers(1, 6))
        theta = rng.uniform(0, 3, size).tolist()
        m = rng.integers(0, 11, size).tolist()
        total = sum(c.weight * c.bracket for c in qcore.split_q_bracket(theta, m, q))
        fam["split_recombination"].append((total, qcore.q_bracket(float(np.dot(theta, m)), q)))

        a_, b_ = rng.uniform(-5, 5, 2)
        fam["bracket_additivity"].append(
            (qcore.q_bracket(a_ + b_, q), qcore.q_bracket(a_, q) + q**a_ * qcore.q_bracket(b_, q)))

        a = float(rng.uniform(-2, 2))
        n = int(rng.integers(0, 30))
        fam["poch_telescoping"].append(
            (qcore.q_pochhammer(a, q, n + 1), qcore.q_pochhammer(a, q, n) * (1 - a * q**n)))

        k = int(rng.integers(1, 12))
        a = float(rng.choice([-1, 1]) * rng.uniform(0.05, 2))
        fam["poch_negative_dual"].append((qcore.poch_negative(a, q, k), qcore.poch_negative_dual(a, q, k)))
        fam["poch_negative_inverse"].append(
            (qcore.q_pochhammer(a, q, -k) * qcore.q_pochhammer(a * q**-k, q, k), 1.0))

        n = int(rng.integers(0, 21))
        a = float(rng.uniform(-0.95, 0.95))
        fam["poch_real_vs_integer"].append((qcore.poch_real(a, q, float(n)), qcore.poch_finite(a, q, n)))

        x = float(rng.uniform(-0.5, 0.5))
        a = float(rng.uniform(-0.95, 0.95))
        e = series.evaluate(SeriesSpec(q, 1), [x]).value
        fam["q_exponential"].append((e, 1 / qcore.poch_infinite(x, q)))
        b = series.evaluate(SeriesSpec(q, 1, upper_single=[[(a, 1)]]), [x]).value
        fam["q_binomial"].append((b, qcore.poch_infinite(a * x, q) / qcore.poch_infinite(x, q)))

        f_c = rng.uniform(-1, 1, 4)
        g_c = rng.uniform(0.5, 1, 3)
        f = np.polynomial.Polynomial(f_c)
        g = np.polynomial.Polynomial(np.concatenate([[2.0], g_c * 0.3]))
        t = float(rng.uniform(0.1, 1.5))
        lhs = qcore.jackson_derivative(lambda s: f(s) / g(s), t, q)
        dfq = qcore.jackson_derivative(f, t, q)
        dgq = qcore.jackson_derivative(g, t, q)
        fam["jackson_quotient_rule"].append((lhs, (g(t) * dfq - f(t) * dgq) / (g(q * t) * g(t))))

        x = float(rng.uniform(0.05, 0.5))
        eq = lambda s: 1 / qcore.poch_infinite(s, q)  # noqa: E731
        fam["jackson_q_exponential"].append((qcore.jackson_derivative(eq, x, q), eq(x) / (1 - q)))
    return fam


def suite_identities(tol: float, seed: int) -> list[dict]:
    return [_family(name, draws, tol) for name, draws in identity_draws(seed).items()]


def h3_grid() -> list[tuple[float, tuple[float, float]]]:
    """27 (q, (z1, z2)) points strictly inside (0.2, 0.8) x (-0.15, 0.15)^2."""
    qs = (0.3, 0.5, 0.7)
    zs = (-0.1, 0.05, 0.12)
    return [(q, (z1, z2)) for q in qs for z1 in zs for z2 in zs]


_H3_REFS = {
    "a": ParamRef("upper_multi", 0),
    "b": ParamRef("upper_single", 0, 1),
    "c": ParamRef("lower_multi", 0),
}
_H3_FORMULAS = {"a": horn.h3_deriv_a, "b": horn.h3_deriv_b, "c": horn.h3_deriv_c}


def suite_h3(tol: float, cfg: EvalConfig = series.DEFAULT_CONFIG) -> list[dict]:
    cases = []
    for q, z in h3_grid():
        p = replace(H3_POINT, q=q)
        spec = horn.h3_spec(p)
        for name, ref in _H3_REFS.items():
            inputs = {"a": p.a, "b": p.b, "c": p.c, "q": q, "z": list(z), "param": name}
            try:
                lhs = paramderiv.eval_derivative_definitional(spec, z, ref, cfg)
                hand = _H3_FORMULAS[name](p, z, cfg)
                generic = paramderiv.eval_derivative_closed(spec, z, ref, cfg)
            except QLauricellaError as exc:
                cases.append(_case(f"h3/{name}/q={q}/z={_point_id(z)}", "verify", inputs, {}, False,
                                   [f"{type(exc).__name__}: {exc}"]))
                continue
            e_hand, e_gen = _rel(hand, lhs, tol), _rel(generic, lhs, tol)
            cases.append(_case(
                f"h3/{name}/q={q}/z={_point_id(z)}", "verify", inputs,
                {"definitional": lhs, "h3_formula": hand, "generic_closed": generic,
                 "rel_err_formula": e_hand, "rel_err_generic": e_gen},
                e_hand <= tol and e_gen <= tol,
            ))
    # which reading of the single-index theorem matches the b-derivative
    z = (0.1, 0.1)
    spec = horn.h3_spec(H3_POINT)
    ref = _H3_REFS["b"]
    lhs = paramderiv.eval_derivative_definitional(spec, z, ref, cfg)
    printed = horn.h3_deriv_b(H3_POINT, z, cfg)
    shifted = paramderiv.single_shift_reading(spec, z, ref, cfg)
    e_printed, e_shifted = _rel(printed, lhs, tol), _rel(shifted, lhs, tol)
    cases.append(_case(
        "h3/b-shift-reading", "regression", {"z": list(z), "param": "b"},
        {"definitional": lhs, "unshifted": printed, "q_shifted": shifted,
         "rel_err_unshifted": e_printed, "rel_err_q_shifted": e_shifted},
        e_printed <= tol and e_shifted > 1e-3,
    ))
    return cases


def random_spec(rng: np.random.Generator) -> SeriesSpec:
    """One random series for the theorem matrix: n <= 3, <= 2 parameters per
    block, exponents in {0, 0.5, 1, 2}, values in +-[0.05, 0.9]."""
    n = int(rng.integers(1, 4))
    q = float(rng.choice([0.2, 0.5, 0.8]))
    exps = np.array([0.0, 0.5, 1.0, 2.0])

    def value():
        return float(rng.choice([-1, 1]) * rng.uniform(0.05, 0.9))

    def multi():
        return [(value(), tuple(rng.choice(exps, n).tolist())) for _ in range(int(rng.integers(0, 3)))]

    def single():
        return [[(value(), float(rng.choice(exps[1:]))) for _ in range(int(rng.integers(0, 3)))] for _ in range(n)]

    return SeriesSpec(q, n, multi(), multi(), single(), single())


def theorem_cases(seed: int = DEFAULT_SEED, min_cases: int = 500):
    """Random (spec, x, ref) triples covering every parameter of each spec."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < min_cases:
        spec = random_spec(rng)
        refs = list(spec.params())
        if not refs:
            continue
        x = tuple(rng.uniform(-0.2, 0.2, spec.n_vars).tolist())
        out.extend((spec, x, ref) for ref in refs)
    return out


def suite_theorems(tol: float, seed: int, cfg: EvalConfig = series.DEFAULT_CONFIG, min_cases: int = 500):
    cases = []
    for n, (spec, x, ref) in enumerate(theorem_cases(seed, min_cases)):
        rep = paramderiv.verify(spec, x, ref, cfg, tol)
        cases.append(_case(
            f"theorems/{n:04d}/{ref}", "verify", {"spec": repr(spec), "x": list(x), "param": str(ref)},
            {"definitional": rep.lhs, "closed": rep.rhs, "rel_diff": rep.rel_diff}, rep.passed, rep.diagnostics,
        ))
    return cases


SUITES = ("h3", "identities", "theorems")


def run_suite(name: str | DescriptorDocument, tol: float = 1e-9, seed: int = DEFAULT_SEED,
              cfg: EvalConfig | None = None) -> dict:
    """Run a built-in suite by name, or verify every (point, param) of a document."""
    started = time.perf_counter()
    if isinstance(name, DescriptorDocument):
        rep = run_deriv(name, tol)
        rep["kind"] = "suite"
        rep["suite"] = "descriptor"
        return rep
    cfg = cfg or series.DEFAULT_CONFIG
    if name == "h3":
        cases = suite_h3(tol, cfg)
    elif name == "identities":
        cases = suite_identities(tol, seed)
    elif name == "theorems":
        cases = suite_theorems(tol, seed, cfg)
    else:
        raise UnknownSuite(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return _report("suite", cases, started, suite=name, seed=seed, tolerance=tol)


def report_body(report: dict) -> str:
    """Canonical JSON of a report without its timing field."""
    body = {k: v for k, v in report.items() if k != "wall_time_s"}
    return json.dumps(body, indent=2, sort_keys=True)


def format_text(report: dict) -> str:
    lines = []
    if "seed" in report:
        lines.append(f"seed: {report['seed']}")
    for c in report["cases"]:
        vals = " ".join(f"{k}={v}" for k, v in c["values"].items())
        lines.append(f"{'PASS' if c['passed'] else 'FAIL'} {c['id']} {vals}".rstrip())
        lines.extend(f"    ! {d}" for d in c["diagnostics"])
    s = report["summary"]
    lines.append(f"{s['passed']}/{s['total']} passed, {s['failed']} failed ({report['wall_time_s']} s)")
    return "\n".join(lines) + "\n"
