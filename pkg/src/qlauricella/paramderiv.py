"""q-derivatives of the series with respect to its parameters.

Two independent routes are provided:

* :func:`eval_derivative_definitional` applies the Jackson difference to the
  parameter itself, ``(F(p -> q p) - F(p)) / ((q - 1) p)``.
* :func:`eval_derivative_closed` evaluates the finite expansion returned by
  :func:`expand_derivative`: a sum of variable-derivative terms of shifted
  copies of the series, built from the cyclic q-bracket split.

For a parameter whose Pochhammer order is ``N(s) = row . s`` the expansion is

    D_p F = -1/(K (1 - p)) sum_k sum_{prefix} z_k D_{z_k} F(shifted)   (upper)
    D_p F = +1/(K (1 - p)) sum_k sum_{prefix} z_k D_{z_k} F(p -> q p, shifted)   (lower)

where ``k`` runs over the ``K`` variables with a positive exponent and each
prefix is a cyclic run of the active variables following ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import mpmath

from . import series
from .errors import QLauricellaError, SingularPrefactor, ZeroParameter
from .qcore import SINGULARITY_FLOOR, cyclic_prefixes
from .series import DEFAULT_CONFIG, EvalConfig, EvalResult, ParamRef, SeriesSpec, ShiftState

__all__ = [
    "ExpansionTerm",
    "VerifyReport",
    "expand_derivative",
    "eval_term",
    "eval_derivative_closed",
    "eval_derivative_definitional",
    "single_shift_reading",
    "verify",
]


@dataclass(frozen=True)
class ExpansionTerm:
    """One ``z_k D_{z_k} F(...)`` term of a closed-form parameter derivative.

    The numeric value is ``prefactor * weighted_evaluate(...)`` where
    ``prefactor = sign / (count * (1 - divisor))``; variables listed in
    ``prefix_shift_vars`` are rescaled by ``q^{bracket_exponents[j]}`` and each
    ``(ref, m)`` in ``param_substitutions`` replaces that parameter by ``m`` times
    its value.
    """

    sign: int
    divisor: float
    count: int
    target_var: int
    bracket_exponents: tuple[float, ...]
    prefix_shift_vars: tuple[int, ...] = ()
    param_substitutions: tuple[tuple[ParamRef, float], ...] = ()

    @property
    def prefactor(self) -> float:
        return self.sign / (self.count * (1 - self.divisor))

    def describe(self) -> str:
        z = f"z{self.target_var + 1}"
        power = self.bracket_exponents[self.target_var]
        args = [f"{z}^{power:g}" if power != 1 else z]
        args += [f"q^{self.bracket_exponents[j]:g} z{j + 1}" for j in self.prefix_shift_vars]
        args += [f"{ref} -> {m:g}*{ref}" for ref, m in self.param_substitutions]
        return f"{self.prefactor:+.17g} * {z} D_{z} F({', '.join(args)})"

    def to_dict(self) -> dict:
        return {
            "sign": self.sign,
            "divisor": self.divisor,
            "count": self.count,
            "prefactor": self.prefactor,
            "target_var": self.target_var,
            "bracket_exponents": list(self.bracket_exponents),
            "prefix_shift_vars": list(self.prefix_shift_vars),
            "param_substitutions": [
                {"param": _ref_dict(ref), "multiplier": m} for ref, m in self.param_substitutions
            ],
        }


def _ref_dict(ref: ParamRef) -> dict:
    out = {"block": ref.block.value, "j": ref.j}
    if ref.var is not None:
        out["var"] = ref.var
    return out


@dataclass(frozen=True)
class VerifyReport:
    lhs: float
    rhs: float
    abs_diff: float
    rel_diff: float
    passed: bool
    tolerance: float
    diagnostics: tuple[str, ...] = field(default=())


def expand_derivative(spec: SeriesSpec, ref: ParamRef) -> list[ExpansionTerm]:
    """Closed-form expansion of ``D_{p,q} F`` as a list of terms.

    Multi-index parameters give ``K * K`` terms (``K`` = number of variables
    with a strictly positive exponent); single-index parameters give one
    term with bracket row ``phi * e_i``. A parameter that no Pochhammer order
    depends on yields an empty list.
    """
    p = spec.value_of(ref)
    if abs(1 - p) < SINGULARITY_FLOOR:
        raise SingularPrefactor(f"{ref} = 1 makes the prefactor 1/(1 - p) singular")
    row = tuple(float(e) for e in spec.exponent_row(ref))
    sign = -1 if ref.block.is_upper else 1
    subs = () if ref.block.is_upper else ((ref, spec.q),)
    active = [i for i, e in enumerate(row) if e > 0]
    size = len(active)
    terms = []
    for pos, k in enumerate(active):
        for run in cyclic_prefixes(pos, size):
            terms.append(ExpansionTerm(
                sign=sign,
                divisor=p,
                count=size,
                target_var=k,
                bracket_exponents=row,
                prefix_shift_vars=tuple(active[j] for j in run),
                param_substitutions=subs,
            ))
    return terms


def _scaled(cfg: EvalConfig, m, v):
    # q * p must not be rounded to double before an extended-precision run
    if cfg.precision == "extended":
        with mpmath.workdps(cfg.dps):
            return mpmath.mpf(m) * mpmath.mpf(v)
    return m * v


def _prefactor(cfg: EvalConfig, term: ExpansionTerm):
    if cfg.precision == "extended":
        with mpmath.workdps(cfg.dps):
            return term.sign / (term.count * (1 - mpmath.mpf(term.divisor)))
    return term.prefactor


def _term_result(spec, x, term: ExpansionTerm, cfg: EvalConfig) -> EvalResult:
    overrides = tuple((ref, _scaled(cfg, m, spec.value_of(ref))) for ref, m in term.param_substitutions)
    return series.weighted_evaluate_result(
        spec, x, term.target_var, term.bracket_exponents, term.prefix_shift_vars, cfg,
        ShiftState(param_overrides=overrides),
    )


def eval_term(spec: SeriesSpec, x, term: ExpansionTerm, cfg: EvalConfig = DEFAULT_CONFIG):
    """Numeric value of one expansion term, prefactor included."""
    return _prefactor(cfg, term) * _term_result(spec, x, term, cfg).value


def _closed(spec, x, ref, cfg) -> tuple[float, list[str]]:
    notes = []
    total = 0
    for n, term in enumerate(expand_derivative(spec, ref)):
        res = _term_result(spec, x, term, cfg)
        if res.truncated_flag:
            notes.append(f"closed form term {n} hit n_max_per_index")
        with mpmath.workdps(cfg.dps):
            total = total + _prefactor(cfg, term) * res.value
    return total, notes


def eval_derivative_closed(spec: SeriesSpec, x, ref: ParamRef, cfg: EvalConfig = DEFAULT_CONFIG):
    """``D_{p,q} F(x)`` from the finite expansion."""
    return _closed(spec, x, ref, cfg)[0]


def _definitional(spec, x, ref, cfg, termwise=True) -> tuple[float, list[str]]:
    p = spec.value_of(ref)
    if p == 0:
        raise ZeroParameter(f"{ref} = 0: the parameter difference quotient divides by p")
    q = spec.q
    moved = spec.with_value(ref, _scaled(cfg, q, p))
    if termwise:
        def diff(S, ar):
            return series._omega_batch(moved, S, ar) - series._omega_batch(spec, S, ar)

        res = series._summate(spec, x, cfg, series.NO_SHIFT, omega_fn=diff)
        numerator = res.value
        notes = ["definitional sum hit n_max_per_index"] if res.truncated_flag else []
    else:
        hi = series.evaluate(moved, x, cfg)
        lo = series.evaluate(spec, x, cfg)
        numerator = hi.value - lo.value
        notes = ["definitional sum hit n_max_per_index"] if hi.truncated_flag or lo.truncated_flag else []
    if cfg.precision == "extended":
        with mpmath.workdps(cfg.dps):
            return numerator / ((mpmath.mpf(q) - 1) * mpmath.mpf(p)), notes
    return numerator / ((q - 1) * p), notes


def eval_derivative_definitional(
    spec: SeriesSpec, x, ref: ParamRef, cfg: EvalConfig = DEFAULT_CONFIG, termwise: bool = True
):
    """``(F(p -> q p) - F(p)) / ((q - 1) p)``.

    With ``termwise`` (the default) the two series are differenced coefficient
    by coefficient before summing, which avoids cancelling two ``O(1)`` totals.
    ``termwise=False`` subtracts two independently summed values.
    """
    return _definitional(spec, x, ref, cfg, termwise)[0]


def single_shift_reading(spec: SeriesSpec, x, ref: ParamRef, cfg: EvalConfig = DEFAULT_CONFIG):
    """Literal operator reading ``-+1/(1-p) z_i D_{z_i} F(q^phi z_i)`` for a
    single-index parameter.

    Kept as a comparison point: it disagrees with the definitional derivative
    unless ``phi = 0`` (see tests), the bracket-row expansion is the one that holds.
    """
    if not ref.block.is_single:
        raise ValueError("the shift reading only applies to single-index parameters")
    p = spec.value_of(ref)
    if abs(1 - p) < SINGULARITY_FLOOR:
        raise SingularPrefactor(f"{ref} = 1 makes the prefactor 1/(1 - p) singular")
    phi = spec.exponent_row(ref)[ref.var]
    shifts = [0.0] * spec.n_vars
    shifts[ref.var] = phi
    overrides = () if ref.block.is_upper else ((ref, _scaled(cfg, spec.q, p)),)
    sign = -1 if ref.block.is_upper else 1
    dz = series.variable_derivative(spec, x, ref.var, cfg, ShiftState(shifts, overrides))
    return sign / (1 - p) * x[ref.var] * dz


def verify(
    spec: SeriesSpec, x, ref: ParamRef, cfg: EvalConfig = DEFAULT_CONFIG, tol: float = 1e-9
) -> VerifyReport:
    """Compare both routes; errors end up in ``diagnostics`` with ``passed=False``."""
    diags: list[str] = [f"{d.kind}: {d.message}" for d in series.validate(spec, cfg)]
    lhs = rhs = float("nan")
    if not diags:
        try:
            lhs, notes = _definitional(spec, x, ref, cfg)
            diags += notes
        except QLauricellaError as exc:
            diags.append(f"{type(exc).__name__}: {exc}")
        try:
            rhs, notes = _closed(spec, x, ref, cfg)
            diags += notes
        except QLauricellaError as exc:
            diags.append(f"{type(exc).__name__}: {exc}")
    abs_diff = abs(lhs - rhs)
    if lhs != lhs or rhs != rhs:
        rel_diff = float("nan")
    elif lhs == 0:
        rel_diff = 0.0 if abs_diff == 0 else float("inf")
    else:
        rel_diff = abs_diff / abs(lhs)
    if abs(lhs) < tol:
        passed = bool(abs_diff <= tol)
    else:
        passed = bool(rel_diff <= tol)
    failed_eval = any(d.split(":")[0] in _FATAL for d in diags)
    return VerifyReport(
        lhs=lhs, rhs=rhs, abs_diff=abs_diff, rel_diff=rel_diff,
        passed=passed and not failed_eval, tolerance=tol, diagnostics=tuple(diags),
    )


_FATAL = {
    "SingularPrefactor", "ZeroParameter", "SingularPochhammer", "NonConvergent",
    "DimensionMismatch", "InvalidBase", "NegativeExponent", "SingularLowerParameter",
}
