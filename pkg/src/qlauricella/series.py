"""Descriptor and summation engine for the q-extended Srivastava-Daoust series.

A series in ``n`` variables is

    F(x) = sum_{s >= 0} Omega(s) prod_i x_i^{s_i} / (q;q)_{s_i}

where ``Omega(s)`` is a ratio of q-Pochhammer symbols whose orders are
non-negative linear combinations of the summation indices. Summation runs
over shells of constant total degree ``|s|`` (lexicographic inside a shell)
and stops once a few consecutive shells are negligible.

Each shell is evaluated as a numpy batch. Pochhammer values are computed per
distinct order and cached, so real exponents only pay for the infinite
products once.
"""
from __future__ import annotations

import math
from contextlib import nullcontext
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Callable, Iterator, NamedTuple, Sequence

import mpmath
import numpy as np

from . import qcore
from .errors import DimensionMismatch, NonConvergent, SingularPochhammer


class Block(str, Enum):
    UPPER_MULTI = "upper_multi"
    LOWER_MULTI = "lower_multi"
    UPPER_SINGLE = "upper_single"
    LOWER_SINGLE = "lower_single"

    @property
    def is_single(self) -> bool:
        return self in (Block.UPPER_SINGLE, Block.LOWER_SINGLE)

    @property
    def is_upper(self) -> bool:
        return self in (Block.UPPER_MULTI, Block.UPPER_SINGLE)


@dataclass(frozen=True)
class ParamRef:
    """Address of one parameter: block kind, index ``j``, and for single-index
    blocks the variable ``var`` the parameter is attached to."""

    block: Block
    j: int
    var: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "block", Block(self.block))
        if self.block.is_single and self.var is None:
            raise ValueError(f"{self.block.value} parameters need a variable index")
        if not self.block.is_single and self.var is not None:
            raise ValueError(f"{self.block.value} parameters take no variable index")

    def __str__(self) -> str:
        if self.var is None:
            return f"{self.block.value}[{self.j}]"
        return f"{self.block.value}[{self.var}][{self.j}]"


@dataclass(frozen=True)
class MultiParam:
    value: float
    exponents: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(float(e) for e in self.exponents))


@dataclass(frozen=True)
class SingleParam:
    value: float
    exponent: float

    def __post_init__(self):
        object.__setattr__(self, "exponent", float(self.exponent))


def _multi(items) -> tuple[MultiParam, ...]:
    return tuple(p if isinstance(p, MultiParam) else MultiParam(*p) for p in items)


def _single(groups, n_vars) -> tuple[tuple[SingleParam, ...], ...]:
    if groups is None:
        return tuple(() for _ in range(max(n_vars, 0)))
    return tuple(
        tuple(p if isinstance(p, SingleParam) else SingleParam(*p) for p in group) for group in groups
    )


@dataclass(frozen=True)
class SeriesSpec:
    """Full descriptor of a series.

    ``upper_multi`` / ``lower_multi`` hold ``(value, exponent vector)`` pairs;
    ``upper_single`` / ``lower_single`` hold, for every variable, a list of
    ``(value, exponent)`` pairs. Plain tuples are accepted and normalised.
    Construction does not check consistency; call :func:`validate`.
    """

    q: float
    n_vars: int
    upper_multi: tuple[MultiParam, ...] = ()
    lower_multi: tuple[MultiParam, ...] = ()
    upper_single: tuple[tuple[SingleParam, ...], ...] | None = None
    lower_single: tuple[tuple[SingleParam, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "upper_multi", _multi(self.upper_multi))
        object.__setattr__(self, "lower_multi", _multi(self.lower_multi))
        object.__setattr__(self, "upper_single", _single(self.upper_single, self.n_vars))
        object.__setattr__(self, "lower_single", _single(self.lower_single, self.n_vars))

    def params(self) -> Iterator[ParamRef]:
        """Every parameter reference of the spec, block by block."""
        for j in range(len(self.upper_multi)):
            yield ParamRef(Block.UPPER_MULTI, j)
        for j in range(len(self.lower_multi)):
            yield ParamRef(Block.LOWER_MULTI, j)
        for i, group in enumerate(self.upper_single):
            for j in range(len(group)):
                yield ParamRef(Block.UPPER_SINGLE, j, i)
        for i, group in enumerate(self.lower_single):
            for j in range(len(group)):
                yield ParamRef(Block.LOWER_SINGLE, j, i)

    def _entry(self, ref: ParamRef):
        try:
            if ref.block is Block.UPPER_MULTI:
                return self.upper_multi[ref.j]
            if ref.block is Block.LOWER_MULTI:
                return self.lower_multi[ref.j]
            if ref.block is Block.UPPER_SINGLE:
                return self.upper_single[ref.var][ref.j]
            return self.lower_single[ref.var][ref.j]
        except IndexError:
            raise IndexError(f"{ref} does not exist in this spec") from None

    def value_of(self, ref: ParamRef):
        return self._entry(ref).value

    def exponent_row(self, ref: ParamRef) -> tuple[float, ...]:
        """Exponent vector of a parameter over all variables (zeros off-diagonal
        for single-index parameters)."""
        entry = self._entry(ref)
        if isinstance(entry, MultiParam):
            return entry.exponents
        row = [0.0] * self.n_vars
        row[ref.var] = entry.exponent
        return tuple(row)

    def with_value(self, ref: ParamRef, value) -> "SeriesSpec":
        """Copy of the spec with one parameter value replaced."""
        entry = replace(self._entry(ref), value=value)
        if not ref.block.is_single:
            name = ref.block.value
            items = list(getattr(self, name))
            items[ref.j] = entry
            return replace(self, **{name: tuple(items)})
        name = ref.block.value
        groups = [list(g) for g in getattr(self, name)]
        groups[ref.var][ref.j] = entry
        return replace(self, **{name: tuple(tuple(g) for g in groups)})


@dataclass(frozen=True)
class EvalConfig:
    """Truncation and precision policy.

    A shell is negligible when the sum of its absolute terms is at most
    ``eps_term * |partial sum|``; summation stops after ``shell_stall``
    consecutive negligible shells. ``growth_shells`` consecutive growing
    shells, counted only beyond shell ``growth_warmup``, raise NonConvergent.
    """

    eps_term: float = 1e-16
    n_max_per_index: int = 200
    eps_prod: float = qcore.EPS_PROD
    shell_stall: int = 3
    growth_shells: int = 5
    growth_warmup: int = 10
    precision: str = "double"
    dps: int = 40

    def __post_init__(self):
        for name in ("eps_term", "n_max_per_index", "eps_prod", "shell_stall", "growth_shells", "dps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"EvalConfig.{name} must be positive")
        if self.precision not in ("double", "extended"):
            raise ValueError("precision must be 'double' or 'extended'")


@dataclass(frozen=True)
class EvalResult:
    value: float
    shells_used: int
    last_shell_magnitude: float
    truncated_flag: bool


@dataclass(frozen=True)
class ShiftState:
    """Variable rescalings ``x_i -> q^{shift_i} x_i`` and parameter overrides,
    applied at evaluation time without touching the spec."""

    q_power_shifts: tuple[float, ...] | None = None
    param_overrides: tuple[tuple[ParamRef, float], ...] = ()

    def __post_init__(self):
        if self.q_power_shifts is not None:
            object.__setattr__(self, "q_power_shifts", tuple(self.q_power_shifts))
        object.__setattr__(self, "param_overrides", tuple(tuple(o) for o in self.param_overrides))

    def shifts(self, n_vars: int) -> tuple[float, ...]:
        if self.q_power_shifts is None:
            return (0.0,) * n_vars
        if len(self.q_power_shifts) != n_vars:
            raise DimensionMismatch(f"{len(self.q_power_shifts)} shifts for {n_vars} variables")
        return self.q_power_shifts

    def apply(self, spec: SeriesSpec) -> SeriesSpec:
        for ref, value in self.param_overrides:
            spec = spec.with_value(ref, value)
        return spec

    def with_extra_shifts(self, extra: Sequence[float]) -> "ShiftState":
        base = self.shifts(len(extra))
        return replace(self, q_power_shifts=tuple(b + e for b, e in zip(base, extra)))


DEFAULT_CONFIG = EvalConfig()
NO_SHIFT = ShiftState()


class Diagnostic(NamedTuple):
    kind: str
    message: str


# -- validation --------------------------------------------------------------


def _lattice_hit(value, row: Sequence[float], q, n_max: int) -> int | None:
    """Integer ``m >= 0`` with ``value * q^m == 1`` that the series can reach."""
    if value <= 0 or not any(e > 0 for e in row):
        return None
    m = -math.log(float(value)) / math.log(float(q))
    if m < -1e-9 or abs(m - round(m)) > 1e-9:
        return None
    m = int(round(m))
    reach = n_max * sum(row)
    fractional = any(not float(e).is_integer() for e in row)
    # real orders put (value;q)_inf in the numerator, which vanishes for any m
    if fractional or m < reach:
        return m
    return None


def validate(spec: SeriesSpec, cfg: EvalConfig = DEFAULT_CONFIG) -> list[Diagnostic]:
    """Structural and numerical checks; an empty list means the spec is usable."""
    out: list[Diagnostic] = []
    if not 0 < spec.q < 1:
        out.append(Diagnostic("InvalidBase", f"q={spec.q!r} is not in (0, 1)"))
    if spec.n_vars < 1:
        out.append(Diagnostic("DimensionMismatch", "n_vars must be at least 1"))
        return out
    for name in ("upper_multi", "lower_multi"):
        for j, p in enumerate(getattr(spec, name)):
            if len(p.exponents) != spec.n_vars:
                out.append(Diagnostic(
                    "DimensionMismatch",
                    f"{name}[{j}] has {len(p.exponents)} exponents, expected {spec.n_vars}",
                ))
            if any(e < 0 for e in p.exponents):
                out.append(Diagnostic("NegativeExponent", f"{name}[{j}] has a negative exponent"))
    for name in ("upper_single", "lower_single"):
        groups = getattr(spec, name)
        if len(groups) != spec.n_vars:
            out.append(Diagnostic(
                "DimensionMismatch", f"{name} has {len(groups)} variable groups, expected {spec.n_vars}"
            ))
        for i, group in enumerate(groups):
            for j, p in enumerate(group):
                if p.exponent < 0:
                    out.append(Diagnostic("NegativeExponent", f"{name}[{i}][{j}] has a negative exponent"))
    if out:
        return out
    for ref in spec.params():
        if ref.block.is_upper:
            continue
        m = _lattice_hit(spec.value_of(ref), spec.exponent_row(ref), spec.q, cfg.n_max_per_index)
        if m is not None:
            out.append(Diagnostic(
                "SingularLowerParameter",
                f"{ref} = q^-{m}: its Pochhammer symbol vanishes inside the summation window",
            ))
    return out


# -- numeric context ---------------------------------------------------------


class _Arith:
    """Scalar conversion and array helpers for double or extended precision."""

    def __init__(self, cfg: EvalConfig):
        self.extended = cfg.precision == "extended"
        self.dps = cfg.dps
        self.eps_prod = cfg.eps_prod

    def context(self):
        return mpmath.workdps(self.dps) if self.extended else nullcontext()

    def scalar(self, v):
        return mpmath.mpf(v) if self.extended else float(v)

    def ones(self, size: int) -> np.ndarray:
        if self.extended:
            return np.array([mpmath.mpf(1)] * size, dtype=object)
        return np.ones(size)

    def array(self, values) -> np.ndarray:
        return np.array(values, dtype=object if self.extended else float)

    def qpow(self, q, exps: np.ndarray) -> np.ndarray:
        if self.extended:
            return np.array([q ** mpmath.mpf(float(e)) for e in exps], dtype=object)
        return np.power(q, exps)

    def poch(self, a, q, order: float):
        if self.extended:
            if float(order).is_integer():
                return qcore.poch_finite(a, q, int(order))
            return qcore.poch_real(a, q, mpmath.mpf(order), self.eps_prod)
        return _poch_double(a, q, order, self.eps_prod)

    def poch_orders(self, a, q, orders: np.ndarray) -> np.ndarray:
        uniq, inv = np.unique(orders, return_inverse=True)
        vals = self.array([self.poch(a, q, float(o)) for o in uniq])
        return vals[inv.reshape(-1)]

    def total(self, values: np.ndarray):
        if self.extended:
            return mpmath.fsum(values)
        return math.fsum(values)


@lru_cache(maxsize=1 << 16)
def _poch_double(a: float, q: float, order: float, eps_prod: float) -> float:
    return qcore.q_pochhammer(a, q, int(order) if order.is_integer() else order, eps_prod)


@lru_cache(maxsize=512)
def _shell_indices(n: int, total: int) -> np.ndarray:
    """All ``s`` with ``|s| = total``, lexicographically ordered, as rows."""
    rows: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int, slots: int):
        if slots == 1:
            rows.append(prefix + (remaining,))
            return
        for head in range(remaining + 1):
            rec(prefix + (head,), remaining - head, slots - 1)

    rec((), total, n)
    arr = np.array(rows, dtype=np.int64).reshape(-1, n)
    arr.setflags(write=False)
    return arr


# -- term machinery ----------------------------------------------------------


def _omega_batch(spec: SeriesSpec, S: np.ndarray, ar: _Arith) -> np.ndarray:
    q = ar.scalar(spec.q)
    Sf = S.astype(float)
    out = ar.ones(S.shape[0])
    for p in spec.upper_multi:
        out = out * ar.poch_orders(ar.scalar(p.value), q, Sf @ np.asarray(p.exponents, dtype=float))
    for i, group in enumerate(spec.upper_single):
        for p in group:
            out = out * ar.poch_orders(ar.scalar(p.value), q, Sf[:, i] * float(p.exponent))
    den = ar.ones(S.shape[0])
    for p in spec.lower_multi:
        den = den * ar.poch_orders(ar.scalar(p.value), q, Sf @ np.asarray(p.exponents, dtype=float))
    for i, group in enumerate(spec.lower_single):
        for p in group:
            den = den * ar.poch_orders(ar.scalar(p.value), q, Sf[:, i] * float(p.exponent))
    if np.any(np.abs(den) < qcore.SINGULARITY_FLOOR):
        raise SingularPochhammer("a lower-parameter Pochhammer symbol vanishes in the summation window")
    return out / den


class _PowerTable:
    """Grows ``c^s / (q;q)_s`` on demand; ``strip`` divides out one power of x."""

    def __init__(self, x, mult, q, ar: _Arith, strip: bool = False):
        self.x, self.mult, self.q, self.ar, self.strip = x, mult, q, ar, strip
        self.values = [self._first()]
        self._cx = mult * x
        self._poch = ar.scalar(1)
        self._pow = ar.scalar(1)

    def _first(self):
        return self.ar.scalar(0) if self.strip else self.ar.scalar(1)

    def get(self, idx: np.ndarray) -> np.ndarray:
        top = int(idx.max()) if idx.size else 0
        while len(self.values) <= top:
            s = len(self.values)
            self._poch = self._poch * (1 - self.q**s)
            if self.strip:
                # mult^s x^{s-1}: the x_k = 0 limit keeps only s = 1
                val = self.mult**s * (self.x ** (s - 1)) / self._poch
            else:
                self._pow = self._pow * self._cx
                val = self._pow / self._poch
            self.values.append(val)
        return self.ar.array(self.values)[idx]


def _summate(
    spec: SeriesSpec,
    x: Sequence[float],
    cfg: EvalConfig,
    shift: ShiftState,
    weight: Callable[[np.ndarray, _Arith], np.ndarray] | None = None,
    strip: int | None = None,
    omega_fn: Callable[[np.ndarray, _Arith], np.ndarray] | None = None,
) -> EvalResult:
    if len(x) != spec.n_vars:
        raise DimensionMismatch(f"point has {len(x)} coordinates, series has {spec.n_vars} variables")
    shift = shift or NO_SHIFT
    ar = _Arith(cfg)
    with ar.context():
        q = ar.scalar(spec.q)
        sigma = shift.shifts(spec.n_vars)
        eff = shift.apply(spec)
        if omega_fn is None:
            omega_fn = lambda S, a: _omega_batch(eff, S, a)  # noqa: E731
        tables = [
            _PowerTable(ar.scalar(xi), q ** ar.scalar(sg), q, ar, strip=(i == strip))
            for i, (xi, sg) in enumerate(zip(x, sigma))
        ]
        acc = ar.scalar(0)
        stall = grow = 0
        prev_mag = None
        mag = ar.scalar(0)
        truncated = True
        t = 0
        for t in range(cfg.n_max_per_index + 1):
            S = _shell_indices(spec.n_vars, t)
            terms = omega_fn(S, ar)
            for i, table in enumerate(tables):
                terms = terms * table.get(S[:, i])
            if weight is not None:
                terms = terms * weight(S, ar)
            acc += ar.total(terms)
            mag = ar.total(np.abs(terms))
            if prev_mag is not None and t > cfg.growth_warmup and mag > prev_mag:
                grow += 1
                if grow >= cfg.growth_shells:
                    raise NonConvergent(
                        f"shell magnitudes grew for {grow} consecutive shells (shell {t}, |shell|={float(mag):.3g})"
                    )
            else:
                grow = 0
            prev_mag = mag
            if not math.isfinite(float(mag)):
                raise NonConvergent(f"non-finite shell magnitude at shell {t}")
            stall = stall + 1 if mag <= cfg.eps_term * abs(acc) else 0
            if stall >= cfg.shell_stall:
                truncated = False
                break
        return EvalResult(acc, t + 1, mag, truncated)


def _bracket_weight(k: int, exponent: float, q) -> Callable:
    def weight(S: np.ndarray, ar: _Arith) -> np.ndarray:
        qq = ar.scalar(q)
        return (1 - ar.qpow(qq, S[:, k] * float(exponent))) / (1 - qq)

    return weight


# -- public operations -------------------------------------------------------


def omega(spec: SeriesSpec, s: Sequence[int], cfg: EvalConfig = DEFAULT_CONFIG):
    """The coefficient ``Omega(s)`` for a single multi-index."""
    if len(s) != spec.n_vars:
        raise DimensionMismatch(f"multi-index has {len(s)} entries, series has {spec.n_vars} variables")
    if any(int(v) != v or v < 0 for v in s):
        raise ValueError("multi-index entries must be non-negative integers")
    ar = _Arith(cfg)
    with ar.context():
        return _omega_batch(spec, np.array([s], dtype=np.int64), ar)[0]


def evaluate(
    spec: SeriesSpec, x: Sequence[float], cfg: EvalConfig = DEFAULT_CONFIG, shift: ShiftState | None = None
) -> EvalResult:
    """Sum the series at ``x`` (after shifts/overrides) with diagnostics."""
    return _summate(spec, x, cfg, shift or NO_SHIFT)


def variable_derivative_result(spec, x, k: int, cfg=DEFAULT_CONFIG, shift=None) -> EvalResult:
    if not 0 <= k < spec.n_vars:
        raise IndexError(f"variable index {k} out of range")
    return _summate(spec, x, cfg, shift or NO_SHIFT, weight=_bracket_weight(k, 1.0, spec.q), strip=k)


def variable_derivative(spec, x, k: int, cfg=DEFAULT_CONFIG, shift=None):
    """Jackson q-derivative in ``x_k`` of ``z -> F(shifted z)`` at ``x``.

    The series form ``sum [s_k]_q Omega x^s / ((q;q)_s x_k)`` is used, with one
    power of ``x_k`` removed term by term, so ``x_k = 0`` needs no special care.
    """
    return variable_derivative_result(spec, x, k, cfg, shift).value


def weighted_evaluate_result(
    spec, x, k: int, theta_row: Sequence[float], prefix: Sequence[int] = (), cfg=DEFAULT_CONFIG, shift=None
) -> EvalResult:
    if len(theta_row) != spec.n_vars:
        raise DimensionMismatch(f"theta row has {len(theta_row)} entries, expected {spec.n_vars}")
    if k in prefix:
        raise ValueError("the target variable cannot be part of the prefix")
    extra = [0.0] * spec.n_vars
    for j in prefix:
        extra[j] += float(theta_row[j])
    shift = (shift or NO_SHIFT).with_extra_shifts(extra)
    return _summate(spec, x, cfg, shift, weight=_bracket_weight(k, theta_row[k], spec.q))


def weighted_evaluate(spec, x, k: int, theta_row, prefix=(), cfg=DEFAULT_CONFIG, shift=None):
    """``sum_s [theta_k s_k]_q prod_{j in prefix} q^{theta_j s_j} Omega(s) x^s/(q;q)_s``.

    This is one bracketed term of the parameter-derivative expansions read at
    coefficient level: the ``q^{theta_j}`` factors are realised as variable
    shifts, and the bracket restores unit powers of ``x_k``.
    """
    return weighted_evaluate_result(spec, x, k, theta_row, prefix, cfg, shift).value
