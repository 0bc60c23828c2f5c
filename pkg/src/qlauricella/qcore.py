"""Scalar q-calculus primitives.

Everything here is written against plain Python arithmetic so the same code
runs on ``float`` and on ``mpmath.mpf`` inputs (extended precision mode).
The base ``q`` is always real with ``0 < q < 1``.
"""
from __future__ import annotations

import numbers
from typing import Callable, NamedTuple, Sequence

from .errors import DimensionMismatch, InvalidBase, NonConvergent, SingularPochhammer, ZeroPoint

#: Infinite products stop once the running term ``|a q^m|`` drops below this.
EPS_PROD = 1e-17
#: Denominator factors smaller than this in absolute value are treated as poles.
SINGULARITY_FLOOR = 1e-300
#: Hard cap on the number of factors in a truncated infinite product.
MAX_FACTORS = 10**6


def validate_base(q):
    """Return ``q`` unchanged if it is a valid base, else raise InvalidBase."""
    if not 0 < q < 1:
        raise InvalidBase(f"base q must satisfy 0 < q < 1, got {q!r}")
    return q


def q_bracket(x, q):
    """The q-number ``[x]_q = (1 - q**x) / (1 - q)`` for real ``x``."""
    validate_base(q)
    return (1 - q**x) / (1 - q)


def _is_integer_order(n) -> bool:
    if isinstance(n, bool):
        return False
    if isinstance(n, numbers.Integral):
        return True
    return float(n).is_integer()


def poch_finite(a, q, n: int):
    """``(a;q)_n`` for integer ``n >= 0`` as the finite product."""
    value = 1 + 0 * a
    qm = 1 + 0 * q
    for _ in range(n):
        value *= 1 - a * qm
        qm *= q
    return value


def poch_infinite(a, q, eps_prod=EPS_PROD, max_factors=MAX_FACTORS):
    """``(a;q)_inf`` truncated once ``|a q^m| < eps_prod``."""
    value = 1 + 0 * a
    term = a
    m = 0
    while abs(term) >= eps_prod:
        if m >= max_factors:
            raise NonConvergent(f"(a;q)_inf did not settle within {max_factors} factors")
        value *= 1 - term
        term *= q
        m += 1
    return value


def poch_negative(a, q, n: int, floor=SINGULARITY_FLOOR):
    """``(a;q)_{-n} = 1 / prod_{m=1..n} (1 - a q^{-m})`` for integer ``n >= 1``."""
    denom = 1 + 0 * a
    for m in range(1, n + 1):
        factor = 1 - a * q ** (-m)
        if abs(factor) < floor:
            raise SingularPochhammer(f"(a;q)_{{-{n}}} has a pole: 1 - a q^-{m} = 0 for a={a!r}")
        denom *= factor
    return 1 / denom


def poch_negative_dual(a, q, n: int, floor=SINGULARITY_FLOOR):
    """Second closed form ``(-q/a)^n q^{n(n-1)/2} / (q/a;q)_n`` of ``(a;q)_{-n}``."""
    if abs(a) < floor:
        raise SingularPochhammer("dual form of (a;q)_{-n} needs a != 0")
    denom = poch_finite(q / a, q, n)
    if abs(denom) < floor:
        raise SingularPochhammer(f"(q/a;q)_{n} vanishes for a={a!r}")
    return (-q / a) ** n * q ** (n * (n - 1) // 2) / denom


def poch_real(a, q, x, eps_prod=EPS_PROD, floor=SINGULARITY_FLOOR, max_factors=MAX_FACTORS):
    """``(a;q)_x = (a;q)_inf / (a q^x;q)_inf`` for real ``x >= 0``.

    Both products share one loop; it runs until ``|a q^m|`` (the larger of the
    two running terms) falls below ``eps_prod``.
    """
    if x < 0:
        raise ValueError("negative real Pochhammer orders are not supported")
    num = 1 + 0 * a
    den = 1 + 0 * a
    top = a
    bottom = a * q**x
    m = 0
    while abs(top) >= eps_prod or abs(bottom) >= eps_prod:
        if m >= max_factors:
            raise NonConvergent(f"(a;q)_x did not settle within {max_factors} factors")
        factor = 1 - bottom
        if abs(factor) < floor:
            raise SingularPochhammer(f"(a q^x;q)_inf vanishes for a={a!r}, x={x!r}")
        num *= 1 - top
        den *= factor
        top *= q
        bottom *= q
        m += 1
    return num / den


def q_pochhammer(a, q, n=None, eps_prod=EPS_PROD, floor=SINGULARITY_FLOOR):
    """q-shifted factorial ``(a;q)_n``.

    ``n`` may be ``None`` (infinite product), an integer of either sign, or a
    non-negative real. Integer valued reals use the exact finite product.
    """
    validate_base(q)
    if n is None:
        return poch_infinite(a, q, eps_prod)
    if _is_integer_order(n):
        n = int(n)
        if n >= 0:
            return poch_finite(a, q, n)
        return poch_negative(a, q, -n, floor)
    return poch_real(a, q, n, eps_prod, floor)


def jackson_derivative(f: Callable, x, q):
    """Jackson q-derivative ``(f(q x) - f(x)) / ((q - 1) x)``."""
    validate_base(q)
    if x == 0:
        raise ZeroPoint("the Jackson difference quotient is undefined at x = 0")
    return (f(q * x) - f(x)) / ((q - 1) * x)


class SplitComponent(NamedTuple):
    index: int
    weight: float
    bracket: float


def cyclic_prefixes(k: int, size: int) -> list[tuple[int, ...]]:
    """Index runs that follow ``k`` cyclically, of lengths ``0 .. size-1``.

    >>> cyclic_prefixes(0, 3)
    [(), (1,), (1, 2)]
    >>> cyclic_prefixes(2, 3)
    [(), (0,), (0, 1)]
    """
    return [tuple((k + j) % size for j in range(1, length + 1)) for length in range(size)]


def split_q_bracket(theta: Sequence, m: Sequence[int], q) -> list[SplitComponent]:
    """Split ``[theta . m]_q`` into single-index brackets with cyclic weights.

    Component ``k`` carries ``[theta_k m_k]_q`` and the weight
    ``(1 + q^{x_{k+1}} + q^{x_{k+1}+x_{k+2}} + ...) / K`` where ``x_j = theta_j m_j``
    and indices wrap around. Summing ``weight * bracket`` recovers the bracket
    of the dot product.
    """
    validate_base(q)
    if len(theta) != len(m):
        raise DimensionMismatch(f"theta has {len(theta)} entries, m has {len(m)}")
    size = len(theta)
    if size == 0:
        raise DimensionMismatch("split_q_bracket needs at least one index")
    x = [t * mm for t, mm in zip(theta, m)]
    out = []
    for k in range(size):
        weight = 0
        for prefix in cyclic_prefixes(k, size):
            weight += q ** sum((x[j] for j in prefix), 0)
        out.append(SplitComponent(k, weight / size, q_bracket(x[k], q)))
    return out
