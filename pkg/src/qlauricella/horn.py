"""The q-analogue of Horn's H3 function and its three parameter derivatives.

    H3(a, b; c; q; z1, z2) = sum (a;q)_{2 n1 + n2} (b;q)_{n2}
                             / ((q;q)_{n1} (q;q)_{n2} (c;q)_{n1 + n2}) z1^n1 z2^n2

The derivative formulas below are assembled by hand from variable
derivatives of shifted copies of H3. They serve as regression fixtures for
the generic expansions in :mod:`qlauricella.paramderiv`.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import SingularPrefactor
from .qcore import validate_base
from .series import DEFAULT_CONFIG, EvalConfig, SeriesSpec, ShiftState, variable_derivative, weighted_evaluate


@dataclass(frozen=True)
class H3Params:
    a: float
    b: float
    c: float
    q: float

    def __post_init__(self):
        validate_base(self.q)


def h3_spec(p: H3Params) -> SeriesSpec:
    return SeriesSpec(
        q=p.q,
        n_vars=2,
        upper_multi=[(p.a, (2, 1))],
        lower_multi=[(p.c, (1, 1))],
        upper_single=[[], [(p.b, 1)]],
    )


def _check(value, name):
    if value == 1:
        raise SingularPrefactor(f"{name} = 1 makes 1/(1 - {name}) singular")


def _zd(spec, z, k, shift=None, cfg=DEFAULT_CONFIG):
    """``z_k D_{z_k}`` of the (shifted) series at ``z``."""
    return z[k] * variable_derivative(spec, z, k, cfg, shift)


def h3_deriv_b(p: H3Params, z, cfg: EvalConfig = DEFAULT_CONFIG):
    """``D_b H3 = -z2 / (1 - b) D_{z2} H3``, with no shift on ``z2``."""
    _check(p.b, "b")
    return -1 / (1 - p.b) * _zd(h3_spec(p), z, 1, cfg=cfg)


def h3_deriv_a(p: H3Params, z, cfg: EvalConfig = DEFAULT_CONFIG):
    """``D_a H3`` from the split of ``[2 n1 + n2]_q``:

    -1/(2(1-a)) [z2 D_{z2}(H + H(q^2 z1)) + z1 D_{z1}(H(z1^2) + H(z1^2, q z2))]
    """
    _check(p.a, "a")
    spec = h3_spec(p)
    total = _zd(spec, z, 1, cfg=cfg)
    total += _zd(spec, z, 1, ShiftState((2.0, 0.0)), cfg)
    # z1 D_{z1} H(z1^2) read coefficient-wise: weight [2 n1]_q
    total += weighted_evaluate(spec, z, 0, (2.0, 1.0), (), cfg)
    total += weighted_evaluate(spec, z, 0, (2.0, 1.0), (1,), cfg)
    return -total / (2 * (1 - p.a))


def h3_deriv_c(p: H3Params, z, cfg: EvalConfig = DEFAULT_CONFIG):
    """``D_c H3`` with ``c -> q c`` inside every term:

    1/(2(1-c)) [z2 D_{z2}(H + H(q z1)) + z1 D_{z1}(H + H(q z2))]
    """
    _check(p.c, "c")
    spec = h3_spec(H3Params(p.a, p.b, p.q * p.c, p.q))
    total = _zd(spec, z, 1, cfg=cfg)
    total += _zd(spec, z, 1, ShiftState((1.0, 0.0)), cfg)
    total += _zd(spec, z, 0, cfg=cfg)
    total += _zd(spec, z, 0, ShiftState((0.0, 1.0)), cfg)
    return total / (2 * (1 - p.c))
