import mpmath as mp
import numpy as np
import pytest

import oracles
from qlauricella import qcore
from qlauricella.errors import DimensionMismatch, NonConvergent
from qlauricella.horn import H3Params, h3_spec
from qlauricella.series import (
    EvalConfig,
    ParamRef,
    SeriesSpec,
    ShiftState,
    evaluate,
    omega,
    validate,
    variable_derivative,
    weighted_evaluate,
)

H3 = h3_spec(H3Params(a=0.3, b=0.2, c=0.7, q=0.5))
EXT = EvalConfig(precision="extended", eps_term=1e-34, eps_prod=1e-38)


def random_spec(rng, n, lower_scale=0.9):
    exps = [0.0, 0.5, 1.0, 2.0]

    def v(scale=0.9):
        return float(rng.uniform(-scale, scale))

    return SeriesSpec(
        q=float(rng.choice([0.2, 0.5, 0.8])),
        n_vars=n,
        upper_multi=[(v(), tuple(rng.choice(exps, n))) for _ in range(rng.integers(0, 3))],
        lower_multi=[(v(lower_scale), tuple(rng.choice(exps, n))) for _ in range(rng.integers(0, 3))],
        upper_single=[[(v(), float(rng.choice(exps))) for _ in range(rng.integers(0, 3))] for _ in range(n)],
        lower_single=[[(v(lower_scale), float(rng.choice(exps))) for _ in range(rng.integers(0, 3))] for _ in range(n)],
    )


# -- validate ----------------------------------------------------------------


def test_validate_h3_clean():
    assert validate(H3) == []


def test_validate_wrong_exponent_length():
    spec = SeriesSpec(0.5, 2, upper_multi=[(0.3, (2, 1, 1))])
    assert [d.kind for d in validate(spec)] == ["DimensionMismatch"]


def test_validate_negative_exponent():
    spec = SeriesSpec(0.5, 1, upper_single=[[(0.3, -1)]])
    assert [d.kind for d in validate(spec)] == ["NegativeExponent"]


def test_validate_lower_on_lattice():
    spec = SeriesSpec(0.5, 2, lower_multi=[(2.0, (1, 1))])
    assert [d.kind for d in validate(spec)] == ["SingularLowerParameter"]
    # (2;0.5)_2 has the factor 1 - 2 * 0.5
    assert qcore.q_pochhammer(2.0, 0.5, 2) == 0


def test_validate_lower_off_lattice_or_unreached():
    assert validate(SeriesSpec(0.5, 1, lower_single=[[(2.5, 1)]])) == []
    # exponent 0: the parameter never enters
    assert validate(SeriesSpec(0.5, 1, lower_single=[[(1.0, 0)]])) == []


# -- omega -------------------------------------------------------------------


def test_omega_origin():
    assert omega(H3, (0, 0)) == 1


def test_omega_h3_first_term():
    a, c, q = 0.3, 0.7, 0.5
    assert omega(H3, (1, 0)) == pytest.approx((1 - a) * (1 - a * q) / (1 - c), rel=1e-15)


def test_omega_single_factor():
    spec = SeriesSpec(0.5, 1, upper_multi=[(0.3, (1,))])
    assert omega(spec, (3,)) == qcore.q_pochhammer(0.3, 0.5, 3)


def test_omega_real_exponents_against_oracle():
    rng = np.random.default_rng(7)
    for _ in range(20):
        spec = random_spec(rng, 3)
        s = tuple(int(v) for v in rng.integers(0, 6, 3))
        assert omega(spec, s) == pytest.approx(float(oracles.omega(spec, s)), rel=1e-12)


# -- evaluate ----------------------------------------------------------------


def test_q_exponential():
    res = evaluate(SeriesSpec(0.5, 1), [0.25])
    assert not res.truncated_flag
    assert res.value == pytest.approx(1 / qcore.poch_infinite(0.25, 0.5), rel=1e-12)


def test_q_binomial():
    spec = SeriesSpec(0.5, 1, upper_single=[[(0.3, 1)]])
    expected = qcore.poch_infinite(0.3 * 0.25, 0.5) / qcore.poch_infinite(0.25, 0.5)
    assert evaluate(spec, [0.25]).value == pytest.approx(expected, rel=1e-12)


def test_origin_is_one():
    assert evaluate(H3, [0.0, 0.0]).value == 1


def test_point_dimension():
    with pytest.raises(DimensionMismatch):
        evaluate(H3, [0.1])


@pytest.mark.parametrize("seed", range(10))
def test_matches_naive_box_sum(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 3))
    spec = random_spec(rng, n, lower_scale=0.5)
    x = rng.uniform(-0.05, 0.05, n).tolist()
    assert evaluate(spec, x).value == pytest.approx(float(oracles.naive_sum(spec, x, 12)), rel=1e-12)


def test_relabeling_equivariance():
    rng = np.random.default_rng(3)
    for _ in range(5):
        spec = random_spec(rng, 3)
        x = rng.uniform(-0.2, 0.2, 3).tolist()
        perm = [2, 0, 1]
        permuted = SeriesSpec(
            spec.q, 3,
            [(p.value, tuple(p.exponents[i] for i in perm)) for p in spec.upper_multi],
            [(p.value, tuple(p.exponents[i] for i in perm)) for p in spec.lower_multi],
            [spec.upper_single[i] for i in perm],
            [spec.lower_single[i] for i in perm],
        )
        v1 = evaluate(spec, x).value
        v2 = evaluate(permuted, [x[i] for i in perm]).value
        assert v2 == pytest.approx(v1, rel=1e-13)


def test_stopping_diagnostics():
    res = evaluate(H3, [0.1, 0.1])
    assert not res.truncated_flag
    assert res.last_shell_magnitude <= 1e-16 * abs(res.value)


def test_truncated_flag():
    res = evaluate(SeriesSpec(0.5, 1), [0.5], EvalConfig(n_max_per_index=5))
    assert res.truncated_flag
    assert res.shells_used == 6


def test_divergent_raises():
    with pytest.raises(NonConvergent):
        evaluate(SeriesSpec(0.5, 1), [3.0])


def test_shift_state_rescales_variables():
    shifted = evaluate(H3, [0.1, 0.1], shift=ShiftState((2.0, 0.5))).value
    assert shifted == pytest.approx(evaluate(H3, [0.1 * 0.25, 0.1 * 0.5**0.5]).value, rel=1e-14)


def test_param_override_matches_with_value():
    ref = ParamRef("lower_multi", 0)
    v1 = evaluate(H3, [0.1, -0.1], shift=ShiftState(param_overrides=[(ref, 0.35)])).value
    assert v1 == evaluate(H3.with_value(ref, 0.35), [0.1, -0.1]).value


def test_extended_precision():
    spec = SeriesSpec(0.5, 1, upper_single=[[(0.3, 1)]])
    val = evaluate(spec, [0.25], EXT).value
    with mp.workdps(40):
        ref = mp.qp(mp.mpf(0.3) * mp.mpf(0.25), 0.5) / mp.qp(0.25, 0.5)
        assert abs(val - ref) < mp.mpf("1e-30")


# -- variable derivative -----------------------------------------------------


@pytest.mark.parametrize("x", [0.25, -0.3, 0.05])
def test_variable_derivative_is_jackson(x):
    spec = SeriesSpec(0.5, 1)
    f = lambda t: evaluate(spec, [t]).value  # noqa: E731
    assert variable_derivative(spec, [x], 0) == pytest.approx(qcore.jackson_derivative(f, x, 0.5), rel=1e-10)


def test_variable_derivative_jackson_general_n1():
    rng = np.random.default_rng(11)
    for _ in range(10):
        spec = random_spec(rng, 1)
        x = float(rng.uniform(0.05, 0.2))
        f = lambda t: evaluate(spec, [t]).value  # noqa: E731
        jd = qcore.jackson_derivative(f, x, spec.q)
        assert variable_derivative(spec, [x], 0) == pytest.approx(jd, rel=1e-9, abs=1e-12)


def test_variable_derivative_at_origin():
    spec = SeriesSpec(0.5, 1, upper_single=[[(0.3, 1)]])
    assert variable_derivative(spec, [0.0], 0) == pytest.approx(omega(spec, (1,)) / (1 - 0.5), rel=1e-15)


def test_variable_derivative_h3_brute():
    x = [0.1, -0.07]
    brute = oracles.naive_sum(H3, x, 30, weight=lambda s, q: oracles.bracket(s[1], q)) / x[1]
    assert variable_derivative(H3, x, 1) == pytest.approx(float(brute), rel=1e-12)


# -- weighted evaluate -------------------------------------------------------


def test_weighted_zero_row():
    assert weighted_evaluate(H3, [0.1, 0.1], 0, (0, 0), ()) == 0


def test_weighted_unit_row():
    x = [0.1, 0.12]
    assert weighted_evaluate(H3, x, 1, (0, 1)) == pytest.approx(x[1] * variable_derivative(H3, x, 1), rel=1e-14)


def test_weighted_h3_brute():
    x = [0.1, 0.1]

    def w(s, q):
        return oracles.bracket(2 * s[0], q) * q ** s[1]

    brute = oracles.naive_sum(H3, x, 30, weight=w)
    assert weighted_evaluate(H3, x, 0, (2, 1), (1,)) == pytest.approx(float(brute), rel=1e-12)


def test_weighted_rejects_target_in_prefix():
    with pytest.raises(ValueError):
        weighted_evaluate(H3, [0.1, 0.1], 0, (2, 1), (0,))


def test_cyclic_family_recombines():
    rng = np.random.default_rng(5)
    for _ in range(5):
        spec = random_spec(rng, 3)
        row = (0.5, 2.0, 1.0)
        x = rng.uniform(-0.15, 0.15, 3).tolist()
        total = 0.0
        for k in range(3):
            for prefix in qcore.cyclic_prefixes(k, 3):
                total += weighted_evaluate(spec, x, k, row, prefix)
        direct = oracles.naive_sum(spec, x, 16, weight=lambda s, q: oracles.bracket(sum(r * v for r, v in zip(row, s)), q))
        assert total / 3 == pytest.approx(float(direct), rel=1e-11, abs=1e-14)
