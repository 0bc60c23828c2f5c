"""
Evaluating a q-Lauricella series
================================

Build a two-variable series, sum it, and compare against closed forms.
"""

import numpy as np

from qlauricella import EvalConfig, SeriesSpec, evaluate, qcore

# With no parameters at all the series is the q-exponential 1/(x;q)_inf.
spec = SeriesSpec(q=0.5, n_vars=1)
res = evaluate(spec, [0.25])
print("e_q(0.25)       ", res.value, "shells:", res.shells_used)
print("1/(0.25;0.5)_inf", 1 / qcore.q_pochhammer(0.25, 0.5))

# One upper parameter gives the q-binomial theorem.
spec = SeriesSpec(q=0.5, n_vars=1, upper_single=[[(0.3, 1)]])
print("q-binomial      ", evaluate(spec, [0.25]).value)
print("product form    ", qcore.q_pochhammer(0.075, 0.5) / qcore.q_pochhammer(0.25, 0.5))

# A genuinely multivariate series, with real exponents on the parameters.
spec = SeriesSpec(
    q=0.8,
    n_vars=2,
    upper_multi=[(0.45, (0.5, 2))],
    lower_multi=[(-0.6, (1, 0.5))],
    lower_single=[[(0.3, 0.5)], []],
)
for x in np.linspace(-0.15, 0.15, 5):
    r = evaluate(spec, [x, 0.1])
    print(f"x1={x:+.3f}  F={r.value:.15f}  shells={r.shells_used}")

# A tight cap is reported rather than hidden.
r = evaluate(SeriesSpec(0.5, 1), [0.5], EvalConfig(n_max_per_index=5))
print("truncated:", r.truncated_flag)
