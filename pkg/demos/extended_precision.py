"""
Extended precision
==================

The same evaluation and verification run on mpmath numbers. The closed form
and the definition then agree far below double precision.
"""

import mpmath as mp

from qlauricella import EvalConfig, SeriesSpec, evaluate, paramderiv

cfg = EvalConfig(precision="extended", dps=40, eps_term=1e-34, eps_prod=1e-38)
spec = SeriesSpec(0.5, 2, upper_multi=[(0.45, (0.5, 2))], lower_multi=[(-0.6, (1, 0.5))])
x = (0.05, -0.04)

res = evaluate(spec, x, cfg)
print("F =", mp.nstr(res.value, 35))
print("double:", evaluate(spec, x).value)

for ref in spec.params():
    rep = paramderiv.verify(spec, x, ref, cfg)
    print(f"{ref}: {mp.nstr(rep.rhs, 30)}  rel diff {mp.nstr(rep.rel_diff, 3)}")
