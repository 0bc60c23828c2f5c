"""
Parameter q-derivatives two ways
================================

The Jackson derivative with respect to a parameter can be taken straight
from its definition, or summed from the closed-form expansion. The two
should agree to rounding.
"""

from qlauricella import ParamRef, SeriesSpec, paramderiv

spec = SeriesSpec(
    q=0.5,
    n_vars=3,
    upper_multi=[(0.35, (1, 0.5, 2))],
    lower_multi=[(0.6, (1, 1, 0))],
    upper_single=[[(-0.4, 1)], [], [(0.2, 0.5)]],
)
x = (0.1, -0.05, 0.08)

for ref in spec.params():
    terms = paramderiv.expand_derivative(spec, ref)
    print(f"\nD[{ref}] F  ({len(terms)} terms)")
    for t in terms[:3]:
        print("   ", t.describe())
    if len(terms) > 3:
        print("    ...")
    rep = paramderiv.verify(spec, x, ref)
    print(f"    definitional {rep.lhs:+.15e}")
    print(f"    closed form  {rep.rhs:+.15e}   rel diff {rep.rel_diff:.1e}")

# a parameter whose exponents are all zero never enters the series
flat = SeriesSpec(0.5, 2, upper_multi=[(0.4, (0, 0))])
print("\ninactive parameter:", paramderiv.eval_derivative_closed(flat, (0.1, 0.1), ParamRef("upper_multi", 0)))
