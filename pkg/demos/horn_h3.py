"""
Horn's H3 in q-form
===================

H3 has one parameter of each kind. Its three derivatives are written by
hand in ``qlauricella.horn``; here they are checked against the definition
and against the generic expansion, and the q-shifted reading of the
b-derivative is shown to be off.
"""

from qlauricella import ParamRef, horn, paramderiv

p = horn.H3Params(a=0.3, b=0.2, c=0.7, q=0.5)
spec = horn.h3_spec(p)
z = (0.1, 0.1)

refs = {"a": ParamRef("upper_multi", 0), "b": ParamRef("upper_single", 0, 1), "c": ParamRef("lower_multi", 0)}
hand = {"a": horn.h3_deriv_a, "b": horn.h3_deriv_b, "c": horn.h3_deriv_c}

print(f"{'':3}{'definitional':>22}{'hand formula':>22}{'generic':>22}")
for name, ref in refs.items():
    d = paramderiv.eval_derivative_definitional(spec, z, ref)
    h = hand[name](p, z)
    g = paramderiv.eval_derivative_closed(spec, z, ref)
    print(f"{name:3}{d:22.15f}{h:22.15f}{g:22.15f}")

shifted = paramderiv.single_shift_reading(spec, z, refs["b"])
print("\nb-derivative read as z2 * D F(q z2):", shifted)
