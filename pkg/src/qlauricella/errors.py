"""Exception hierarchy shared by every module of the package."""


class QLauricellaError(Exception):
    """Base class for all errors raised by qlauricella."""


class InvalidBase(QLauricellaError, ValueError):
    """The base q lies outside the open interval (0, 1)."""


class SingularPochhammer(QLauricellaError, ZeroDivisionError):
    """A Pochhammer factor that ends up in a denominator vanished."""


class NonConvergent(QLauricellaError, ArithmeticError):
    """An infinite product or series failed to settle within its caps."""


class ZeroPoint(QLauricellaError, ZeroDivisionError):
    """A Jackson difference quotient was requested at the origin."""


class ZeroParameter(ZeroPoint):
    """A parameter q-derivative was requested at a parameter value of 0."""


class DimensionMismatch(QLauricellaError, ValueError):
    """Vector arguments (exponents, indices, points) have inconsistent lengths."""


class SingularPrefactor(QLauricellaError, ZeroDivisionError):
    """The closed-form prefactor 1/(1 - p) is singular because p == 1."""


class SchemaError(QLauricellaError, ValueError):
    """A descriptor document failed validation.

    ``errors`` holds one human readable message per violation, each prefixed
    with the offending location (JSON path or line/column).
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors) if self.errors else "invalid descriptor")


class UnknownSuite(QLauricellaError, KeyError):
    """No built-in verification suite has the requested name."""
