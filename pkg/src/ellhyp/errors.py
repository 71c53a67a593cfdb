"""Exception hierarchy.

Every error raised by the numerical modules derives from :class:`EllHypError`.
The CLI maps :class:`NonConvergent` to exit code 4 and every other subclass to
exit code 3.
"""

from __future__ import annotations


class EllHypError(ArithmeticError):
    """Base class for numerical failures."""


class DomainError(EllHypError, ValueError):
    """An argument lies outside the domain of the operation."""


class NonConvergent(EllHypError):
    """A truncation or refinement budget ran out before the target was met."""


class NearSingular(DomainError):
    """Evaluation point is within the guard distance of a pole or zero."""


class SingularTerm(DomainError):
    """A series term has a vanishing denominator."""

    def __init__(self, n: int, factor: str = ""):
        self.n = n
        self.factor = factor
        msg = f"vanishing denominator in term n={n}"
        if factor:
            msg += f" ({factor})"
        super().__init__(msg)


class SingularPoint(DomainError):
    """An elliptic function was evaluated at one of its poles."""

    def __init__(self, u: complex, index: int | None = None):
        self.u = u
        self.index = index
        where = f" at k={index}" if index is not None else ""
        super().__init__(f"pole of the term ratio at u={u!r}{where}")


class Unbalanced(DomainError):
    """Series parameters violate the balancing condition."""

    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"balancing condition violated, relative residual {residual:.3e}")


class NotSimplePole(DomainError):
    """Two pole families of the beta integrand collide."""


class NoSeparatingContour(DomainError):
    """No circle of the requested radius separates the pole sequences."""


class OnCriticalLine(DomainError):
    """A parameter sits on the spiral q^R where the radius formulas jump."""

    def __init__(self, k: int, value: float):
        self.k = k
        self.value = value
        super().__init__(f"parameter {k} on the critical line (fractional part {value:.3e})")


class DegenerateLine(DomainError):
    """Line data cannot be inverted."""


class RationalDetected(DomainError):
    """The continued fraction expansion terminated."""

    def __init__(self, depth: int):
        self.depth = depth
        super().__init__(f"continued fraction terminates at depth {depth}")
