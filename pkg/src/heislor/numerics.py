"""Scalar backends: the exact field Q(sqrt3) and tolerance-governed floats.

Two kinds of scalars run through the whole library.  Exact computations
(canonical representatives, curvature tables, signature counts) use
:class:`QSqrt3`, numbers of the form a + b*sqrt(3) with rational a, b.
Everything touched by eigendecompositions or hyperbolic normalization uses
plain floats with an explicit tolerance.  A certified midpoint bisection
solver lives here as well.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Callable, Union

EXACT = "exact"
APPROX = "approx"
BACKENDS = (EXACT, APPROX)

#: default tolerance for float sign classification
DEFAULT_TOL = 1e-9
#: default residual bound for bisection roots
ROOT_EPS = 1e-12

_SQRT3_FLOAT = math.sqrt(3.0)

RationalLike = Union[int, Fraction]


class SqrtOfNegative(ArithmeticError):
    """Square root requested for a value below -tol."""


class SqrtUnsupportedExact(ArithmeticError):
    """Square root of an exact scalar that is not a perfect square in Q(sqrt3)."""


class NoSignChange(ValueError):
    """Bisection bracket endpoints do not straddle a root."""


class NoConvergence(RuntimeError):
    """Iteration budget exhausted before the residual target was met."""


def _fraction_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None."""
    if q < 0:
        return None
    num = math.isqrt(q.numerator)
    den = math.isqrt(q.denominator)
    if num * num == q.numerator and den * den == q.denominator:
        return Fraction(num, den)
    return None


class QSqrt3:
    """An element a + b*sqrt(3) of the real quadratic field Q(sqrt3).

    Immutable and hashable; arithmetic is exact.  Mixing with floats is
    deliberately not supported so that exact data cannot be contaminated
    silently -- convert with :func:`float` at the boundary instead.
    """

    __slots__ = ("a", "b")

    def __init__(self, a: RationalLike = 0, b: RationalLike = 0) -> None:
        object.__setattr__(self, "a", Fraction(a))
        object.__setattr__(self, "b", Fraction(b))

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("QSqrt3 is immutable")

    # -- construction ------------------------------------------------------

    @classmethod
    def coerce(cls, x: "QSqrt3 | RationalLike") -> "QSqrt3":
        if isinstance(x, QSqrt3):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to QSqrt3")

    @classmethod
    def parse(cls, text: str) -> "QSqrt3":
        """Parse strings like '1/2', '-2+sqrt3' or '1/2-3/4*sqrt3'."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty exact scalar")
        a = Fraction(0)
        b = Fraction(0)
        for term in re.findall(r"[+-]?[^+-]+", s):
            if "sqrt3" in term:
                coef = term[: term.index("sqrt3")].rstrip("*")
                if coef in ("", "+"):
                    b += 1
                elif coef == "-":
                    b -= 1
                else:
                    b += Fraction(coef)
            else:
                a += Fraction(term)
        return cls(a, b)

    # -- presentation ------------------------------------------------------

    def format(self) -> str:
        """Canonical string form, inverse of :meth:`parse`."""
        if self.b == 0:
            return str(self.a)
        if self.b == 1:
            root = "sqrt3"
        elif self.b == -1:
            root = "-sqrt3"
        else:
            root = f"{self.b}*sqrt3"
        if self.a == 0:
            return root
        sign = "+" if self.b > 0 else ""
        return f"{self.a}{sign}{root}"

    def __repr__(self) -> str:
        return f"QSqrt3({self.a!s}, {self.b!s})"

    def __str__(self) -> str:
        return self.format()

    # -- ring/field structure ---------------------------------------------

    def __add__(self, other):
        try:
            o = QSqrt3.coerce(other)
        except TypeError:
            return NotImplemented
        return QSqrt3(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt3(-self.a, -self.b)

    def __sub__(self, other):
        try:
            o = QSqrt3.coerce(other)
        except TypeError:
            return NotImplemented
        return QSqrt3(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = QSqrt3.coerce(other)
        except TypeError:
            return NotImplemented
        return QSqrt3(self.a * o.a + 3 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = QSqrt3.coerce(other)
        except TypeError:
            return NotImplemented
        norm = o.a * o.a - 3 * o.b * o.b
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt3)")
        # multiply by the conjugate: 1/(a+b s3) = (a-b s3)/(a^2-3 b^2)
        return QSqrt3(
            (self.a * o.a - 3 * self.b * o.b) / norm,
            (self.b * o.a - self.a * o.b) / norm,
        )

    def __rtruediv__(self, other):
        return QSqrt3.coerce(other) / self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return QSqrt3(1) / self ** (-exponent)
        out = QSqrt3(1)
        base = self
        e = exponent
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conjugate(self) -> "QSqrt3":
        return QSqrt3(self.a, -self.b)

    # -- order structure ---------------------------------------------------

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def sign(self) -> int:
        """Exact sign in {-1, 0, +1}."""
        if self.b == 0:
            return (self.a > 0) - (self.a < 0)
        if self.a == 0:
            return (self.b > 0) - (self.b < 0)
        sa = 1 if self.a > 0 else -1
        sb = 1 if self.b > 0 else -1
        if sa == sb:
            return sa
        # opposite signs: compare a^2 with 3 b^2 (never equal for b != 0)
        return sa if self.a * self.a > 3 * self.b * self.b else sb

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, QSqrt3)):
            o = QSqrt3.coerce(other)
            return self.a == o.a and self.b == o.b
        return NotImplemented

    def __hash__(self) -> int:
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __lt__(self, other) -> bool:
        return (self - QSqrt3.coerce(other)).sign() < 0

    def __le__(self, other) -> bool:
        return (self - QSqrt3.coerce(other)).sign() <= 0

    def __gt__(self, other) -> bool:
        return (self - QSqrt3.coerce(other)).sign() > 0

    def __ge__(self, other) -> bool:
        return (self - QSqrt3.coerce(other)).sign() >= 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * _SQRT3_FLOAT

    def __abs__(self) -> "QSqrt3":
        return self if self.sign() >= 0 else -self

    # -- partial square root ------------------------------------------------

    def sqrt(self) -> "QSqrt3":
        """Exact square root when one exists in Q(sqrt3).

        Raises SqrtOfNegative for negative values, SqrtUnsupportedExact when
        the value is nonnegative but not a perfect square in the field.
        """
        sgn = self.sign()
        if sgn < 0:
            raise SqrtOfNegative(f"sqrt of negative exact scalar {self}")
        if sgn == 0:
            return QSqrt3(0)
        # solve (p + q sqrt3)^2 = a + b sqrt3, i.e. p^2+3q^2=a, 2pq=b
        if self.b == 0:
            p = _fraction_sqrt(self.a)
            if p is not None:
                return QSqrt3(p)
            q = _fraction_sqrt(self.a / 3)
            if q is not None:
                return QSqrt3(0, q)
            raise SqrtUnsupportedExact(f"{self} is not a square in Q(sqrt3)")
        disc = _fraction_sqrt(self.a * self.a - 3 * self.b * self.b)
        if disc is not None:
            for q2 in ((self.a + disc) / 6, (self.a - disc) / 6):
                q = _fraction_sqrt(q2)
                if q is not None and q != 0:
                    root = QSqrt3(self.b / (2 * q), q)
                    if root.sign() < 0:
                        root = -root
                    if root * root == self:
                        return root
        raise SqrtUnsupportedExact(f"{self} is not a square in Q(sqrt3)")


ZERO = QSqrt3(0)
ONE = QSqrt3(1)
SQRT3 = QSqrt3(0, 1)

NEGATIVE, ZEROCLASS, POSITIVE = -1, 0, 1


def sign_with_tol(x: float, tol: float = DEFAULT_TOL) -> int:
    """Total sign classification of a float: |x| <= tol counts as zero."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    if abs(x) <= tol:
        return ZEROCLASS
    return POSITIVE if x > 0 else NEGATIVE


def approx_sqrt(x: float, tol: float = DEFAULT_TOL) -> float:
    """Float square root with values in [-tol, 0] clamped to zero."""
    if x < -tol:
        raise SqrtOfNegative(f"sqrt of negative value {x}")
    return math.sqrt(x) if x > 0 else 0.0


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    eps: float = ROOT_EPS,
    max_iter: int = 200,
) -> float:
    """Deterministic midpoint bisection on a sign-changing bracket.

    Returns s in [lo, hi] with |f(s)| <= eps.  The bracket must satisfy
    f(lo)*f(hi) <= 0; endpoints whose residual already meets eps are
    returned as-is.
    """
    if not lo < hi:
        raise ValueError(f"invalid bracket [{lo}, {hi}]")
    flo, fhi = f(lo), f(hi)
    if abs(flo) <= eps:
        return lo
    if abs(fhi) <= eps:
        return hi
    if flo * fhi > 0:
        raise NoSignChange(f"f({lo})={flo} and f({hi})={fhi} have equal sign")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if abs(fmid) <= eps:
            return mid
        if flo * fmid < 0:
            hi = mid
        else:
            lo, flo = mid, fmid
    raise NoConvergence(f"no root with residual <= {eps} after {max_iter} bisections")
