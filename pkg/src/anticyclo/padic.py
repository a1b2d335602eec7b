"""Elements of Q_p carried at an explicit absolute precision.

A :class:`PadicNumber` stores ``unit * p**val`` known modulo ``p**prec``.  The
unit part is kept reduced modulo ``p**(prec - val)`` (the relative precision).
Zero is a flagged value (``unit == 0``) whose valuation is reported as
``math.inf``; it remembers the precision ``O(p**prec)`` to which it is known.

Arithmetic never invents digits: every result carries the precision that the
operands actually determine.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Rational

from .errors import DivisionByZero, HasseBoundWarning, NotOrdinary, OddPrimeOnly, PrecisionExhausted

DEFAULT_PRECISION = 20


def default_precision() -> int:
    """Working precision, overridable through ``ANTICYCLO_PRECISION``."""
    raw = os.environ.get("ANTICYCLO_PRECISION")
    if raw is None:
        return DEFAULT_PRECISION
    value = int(raw)
    if value < 1:
        raise ValueError("ANTICYCLO_PRECISION must be a positive integer")
    return value


def vp(x: int, p: int) -> int | float:
    """p-adic valuation of a rational number (``math.inf`` for 0)."""
    if isinstance(x, Fraction):
        if x == 0:
            return math.inf
        return vp(x.numerator, p) - vp(x.denominator, p)
    x = int(x)
    if x == 0:
        return math.inf
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


@dataclass(frozen=True, eq=False)
class PadicNumber:
    p: int
    val: int
    unit: int
    prec: int

    # -- construction -----------------------------------------------------

    @classmethod
    def _from_parts(cls, p: int, v: int, x: int, prec: int) -> "PadicNumber":
        # value x * p**v known modulo p**prec
        rel = prec - v
        if rel <= 0 or x % p**rel == 0:
            return cls(p, prec, 0, prec)
        k = 0
        while x % p == 0:
            x //= p
            k += 1
        val = v + k
        return cls(p, val, x % p ** (prec - val), prec)

    @classmethod
    def zero(cls, p: int, prec: int = DEFAULT_PRECISION) -> "PadicNumber":
        return cls(p, prec, 0, prec)

    @classmethod
    def from_rational(cls, value, p: int, prec: int = DEFAULT_PRECISION) -> "PadicNumber":
        """Embed an int, :class:`~fractions.Fraction` or ``"a/b"`` string into Q_p."""
        if p == 2:
            raise OddPrimeOnly("p = 2 is not supported")
        if isinstance(value, PadicNumber):
            if value.p != p:
                raise ValueError("prime mismatch")
            return value.with_prec(prec)
        if isinstance(value, str):
            value = Fraction(value)
        if isinstance(value, Integral):
            return cls._from_parts(p, 0, int(value), prec)
        if isinstance(value, Rational):
            value = Fraction(value)
            num, den = value.numerator, value.denominator
            dv = 0
            while den % p == 0:
                den //= p
                dv += 1
            rel = prec + dv
            if rel <= 0:
                return cls(p, prec, 0, prec)
            inv = pow(den, -1, p**rel)
            return cls._from_parts(p, -dv, num * inv, prec)
        raise TypeError(f"cannot build a p-adic number from {type(value).__name__}")

    @classmethod
    def from_json(cls, obj) -> "PadicNumber":
        """Read {"p","val","unit","prec"} or the digit form {"p","val","digits","prec"}."""
        p, prec = int(obj["p"]), int(obj["prec"])
        if obj["val"] == "inf":
            return cls.zero(p, prec)
        if "digits" in obj:
            unit = sum(int(d) * p**i for i, d in enumerate(obj["digits"]))
            if unit == 0:
                return cls.zero(p, prec)
        else:
            unit = int(obj["unit"])
        return cls._from_parts(p, int(obj["val"]), unit, prec)

    # -- inspection -------------------------------------------------------

    def is_zero(self) -> bool:
        return self.unit == 0

    def valuation(self) -> int | float:
        return math.inf if self.unit == 0 else self.val

    @property
    def relative_precision(self) -> int:
        return 0 if self.unit == 0 else self.prec - self.val

    def is_unit(self) -> bool:
        return self.unit != 0 and self.val == 0

    def lift(self) -> Fraction:
        """Rational representative ``unit * p**val`` (0 for the zero flag)."""
        if self.unit == 0:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.val

    def residue(self, k: int | None = None) -> int:
        """Integer representative modulo ``p**k`` (default: the full precision)."""
        k = self.prec if k is None else k
        if k > self.prec:
            raise PrecisionExhausted(f"value known only modulo {self.p}^{self.prec}")
        if self.unit == 0:
            return 0
        if self.val < 0:
            raise ValueError("value is not integral")
        return (self.unit * self.p**self.val) % self.p**k

    def digits(self) -> list[int]:
        """p-adic digits from ``p**val`` up to ``p**(prec-1)``."""
        if self.unit == 0:
            return []
        u, out = self.unit, []
        for _ in range(self.prec - self.val):
            out.append(u % self.p)
            u //= self.p
        return out

    def with_prec(self, prec: int) -> "PadicNumber":
        prec = min(prec, self.prec)
        if self.unit == 0:
            return PadicNumber(self.p, prec, 0, prec)
        return PadicNumber._from_parts(self.p, self.val, self.unit, prec)

    def to_json(self) -> dict:
        return {"p": self.p, "val": self.val, "unit": str(self.unit), "prec": self.prec}

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            if other.p != self.p:
                raise ValueError("prime mismatch")
            return other
        if isinstance(other, (Integral, Rational)):
            v = vp(Fraction(other), self.p)
            v = 0 if v == math.inf else v
            prec = max(self.prec, v + self.relative_precision)
            return PadicNumber.from_rational(other, self.p, prec)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = min(self.prec, other.prec)
        v = min(self.val, other.val)
        x = self.unit * self.p ** (self.val - v) + other.unit * self.p ** (other.val - v)
        return PadicNumber._from_parts(self.p, v, x, prec)

    __radd__ = __add__

    def __neg__(self):
        if self.unit == 0:
            return self
        return PadicNumber(self.p, self.val, (-self.unit) % self.p**self.relative_precision, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.unit == 0 or other.unit == 0:
            prec = min(self.prec + other.val, other.prec + self.val)
            return PadicNumber(self.p, prec, 0, prec)
        rel = min(self.relative_precision, other.relative_precision)
        val = self.val + other.val
        return PadicNumber(self.p, val, (self.unit * other.unit) % self.p**rel, val + rel)

    __rmul__ = __mul__

    def inverse(self) -> "PadicNumber":
        if self.unit == 0:
            raise DivisionByZero("inverse of a p-adic zero")
        rel = self.relative_precision
        return PadicNumber(self.p, -self.val, pow(self.unit, -1, self.p**rel), rel - self.val)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, e: int):
        if not isinstance(e, Integral):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        result = PadicNumber.from_rational(1, self.p, max(self.prec, 1) + abs(self.val) * e)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        if self.unit == 0:
            return f"O({self.p}^{self.prec})"
        q = self.p**self.relative_precision
        u = self.unit - q if self.unit > q // 2 else self.unit
        return f"{Fraction(u) * Fraction(self.p) ** self.val} + O({self.p}^{self.prec})"


def padic(value, p: int, prec: int = DEFAULT_PRECISION) -> PadicNumber:
    """Shorthand for :meth:`PadicNumber.from_rational`."""
    return PadicNumber.from_rational(value, p, prec)


def require_precision(x: PadicNumber, minimum: int = 1) -> PadicNumber:
    """Raise :class:`PrecisionExhausted` if ``x`` is an undetermined zero."""
    if x.unit == 0 and x.prec < minimum:
        raise PrecisionExhausted(f"result known only modulo {x.p}^{x.prec}")
    return x


def unit_root(a_p: int, p: int, prec: int = DEFAULT_PRECISION, check_hasse: bool = False) -> PadicNumber:
    """The unit root of ``X^2 - a_p X + p`` by Newton iteration from ``a_p``.

    Quadratic convergence: each step doubles the number of correct digits.
    """
    if p == 2:
        raise OddPrimeOnly("p = 2 is not supported")
    if a_p % p == 0:
        raise NotOrdinary(f"p={p} divides a_p={a_p}")
    if check_hasse and a_p * a_p > 4 * p:
        warnings.warn(f"|a_p|={abs(a_p)} exceeds the Hasse bound for p={p}", HasseBoundWarning)
    x, k = a_p % p, 1
    while k < prec:
        k = min(2 * k, prec)
        mod = p**k
        f = (x * x - a_p * x + p) % mod
        df = (2 * x - a_p) % mod
        x = (x - f * pow(df, -1, mod)) % mod
    return PadicNumber._from_parts(p, 0, x, prec)
