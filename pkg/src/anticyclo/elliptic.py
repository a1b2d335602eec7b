"""Local data of an elliptic curve: point counts, ordinarity, formal logarithm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import AnomalousPrime, BadReduction, PrecisionExhausted, ZeroLogarithm
from .padic import PadicNumber, vp


@dataclass(frozen=True)
class CurveData:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    bad_primes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.discriminant == 0:
            raise ValueError("singular Weierstrass equation")

    @classmethod
    def short(cls, a, b):
        return cls(0, 0, 0, a, b)

    @classmethod
    def from_json(cls, obj):
        a = [int(x) for x in obj["a"]]
        if len(a) == 2:
            a = [0, 0, 0] + a
        if len(a) != 5:
            raise ValueError("curve needs [a1,a2,a3,a4,a6] or [a4,a6]")
        return cls(*a, bad_primes=tuple(obj.get("bad_primes", ())))

    def to_json(self):
        return {"a": list(self.ainvs)}

    @property
    def ainvs(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def has_good_reduction(self, q: int) -> bool:
        return self.discriminant % q != 0


def _legendre(a: int, q: int) -> int:
    a %= q
    if a == 0:
        return 0
    return 1 if pow(a, (q - 1) // 2, q) == 1 else -1


def count_points_scan(E: CurveData, q: int) -> int:
    """#E(F_q) by scanning every affine pair (x, y)."""
    a1, a2, a3, a4, a6 = E.ainvs
    n = 1
    for x in range(q):
        rhs = (x * x * x + a2 * x * x + a4 * x + a6) % q
        lin = (a1 * x + a3) % q
        for y in range(q):
            if (y * y + lin * y - rhs) % q == 0:
                n += 1
    return n


def count_points_legendre(E: CurveData, q: int) -> int:
    """#E(F_q), odd q: complete the square and sum Legendre symbols."""
    a1, a2, a3, a4, a6 = E.ainvs
    n = 1 + q
    for x in range(q):
        # (2y + a1 x + a3)^2 = 4(x^3 + a2 x^2 + a4 x + a6) + (a1 x + a3)^2
        d = 4 * (x * x * x + a2 * x * x + a4 * x + a6) + (a1 * x + a3) ** 2
        n += _legendre(d, q)
    return n


def count_points(E: CurveData, q: int, method: str = "auto") -> tuple[int, int]:
    """(#E(F_q), a_q) for a prime q of good reduction."""
    if not E.has_good_reduction(q):
        raise BadReduction(f"q={q} divides the discriminant {E.discriminant}")
    if method == "scan" or (method == "auto" and q == 2):
        n = count_points_scan(E, q)
    elif method in ("legendre", "auto"):
        if q == 2:
            raise ValueError("the Legendre count needs an odd prime")
        n = count_points_legendre(E, q)
    else:
        raise ValueError(f"unknown counting method {method!r}")
    a = q + 1 - n
    if a * a > 4 * q:
        raise AssertionError(f"Hasse bound violated: a_{q} = {a}")
    return n, a


def _trace(E, p: int) -> int:
    if isinstance(E, CurveData):
        return count_points(E, p)[1]
    return int(E)


def is_good_ordinary(E, p: int) -> bool:
    """E may be a CurveData or directly the trace a_p."""
    return _trace(E, p) % p != 0


def anomalous_check(E, p: int) -> bool:
    return (_trace(E, p) - 1) % p == 0


# -- points over Q_p ------------------------------------------------------------


@dataclass(frozen=True)
class LocalPoint:
    p: int
    x: PadicNumber | None = None
    y: PadicNumber | None = None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    @classmethod
    def infinity(cls, p):
        return cls(p)

    @classmethod
    def from_rationals(cls, p, x, y, prec):
        return cls(p, PadicNumber.from_rational(x, p, prec), PadicNumber.from_rational(y, p, prec))

    def on_curve(self, E: CurveData) -> bool:
        if self.is_infinity:
            return True
        a1, a2, a3, a4, a6 = E.ainvs
        x, y = self.x, self.y
        lhs = y * y + a1 * x * y + a3 * y
        rhs = x * x * x + a2 * x * x + a4 * x + a6
        return lhs == rhs

    def to_json(self):
        if self.is_infinity:
            return {"p": self.p, "infinity": True}
        return {"p": self.p, "x": self.x.to_json(), "y": self.y.to_json()}


def point_neg(E: CurveData, P: LocalPoint) -> LocalPoint:
    if P.is_infinity:
        return P
    return LocalPoint(P.p, P.x, -P.y - E.a1 * P.x - E.a3)


def point_add(E: CurveData, P: LocalPoint, Q: LocalPoint) -> LocalPoint:
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    a1, a2, a3, a4, a6 = E.ainvs
    x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
    dx = x2 - x1
    if dx.is_zero():
        s = y1 + y2 + a1 * x2 + a3
        if s.is_zero():
            return LocalPoint.infinity(P.p)
        den = 2 * y1 + a1 * x1 + a3
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / den
        nu = (-x1 * x1 * x1 + a4 * x1 + 2 * a6 - a3 * y1) / den
    else:
        lam = (y2 - y1) / dx
        nu = (y1 * x2 - y2 * x1) / dx
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return LocalPoint(P.p, x3, y3)


def point_mul(E: CurveData, k: int, P: LocalPoint) -> LocalPoint:
    if k < 0:
        return point_mul(E, -k, point_neg(E, P))
    R = LocalPoint.infinity(P.p)
    while k:
        if k & 1:
            R = point_add(E, R, P)
        P = point_add(E, P, P)
        k >>= 1
    return R


# -- formal group -----------------------------------------------------------------


def _mul_trunc(f, g, D):
    out = [0] * (D + 1)
    for i, a in enumerate(f):
        if a:
            for j in range(min(len(g), D + 1 - i)):
                out[i + j] += a * g[j]
    return out


@lru_cache(maxsize=64)
def formal_w(ainvs: tuple, D: int) -> tuple[int, ...]:
    """w(z) = z^3 + ... as an integer series modulo z^(D+1)."""
    a1, a2, a3, a4, a6 = ainvs
    w = [0] * (D + 1)
    for _ in range(D + 1):
        w2 = _mul_trunc(w, w, D)
        w3 = _mul_trunc(w2, w, D)
        new = [0] * (D + 1)
        if D >= 3:
            new[3] = 1
        for i in range(D + 1):
            if i + 1 <= D:
                new[i + 1] += a1 * w[i] + a4 * w2[i]
            if i + 2 <= D:
                new[i + 2] += a2 * w[i]
            new[i] += a3 * w2[i] + a6 * w3[i]
        if new == w:
            break
        w = new
    return tuple(w)


def _inv_series(f, D):
    c0 = Fraction(f[0])
    out = [Fraction(0)] * (D + 1)
    out[0] = 1 / c0
    for k in range(1, D + 1):
        acc = sum(Fraction(f[i]) * out[k - i] for i in range(1, min(k, len(f) - 1) + 1))
        out[k] = -acc / c0
    return out


@lru_cache(maxsize=64)
def invariant_differential(ainvs: tuple, D: int) -> tuple[int, ...]:
    """Coefficients b_k of omega = (sum b_k z^k) dz, k <= D."""
    a1, a2, a3, a4, a6 = ainvs
    w = formal_w(ainvs, D + 3)
    W = list(w[3:D + 4])  # w = z^3 W
    # w - z w' = z^3 (-2W - zW'), and zW' has coefficients k W_k
    num = [-(k + 2) * W[k] for k in range(D + 1)]
    z3W = [0, 0, 0] + W
    den_lin = [0] * (D + 1)
    den_lin[0] = -2
    if D >= 1:
        den_lin[1] += a1
    for k in range(D + 1):
        den_lin[k] += a3 * (z3W[k] if k < len(z3W) else 0)
    den = _mul_trunc(W, den_lin, D)
    q = _mul_trunc(num, _inv_series(den, D), D)
    out = []
    for c in q:
        c = Fraction(c)
        if c.denominator != 1:
            raise AssertionError("invariant differential has a non-integral coefficient")
        out.append(int(c))
    return tuple(out)


def log_coefficients(E: CurveData, D: int) -> list[Fraction]:
    """c_n with log(z) = sum_{n=1}^{D} c_n z^n."""
    b = invariant_differential(E.ainvs, D)
    return [Fraction(0)] + [Fraction(b[n - 1], n) for n in range(1, D + 1)]


def certified_degree(p: int, N: int, vz: int = 1) -> int:
    """Smallest D with n*vz - v_p(n) >= N for every n > D.

    Uses v_p(n) <= log_p(n); n*vz - log_p(n) is increasing for vz >= 1.
    """
    n = 1
    while n * vz - math.log(n, p) < N:
        n += 1
    return max(n - 1, 1)


def formal_log_z(E: CurveData, z: PadicNumber, N: int, degree: int | None = None) -> PadicNumber:
    """log of the point with formal parameter z, v(z) >= 1, to absolute precision N."""
    p = z.p
    if z.is_zero():
        return PadicNumber.zero(p, N)
    vz = z.valuation()
    if vz < 1:
        raise ValueError("formal parameter must lie in pZ_p")
    D = 2 * N if degree is None else degree
    if D < certified_degree(p, N, vz):
        raise PrecisionExhausted(f"series degree {D} does not certify precision {N}")
    coeffs = log_coefficients(E, D)
    acc = PadicNumber.zero(p, z.prec)
    zn = z
    for n in range(1, D + 1):
        c = coeffs[n]
        if c:
            acc = acc + zn * c
        zn = zn * z
    # the tail is O(p^N) by the certification above
    return acc.with_prec(N)


def point_from_z(E: CurveData, z: PadicNumber) -> LocalPoint:
    """The point (z/w, -1/w) of the kernel of reduction."""
    p = z.p
    if z.is_zero():
        return LocalPoint.infinity(p)
    vz = z.valuation()
    # w(z) has valuation 3 v(z); enough terms for relative precision rel(z)
    rel = z.relative_precision
    D = 3 + rel + 2
    w_s = formal_w(E.ainvs, D)
    w = PadicNumber.zero(p, z.prec + 3 * vz)
    zn = PadicNumber.from_rational(1, p, z.prec + D * vz)
    for k in range(D + 1):
        if w_s[k]:
            w = w + zn * w_s[k]
        zn = zn * z
    return LocalPoint(p, z / w, -w.inverse())


def formal_log(E: CurveData, p: int, P: LocalPoint, N: int, degree: int | None = None) -> PadicNumber:
    """log_omega(P) to absolute precision N."""
    if P.is_infinity:
        return PadicNumber.zero(p, N)
    npts, _ = count_points(E, p)
    if npts % p == 0:
        raise AnomalousPrime(f"p={p} divides #E(F_p)={npts}")
    Q = point_mul(E, npts, P)
    if Q.is_infinity:
        return PadicNumber.zero(p, N)
    z = -Q.x / Q.y
    if z.valuation() < 1:
        raise AssertionError("multiple of P is not in the kernel of reduction")
    lg = formal_log_z(E, z, N, degree) / npts
    if lg.prec < N:
        raise PrecisionExhausted(f"log known only modulo {p}^{lg.prec}; supply more digits")
    return lg.with_prec(N)


def coker_size_from_log(log_y: PadicNumber, p: int | None = None, a_p: int | None = None) -> int:
    """p^(v(log_y) - 1)."""
    p = log_y.p if p is None else p
    if a_p is not None and (a_p - 1) % p == 0:
        raise AnomalousPrime(f"a_p={a_p} is 1 mod {p}")
    if log_y.is_zero():
        raise ZeroLogarithm("logarithm vanishes at the working precision")
    v = log_y.valuation()
    if v < 1:
        raise ValueError(f"log has valuation {v}; logarithms of local points lie in pZ_p")
    return p ** (v - 1)


__all__ = [
    "CurveData", "LocalPoint", "count_points", "count_points_scan", "count_points_legendre",
    "is_good_ordinary", "anomalous_check", "point_add", "point_mul", "point_neg",
    "formal_log", "formal_log_z", "point_from_z", "coker_size_from_log", "vp",
]
