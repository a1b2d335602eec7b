"""Group rings R_n = (Z/p^m)[Gamma_n] and truncated power series in Z_p[[T]].

Elements of R_n are stored in the basis T^i, T = gamma - 1, for the fixed
generator gamma of the cyclic group of order p^n.  The coefficient modulus
p^m defaults to p^n (with m = 1 at level 0 so that the trivial group ring is
Z/p rather than the zero ring).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb

from .errors import (
    InsufficientTruncation,
    LevelMismatch,
    OddPrimeOnly,
    OrderTooSmall,
    OutOfRange,
    PrecisionExhausted,
)
from .padic import PadicNumber


def default_modulus_exp(n: int) -> int:
    return max(n, 1)


def _check_prime(p: int) -> None:
    if p == 2:
        raise OddPrimeOnly("p = 2 is not supported")
    if p < 2:
        raise ValueError(f"{p} is not a prime")


@lru_cache(maxsize=None)
def _relation_tail(p: int, n: int, m: int) -> tuple[int, ...]:
    # T^N = -sum_{0<i<N} C(N, i) T^i  modulo p^m, N = p^n
    N = p**n
    q = p**m
    return (0,) + tuple((-comb(N, i)) % q for i in range(1, N))


def _reduce_poly(poly: list[int], p: int, n: int, m: int) -> tuple[int, ...]:
    N = p**n
    q = p**m
    tail = _relation_tail(p, n, m)
    poly = [c % q for c in poly]
    for d in range(len(poly) - 1, N - 1, -1):
        c = poly[d]
        if c:
            poly[d] = 0
            base = d - N
            for i, t in enumerate(tail):
                if t:
                    poly[base + i] = (poly[base + i] + c * t) % q
    out = poly[:N] + [0] * (N - len(poly))
    return tuple(out)


@dataclass(frozen=True)
class GroupRingElement:
    p: int
    n: int
    coeffs: tuple
    m: int = -1

    def __post_init__(self):
        _check_prime(self.p)
        if self.n < 0:
            raise ValueError("level must be non-negative")
        m = default_modulus_exp(self.n) if self.m < 0 else self.m
        object.__setattr__(self, "m", m)
        N = self.p**self.n
        cs = list(self.coeffs)
        if len(cs) > N:
            cs = list(_reduce_poly(cs, self.p, self.n, m))
        q = self.p**m
        cs = tuple(int(c) % q for c in cs) + (0,) * (N - len(cs))
        object.__setattr__(self, "coeffs", cs)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, p, n, m=-1):
        return cls(p, n, (), m)

    @classmethod
    def one(cls, p, n, m=-1):
        return cls(p, n, (1,), m)

    @classmethod
    def T(cls, p, n, m=-1):
        if p**n == 1:
            return cls(p, n, (0,), m)
        return cls(p, n, (0, 1), m)

    @classmethod
    def from_gamma(cls, p, n, gcoeffs, m=-1):
        """Build from coefficients a_j of gamma^j, j < p^n."""
        N = p**n
        a = [0] * N
        for j, c in enumerate(gcoeffs):
            a[j % N] += c
        # gamma^j = sum_i C(j, i) T^i
        out = [sum(a[j] * comb(j, i) for j in range(i, N)) for i in range(N)]
        return cls(p, n, tuple(out), m)

    @classmethod
    def gamma_power(cls, p, n, k, m=-1):
        N = p**n
        g = [0] * N
        g[k % N] = 1
        return cls.from_gamma(p, n, g, m)

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["p"]), int(obj["n"]), tuple(int(c) for c in obj["coeffs"]), int(obj.get("m", -1)))

    def to_json(self):
        out = {"p": self.p, "n": self.n, "coeffs": list(self.coeffs)}
        if self.m != default_modulus_exp(self.n):
            out["m"] = self.m
        return out

    # -- views --------------------------------------------------------------

    @property
    def modulus(self) -> int:
        return self.p**self.m

    @property
    def order(self) -> int:
        return self.p**self.n

    def to_gamma(self) -> tuple[int, ...]:
        """Coefficients in the basis gamma^j."""
        N, q = self.order, self.modulus
        # T^i = sum_j C(i, j) (-1)^{i-j} gamma^j
        out = [0] * N
        for i, c in enumerate(self.coeffs):
            if c:
                for j in range(i + 1):
                    out[j] += c * comb(i, j) * (-1) ** (i - j)
        return tuple(x % q for x in out)

    def augmentation(self) -> int:
        return self.coeffs[0]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    # -- arithmetic -----------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, GroupRingElement):
            raise TypeError("expected a GroupRingElement")
        if (self.p, self.n, self.m) != (other.p, other.n, other.m):
            raise LevelMismatch(f"R({self.p},{self.n},{self.m}) vs R({other.p},{other.n},{other.m})")

    def _lift_scalar(self, other):
        if isinstance(other, int):
            return GroupRingElement(self.p, self.n, (other,), self.m)
        return other

    def __add__(self, other):
        other = self._lift_scalar(other)
        self._check(other)
        return GroupRingElement(self.p, self.n, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.m)

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElement(self.p, self.n, tuple(-a for a in self.coeffs), self.m)

    def __sub__(self, other):
        return self + (-self._lift_scalar(other))

    def __rsub__(self, other):
        return self._lift_scalar(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, int):
            return GroupRingElement(self.p, self.n, tuple(a * other for a in self.coeffs), self.m)
        self._check(other)
        N = self.order
        prod = [0] * (2 * N - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        prod[i + j] += a * b
        return GroupRingElement(self.p, self.n, _reduce_poly(prod, self.p, self.n, self.m), self.m)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = GroupRingElement.one(self.p, self.n, self.m)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def involution(self) -> "GroupRingElement":
        """The involution gamma -> gamma^{-1}."""
        g = self.to_gamma()
        N = self.order
        return GroupRingElement.from_gamma(self.p, self.n, [g[(-j) % N] for j in range(N)], self.m)

    def act(self, k: int) -> "GroupRingElement":
        """Multiplication by gamma^k."""
        g = self.to_gamma()
        N = self.order
        return GroupRingElement.from_gamma(self.p, self.n, [g[(j - k) % N] for j in range(N)], self.m)

    def with_modulus(self, m: int) -> "GroupRingElement":
        if m > self.m:
            raise PrecisionExhausted("cannot raise the coefficient modulus")
        return GroupRingElement(self.p, self.n, self.coeffs, m)

    def __repr__(self):
        terms = [f"{c}*T^{i}" if i else str(c) for i, c in enumerate(self.coeffs) if c]
        return f"R_{self.n}[{self.p}^{self.m}]({' + '.join(terms) or '0'})"


def gr_add(f: GroupRingElement, g: GroupRingElement) -> GroupRingElement:
    return f + g


def gr_mul(f: GroupRingElement, g: GroupRingElement) -> GroupRingElement:
    return f * g


def norm_element(p: int, n: int, m: int = -1) -> GroupRingElement:
    _check_prime(p)
    return GroupRingElement.from_gamma(p, n, [1] * p**n, m)


def derivative_operator(p: int, n: int, k: int, m: int = -1) -> GroupRingElement:
    """D^(k) = (-1)^k gamma^{-k} sum_i C(i, k) gamma^i."""
    _check_prime(p)
    if k < 0 or k > p:
        raise OutOfRange(f"k={k} must lie in [0, {p}]")
    N = p**n
    g = [0] * N
    sign = (-1) ** k
    for i in range(N):
        g[(i - k) % N] += sign * comb(i, k)
    return GroupRingElement.from_gamma(p, n, g, m)


# -- augmentation ideal powers --------------------------------------------------


def _xgcd(a: int, b: int):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


class _Lattice:
    """Hermite normal form of a full-rank sublattice L with q*Z^N <= L <= Z^N.

    Row i has its pivot in column i; pivots are powers of p dividing q.
    """

    def __init__(self, N: int, q: int):
        self.N = N
        self.q = q
        self.rows = [[q if j == i else 0 for j in range(N)] for i in range(N)]

    def copy(self):
        other = _Lattice.__new__(_Lattice)
        other.N, other.q = self.N, self.q
        other.rows = [r[:] for r in self.rows]
        return other

    def insert(self, v):
        q = self.q
        v = [x % q for x in v]
        for i in range(self.N):
            a = v[i]
            if a == 0:
                continue
            row = self.rows[i]
            b = row[i]
            if a % b == 0:
                c = a // b
                v = [(x - c * y) % q for x, y in zip(v, row)]
                continue
            g, s, t = _xgcd(b, a)
            new = [(s * y + t * x) % q for x, y in zip(v, row)]
            new[i] = g
            bg, ag = b // g, a // g
            v = [(ag * y - bg * x) % q for x, y in zip(v, row)]
            # (row, v) -> (new, v) is unimodular, so the span is unchanged
            self.rows[i] = new

    def reduce(self, v):
        q = self.q
        v = [x % q for x in v]
        for i in range(self.N):
            row = self.rows[i]
            c = v[i] // row[i]
            if c:
                v = [(x - c * y) % q for x, y in zip(v, row)]
        return v

    def contains(self, v) -> bool:
        return not any(self.reduce(v))

    def is_everything(self) -> bool:
        return all(self.rows[i][i] == 1 for i in range(self.N))

    def is_trivial(self) -> bool:
        return all(self.rows[i][i] == self.q for i in range(self.N))


@lru_cache(maxsize=None)
def _t_powers(p: int, n: int, m: int, upto: int) -> tuple[tuple[int, ...], ...]:
    out = [GroupRingElement.one(p, n, m)]
    t = GroupRingElement.T(p, n, m)
    for _ in range(upto):
        out.append(out[-1] * t)
    return tuple(x.coeffs for x in out)


_ideal_cache: dict = {}


def _ideal_lattice(p: int, n: int, m: int, k: int) -> _Lattice:
    """The lattice of J^k + p^m Z^N in coefficient space."""
    key = (p, n, m, k)
    lat = _ideal_cache.get(key)
    if lat is not None:
        return lat
    N = p**n
    lat = _Lattice(N, p**m)
    for c in _t_powers(p, n, m, k + N)[k:k + N]:
        lat.insert(c)
    _ideal_cache[key] = lat
    return lat


def in_ideal_power(f: GroupRingElement, k: int) -> bool:
    """Membership of f in J^k (J the augmentation ideal)."""
    if k <= 0:
        return True
    return _ideal_lattice(f.p, f.n, f.m, k).contains(f.coeffs)


def _ord_J_group(f: GroupRingElement):
    if f.is_zero():
        return math.inf
    k = 0
    while True:
        lat = _ideal_lattice(f.p, f.n, f.m, k + 1)
        if not lat.contains(f.coeffs):
            return k
        if lat.is_trivial():
            # J^{k+1} vanishes but f does not; cannot happen for nonzero f
            raise AssertionError("augmentation filtration did not separate a nonzero element")
        k += 1


def graded_coefficient(f: GroupRingElement, k: int) -> PadicNumber:
    """Coefficient c with f = c T^k modulo J^{k+1}, known modulo p^e.

    Requires f in J^k.  The precision e is the additive order of the class of
    T^k in J^k / J^{k+1}.
    """
    if not in_ideal_power(f, k):
        raise OrderTooSmall(f"element is not in J^{k}")
    p, n, m = f.p, f.n, f.m
    N = p**n
    q = p**m
    lat = _Lattice(N + 1, q)
    powers = _t_powers(p, n, m, k + 1 + N)
    for c in powers[k + 1:k + 1 + N]:
        lat.insert(list(c) + [0])
    lat.insert(list(powers[k]) + [1])
    rem = lat.reduce(list(f.coeffs) + [0])
    if any(rem[:N]):
        raise AssertionError("graded reduction left a residue outside the T^k line")
    e = 0
    piv = lat.rows[N][N]
    while piv > 1:
        piv //= p
        e += 1
    if e == 0:
        return PadicNumber.zero(p, 0)
    return PadicNumber._from_parts(p, 0, -rem[N], e)


# -- truncated Iwasawa series -------------------------------------------------------


@dataclass(frozen=True)
class GradedValue:
    """coefficient * T^exponent read in (J^exponent / J^{exponent+1}) tensor Q."""

    exponent: int | float
    coefficient: PadicNumber

    def __mul__(self, other):
        if isinstance(other, GradedValue):
            return GradedValue(self.exponent + other.exponent, self.coefficient * other.coefficient)
        return GradedValue(self.exponent, self.coefficient * other)

    __rmul__ = __mul__

    def to_json(self):
        return {"exponent": self.exponent if self.exponent != math.inf else "inf",
                "coefficient": self.coefficient.to_json()}


@dataclass(frozen=True)
class IwasawaSeries:
    p: int
    deg: int
    prec: int
    coeffs: tuple

    def __post_init__(self):
        _check_prime(self.p)
        cs = []
        for c in self.coeffs:
            if not isinstance(c, PadicNumber):
                c = PadicNumber.from_rational(c, self.p, self.prec)
            cs.append(c.with_prec(self.prec))
        if len(cs) > self.deg + 1:
            raise ValueError("more coefficients than the truncation degree allows")
        cs += [PadicNumber.zero(self.p, self.prec)] * (self.deg + 1 - len(cs))
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_ints(cls, p, coeffs, prec=20, deg=None):
        deg = len(coeffs) - 1 if deg is None else deg
        return cls(p, deg, prec, tuple(coeffs))

    @classmethod
    def from_json(cls, obj):
        p = int(obj["p"])
        prec = int(obj["prec"])
        cs = []
        for c in obj["coeffs"]:
            cs.append(PadicNumber.from_json(c) if isinstance(c, dict) else PadicNumber.from_rational(c, p, prec))
        return cls(p, int(obj["deg"]), prec, tuple(cs))

    def to_json(self):
        return {"p": self.p, "deg": self.deg, "prec": self.prec, "coeffs": [c.to_json() for c in self.coeffs]}

    def augmentation(self) -> PadicNumber:
        return self.coeffs[0]

    def __add__(self, other):
        if (self.p, self.deg) != (other.p, other.deg):
            raise LevelMismatch("series truncations differ")
        return IwasawaSeries(self.p, self.deg, min(self.prec, other.prec),
                             tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, other):
        if (self.p, self.deg) != (other.p, other.deg):
            raise LevelMismatch("series truncations differ")
        prec = min(self.prec, other.prec)
        out = [PadicNumber.zero(self.p, prec)] * (self.deg + 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs[: self.deg + 1 - i]):
                out[i + j] = out[i + j] + a * b
        return IwasawaSeries(self.p, self.deg, prec, tuple(out))


def ord_J(f):
    """Largest k with f in J^k; math.inf for zero.

    For a truncated series this is the T-adic valuation read at the
    coefficient precision, so a series whose coefficients all vanish to that
    precision reports infinity.
    """
    if isinstance(f, GroupRingElement):
        return _ord_J_group(f)
    if isinstance(f, IwasawaSeries):
        for i, c in enumerate(f.coeffs):
            if not c.is_zero():
                return i
        return math.inf
    raise TypeError(f"ord_J is not defined for {type(f).__name__}")


def project_mu(f: IwasawaSeries, n: int, m: int = -1) -> GroupRingElement:
    """The map Z_p[[T]] -> R_n sending T to gamma_n - 1."""
    N = f.p**n
    if f.deg < N:
        raise InsufficientTruncation(f"truncation degree {f.deg} < p^n = {N}")
    m = default_modulus_exp(n) if m < 0 else m
    ints = []
    for c in f.coeffs:
        if not c.is_zero() and c.val < 0:
            raise ValueError("series coefficients must be integral")
        if c.prec < m:
            raise PrecisionExhausted(f"coefficient known only modulo {f.p}^{c.prec}")
        ints.append(c.residue(m))
    return GroupRingElement(f.p, n, _reduce_poly(ints, f.p, n, m), m)


def project_pi(f: GroupRingElement, m: int | None = None) -> GroupRingElement:
    """The projection R_{n+1} -> R_n, gamma_{n+1} -> gamma_n.

    The coefficient modulus follows the level unless f carries a custom one.
    """
    if f.n == 0:
        raise OutOfRange("no level below 0")
    if m is None:
        m = default_modulus_exp(f.n - 1) if f.m == default_modulus_exp(f.n) else f.m
    if m > f.m:
        raise PrecisionExhausted("cannot raise the coefficient modulus")
    N = f.p ** (f.n - 1)
    g = f.to_gamma()
    out = [0] * N
    for j, c in enumerate(g):
        out[j % N] += c
    return GroupRingElement.from_gamma(f.p, f.n - 1, out, m)


def leading_image(f, nu: int) -> GradedValue:
    """Image of f in J^nu / J^{nu+1}."""
    o = ord_J(f)
    if o < nu:
        raise OrderTooSmall(f"ord_J = {o} < {nu}")
    if isinstance(f, IwasawaSeries):
        if nu > f.deg:
            raise InsufficientTruncation(f"degree {nu} exceeds truncation {f.deg}")
        return GradedValue(nu, f.coeffs[nu])
    return GradedValue(nu, graded_coefficient(f, nu))
