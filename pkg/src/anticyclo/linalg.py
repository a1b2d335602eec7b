"""Matrices over Z_p, Q_p and the group rings R_n.

Elimination over Z_p / Q_p pivots on an entry of minimal valuation (ties go to
the lowest row, then the lowest column).  Over R_n, which is not a domain, the
determinant is computed division-free with Berkowitz's algorithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

from .errors import InconsistentDimensions, NotAlternating, OddDimension, PrecisionExhausted
from .iwasawa import GroupRingElement
from .padic import PadicNumber, vp

INFINITE = math.inf

RINGS = ("Zp", "Qp", "Rn")


@dataclass(frozen=True)
class PMatrix:
    ring: str
    p: int
    entries: tuple
    prec: int = 20
    n: int = 0
    m: int = -1

    def __post_init__(self):
        if self.ring not in RINGS:
            raise ValueError(f"unknown ring tag {self.ring!r}")
        rows = tuple(tuple(r) for r in self.entries)
        if rows and len({len(r) for r in rows}) != 1:
            raise InconsistentDimensions("ragged matrix")
        conv = []
        for r in rows:
            conv.append(tuple(self._coerce(x) for x in r))
        object.__setattr__(self, "entries", tuple(conv))
        if self.ring == "Rn" and self.m < 0:
            object.__setattr__(self, "m", max(self.n, 1))

    def _coerce(self, x):
        if self.ring == "Rn":
            if isinstance(x, GroupRingElement):
                return x
            return GroupRingElement(self.p, self.n, (int(x),), self.m)
        if isinstance(x, PadicNumber):
            if self.ring == "Zp" and not x.is_zero() and x.val < 0:
                raise ValueError("non-integral entry in a Z_p matrix")
            return x
        x = PadicNumber.from_rational(x, self.p, self.prec)
        if self.ring == "Zp" and not x.is_zero() and x.val < 0:
            raise ValueError("non-integral entry in a Z_p matrix")
        return x

    # -- shape / constructors ----------------------------------------------------

    @property
    def nrows(self) -> int:
        return len(self.entries)

    @property
    def ncols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @property
    def shape(self):
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def _like(self, entries) -> "PMatrix":
        return PMatrix(self.ring, self.p, entries, self.prec, self.n, self.m)

    def zero_elem(self):
        if self.ring == "Rn":
            return GroupRingElement.zero(self.p, self.n, self.m)
        return PadicNumber.zero(self.p, self.prec)

    def one_elem(self):
        if self.ring == "Rn":
            return GroupRingElement.one(self.p, self.n, self.m)
        return PadicNumber.from_rational(1, self.p, self.prec)

    @classmethod
    def from_ints(cls, rows, p, prec=20, ring="Zp"):
        return cls(ring, p, rows, prec)

    @classmethod
    def identity(cls, size, p, prec=20, ring="Zp", n=0, m=-1):
        return cls(ring, p, [[1 if i == j else 0 for j in range(size)] for i in range(size)], prec, n, m)

    def transpose(self) -> "PMatrix":
        return self._like([[self.entries[i][j] for i in range(self.nrows)] for j in range(self.ncols)])

    T = property(transpose)

    def submatrix(self, rows, cols) -> "PMatrix":
        return self._like([[self.entries[i][j] for j in cols] for i in rows])

    def __add__(self, other):
        return self._like([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __neg__(self):
        return self._like([[-a for a in r] for r in self.entries])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PMatrix":
        return self._like([[a * c for a in r] for r in self.entries])

    def __matmul__(self, other):
        if isinstance(other, PMatrix):
            B = other.entries
        else:
            B = [list(r) for r in other]
        if self.ncols != len(B):
            raise InconsistentDimensions(f"{self.shape} @ {len(B)} rows")
        out = []
        cols = len(B[0]) if B else 0
        for r in self.entries:
            row = []
            for j in range(cols):
                acc = self.zero_elem()
                for k, a in enumerate(r):
                    acc = acc + a * B[k][j]
                row.append(acc)
            out.append(row)
        return self._like(out)

    def __rmatmul__(self, other):
        A = [list(r) for r in other]
        return self._like(A) @ self

    def equals(self, other) -> bool:
        if self.shape != other.shape:
            return False
        return all(a == b for r, s in zip(self.entries, other.entries) for a, b in zip(r, s))

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    # -- serialization ------------------------------------------------------------

    def to_json(self):
        def enc(x):
            if isinstance(x, GroupRingElement):
                return list(x.coeffs)
            return x.to_json()

        out = {"ring": self.ring, "p": self.p, "rows": self.nrows, "cols": self.ncols,
               "entries": [[enc(x) for x in r] for r in self.entries]}
        if self.ring == "Rn":
            out.update(n=self.n, m=self.m)
        else:
            out["prec"] = self.prec
        return out

    @classmethod
    def from_json(cls, obj, prec=None):
        ring = obj.get("ring", "Zp")
        p = int(obj["p"])
        prec = int(obj.get("prec", prec or 20))
        n = int(obj.get("n", 0))
        m = int(obj.get("m", -1))

        def dec(x):
            if ring == "Rn":
                if isinstance(x, list):
                    return GroupRingElement(p, n, tuple(int(c) for c in x), m)
                if isinstance(x, dict):
                    return GroupRingElement.from_json({"p": p, "n": n, **x})
                return int(x)
            if isinstance(x, dict):
                return PadicNumber.from_json(x)
            if isinstance(x, str):
                return PadicNumber.from_rational(x, p, prec)
            return x

        entries = [[dec(x) for x in r] for r in obj["entries"]]
        if "rows" in obj and int(obj["rows"]) != len(entries):
            raise InconsistentDimensions("declared row count does not match entries")
        return cls(ring, p, entries, prec, n, m)

    def __repr__(self):
        return f"PMatrix[{self.ring}, p={self.p}]({[list(r) for r in self.entries]})"


# -- determinants -----------------------------------------------------------------


def _padic_det(M: PMatrix) -> PadicNumber:
    size = M.nrows
    A = [list(r) for r in M.entries]
    det = M.one_elem()
    sign = 1
    for j in range(size):
        best, best_v = None, math.inf
        for i in range(j, size):
            v = A[i][j].valuation()
            if v < best_v:
                best, best_v = i, v
        if best is None:
            # whole column vanishes at precision: det is a multiple of the
            # accumulated pivots times this column's precision
            bound = min(A[i][j].prec for i in range(j, size))
            z = det * PadicNumber.zero(M.p, bound)
            return z
        if best != j:
            A[j], A[best] = A[best], A[j]
            sign = -sign
        piv = A[j][j]
        det = det * piv
        inv = piv.inverse()
        for i in range(j + 1, size):
            if A[i][j].is_zero():
                continue
            f = A[i][j] * inv
            A[i] = [a - f * b for a, b in zip(A[i], A[j])]
    return det if sign == 1 else -det


def berkowitz_det(A, zero, one):
    """Division-free determinant over a commutative ring."""
    size = len(A)
    if size == 0:
        return one
    C = [one, -A[0][0]]
    for r in range(1, size):
        R = A[r][:r]
        S = [A[i][r] for i in range(r)]
        t = [one, -A[r][r]]
        v = S
        for _ in range(r):
            acc = zero
            for a, b in zip(R, v):
                acc = acc + a * b
            t.append(-acc)
            nv = []
            for i in range(r):
                acc = zero
                for k in range(r):
                    acc = acc + A[i][k] * v[k]
                nv.append(acc)
            v = nv
        newC = []
        for i in range(r + 2):
            acc = zero
            for j in range(min(i, len(C) - 1) + 1):
                acc = acc + t[i - j] * C[j]
            newC.append(acc)
        C = newC
    d = C[size]
    return d if size % 2 == 0 else -d


def laplace_det(A, zero, one):
    """Cofactor expansion along the first row (small matrices only)."""
    size = len(A)
    if size == 0:
        return one
    acc = zero
    for j in range(size):
        if size == 1:
            return A[0][0]
        sub = [row[:j] + row[j + 1:] for row in A[1:]]
        term = A[0][j] * laplace_det(sub, zero, one)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def det(M: PMatrix):
    if not M.is_square():
        raise InconsistentDimensions(f"det of a {M.shape} matrix")
    if M.ring == "Rn":
        return berkowitz_det([list(r) for r in M.entries], M.zero_elem(), M.one_elem())
    if M.nrows == 0:
        return M.one_elem()
    return _padic_det(M)


def minor(M: PMatrix, i: int, j: int):
    """Determinant of M with row i and column j removed."""
    rows = [k for k in range(M.nrows) if k != i]
    cols = [k for k in range(M.ncols) if k != j]
    return det(M.submatrix(rows, cols))


def adjugate(M: PMatrix) -> PMatrix:
    if not M.is_square():
        raise InconsistentDimensions("adjugate of a non-square matrix")
    size = M.nrows
    out = [[None] * size for _ in range(size)]
    for i in range(size):
        for j in range(size):
            c = minor(M, i, j)
            out[j][i] = c if (i + j) % 2 == 0 else -c
    return M._like(out)


def _is_zero(x) -> bool:
    return x.is_zero()


def check_alternating(M: PMatrix) -> None:
    if not M.is_square():
        raise NotAlternating("non-square matrix")
    for i in range(M.nrows):
        if not _is_zero(M[i, i]):
            raise NotAlternating(f"nonzero diagonal entry at {i}")
        for j in range(i + 1, M.ncols):
            if not _is_zero(M[i, j] + M[j, i]):
                raise NotAlternating(f"entries ({i},{j}) and ({j},{i}) are not opposite")


def _pf(A, idx, zero, one):
    if not idx:
        return one
    first, rest = idx[0], idx[1:]
    acc = zero
    for pos, j in enumerate(rest):
        a = A[first][j]
        if a.is_zero():
            continue
        term = a * _pf(A, rest[:pos] + rest[pos + 1:], zero, one)
        acc = acc + term if pos % 2 == 0 else acc - term
    return acc


def pfaffian(M: PMatrix):
    """Pfaffian by expansion along the first row."""
    check_alternating(M)
    if M.nrows % 2:
        raise OddDimension(f"dimension {M.nrows} is odd")
    return _pf([list(r) for r in M.entries], tuple(range(M.nrows)), M.zero_elem(), M.one_elem())


def pfaffian_matching(M: PMatrix):
    """Pfaffian as a signed sum over perfect matchings (reference formula)."""
    check_alternating(M)
    size = M.nrows
    if size % 2:
        raise OddDimension(f"dimension {size} is odd")
    acc = M.zero_elem()
    for perm in permutations(range(size)):
        # canonical matchings: pairs increasing, first elements increasing
        pairs = [(perm[2 * k], perm[2 * k + 1]) for k in range(size // 2)]
        if any(a > b for a, b in pairs) or any(pairs[k][0] > pairs[k + 1][0] for k in range(len(pairs) - 1)):
            continue
        inv = sum(1 for a in range(size) for b in range(a + 1, size) if perm[a] > perm[b])
        term = M.one_elem()
        for a, b in pairs:
            term = term * M[a, b]
        acc = acc + term if inv % 2 == 0 else acc - term
    return acc


# -- Smith normal form over Z/p^N ------------------------------------------------------


@dataclass(frozen=True)
class SmithForm:
    """U * M * V = diag(p^a_1, ..., p^a_r, 0, ...) modulo p^prec."""

    p: int
    prec: int
    exponents: tuple  # a_i for the nonzero divisors, in increasing order
    shape: tuple
    U: tuple
    V: tuple

    @property
    def rank(self) -> int:
        return len(self.exponents)

    def divisors(self) -> list:
        size = min(self.shape)
        out = [PadicNumber._from_parts(self.p, a, 1, self.prec) for a in self.exponents]
        out += [PadicNumber.zero(self.p, self.prec)] * (size - len(out))
        return out


def _int_matrix(M: PMatrix):
    """Integer residues of a Z_p matrix modulo p^N, N the minimal precision."""
    if M.ring == "Rn":
        raise TypeError("Smith form is only available over Z_p")
    N = min((x.prec for r in M.entries for x in r), default=M.prec)
    if N < 1:
        raise PrecisionExhausted("entries carry no p-adic digits")
    A = []
    for r in M.entries:
        row = []
        for x in r:
            if not x.is_zero() and x.val < 0:
                raise ValueError("Smith form needs integral entries")
            row.append(x.residue(N))
        A.append(row)
    return A, N


def smith_int(A, p: int, N: int, strict: bool = False) -> SmithForm:
    """Smith form of an integer matrix over Z/p^N with minimal-valuation pivots."""
    q = p**N
    rows = len(A)
    cols = len(A[0]) if rows else 0
    A = [[x % q for x in r] for r in A]
    U = [[int(i == j) for j in range(rows)] for i in range(rows)]
    V = [[int(i == j) for j in range(cols)] for i in range(cols)]
    exps = []
    for t in range(min(rows, cols)):
        best, best_v = None, N
        for i in range(t, rows):
            for j in range(t, cols):
                if A[i][j]:
                    v = vp(A[i][j], p)
                    if v < best_v:
                        best, best_v = (i, j), v
        if best is None:
            break
        i, j = best
        if i != t:
            A[t], A[i] = A[i], A[t]
            U[t], U[i] = U[i], U[t]
        if j != t:
            for r in A:
                r[t], r[j] = r[j], r[t]
            for r in V:
                r[t], r[j] = r[j], r[t]
        pv = p**best_v
        u = A[t][t] // pv
        uinv = pow(u, -1, q)
        A[t] = [(x * uinv) % q for x in A[t]]
        U[t] = [(x * uinv) % q for x in U[t]]
        for i2 in range(t + 1, rows):
            c = A[i2][t] // pv
            if c:
                A[i2] = [(x - c * y) % q for x, y in zip(A[i2], A[t])]
                U[i2] = [(x - c * y) % q for x, y in zip(U[i2], U[t])]
        for j2 in range(t + 1, cols):
            c = A[t][j2] // pv
            if c:
                for r in A:
                    r[j2] = (r[j2] - c * r[t]) % q
                for r in V:
                    r[j2] = (r[j2] - c * r[t]) % q
        exps.append(best_v)
    if strict and len(exps) < min(rows, cols):
        raise PrecisionExhausted("an elementary divisor vanishes at the working precision")
    return SmithForm(p, N, tuple(exps), (rows, cols), tuple(map(tuple, U)), tuple(map(tuple, V)))


def smith_form(M: PMatrix, strict: bool = False) -> SmithForm:
    A, N = _int_matrix(M)
    return smith_int(A, M.p, N, strict)


def _centered(x: int, q: int) -> int:
    x %= q
    return x - q if x > q // 2 else x


def saturated_kernel(M: PMatrix) -> list[list[int]]:
    """Basis of the p-saturated kernel, as integer column vectors."""
    S = smith_form(M)
    q = M.p**S.prec
    cols = M.ncols
    return [[_centered(S.V[i][j], q) for i in range(cols)] for j in range(S.rank, cols)]


def coker_order(M: PMatrix, k: int | None = None):
    """Order of Z_p^rows / M Z_p^cols, or of its reduction modulo p^k."""
    S = smith_form(M)
    rows = M.nrows
    if k is None:
        if S.rank < rows:
            return INFINITE
        return M.p ** sum(S.exponents)
    if k > S.prec:
        raise PrecisionExhausted(f"entries are known only modulo {M.p}^{S.prec}")
    e = sum(min(a, k) for a in S.exponents) + k * (rows - S.rank)
    return M.p**e


def fitting_ideal(M: PMatrix) -> GroupRingElement:
    """Generator det(M) of Fitt_0 of the cokernel of a square presentation over R_n."""
    if M.ring != "Rn":
        raise TypeError("fitting_ideal expects a matrix over R_n")
    if not M.is_square():
        raise InconsistentDimensions("square presentation expected")
    return det(M)


def solve_mod(A, b, p: int, m: int):
    """One solution x of A x = b over Z/p^m, or None."""
    q = p**m
    rows = len(A)
    cols = len(A[0]) if rows else 0
    S = smith_int(A, p, m)
    c = [sum(S.U[i][k] * b[k] for k in range(rows)) % q for i in range(rows)]
    y = [0] * cols
    for i in range(rows):
        if i < S.rank:
            d = p ** S.exponents[i]
            if c[i] % d:
                return None
            y[i] = c[i] // d
        elif c[i]:
            return None
    return [sum(S.V[i][k] * y[k] for k in range(cols)) % q for i in range(cols)]


def kernel_mod(A, p: int, m: int):
    """Generators of {x : A x = 0} over Z/p^m."""
    q = p**m
    cols = len(A[0]) if A else 0
    S = smith_int(A, p, m)
    gens = []
    for j in range(cols):
        if j < S.rank:
            a = S.exponents[j]
            if a == 0:
                continue
            scale = p ** (m - a)
        else:
            scale = 1
        gens.append([(S.V[i][j] * scale) % q for i in range(cols)])
    return gens
