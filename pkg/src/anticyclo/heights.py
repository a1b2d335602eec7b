"""Derived height filtrations and the regulators built from them.

Height pairings are given as Q_p matrices.  The k-th matrix is either ambient
(r x r, in the original basis) or already restricted to the k-th filtered
piece (in the basis reported for that piece).  Pairings beyond the last one
supplied are taken to be zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    BlockNotIsotropic,
    EqualRanks,
    FiltrationIncomplete,
    InconsistentDimensions,
    NotAlternating,
    NotSymmetric,
    PrecisionExhausted,
    ZeroLogarithm,
)
from .iwasawa import GradedValue
from .linalg import PMatrix, adjugate, check_alternating, det, pfaffian, smith_int
from .padic import PadicNumber


@dataclass(frozen=True)
class HeightSystem:
    p: int
    r_plus: int
    r_minus: int
    H: tuple  # PMatrix over Q_p, k = 1, 2, ...
    t: object = 1
    t_prime: object = None
    det_A: object = 1
    labels: tuple = ()
    prec: int = 20

    @property
    def r(self) -> int:
        return self.r_plus + self.r_minus

    @classmethod
    def from_json(cls, obj, prec=None):
        p = int(obj["p"])
        prec = int(obj.get("prec", prec or 20))
        H = []
        for h in obj.get("H", []):
            if isinstance(h, dict):
                H.append(PMatrix.from_json({"ring": "Qp", "p": p, "prec": prec, **h}))
            else:
                H.append(PMatrix("Qp", p, [[_num(x, p, prec) for x in row] for row in h], prec))
        return cls(
            p=p,
            r_plus=int(obj["r_plus"]),
            r_minus=int(obj["r_minus"]),
            H=tuple(H),
            t=obj.get("t", 1),
            t_prime=obj.get("t_prime"),
            det_A=obj.get("det_A", 1),
            labels=tuple(obj.get("labels", ())),
            prec=prec,
        )

    def padic(self, x) -> PadicNumber:
        return _num(x, self.p, self.prec)


def _num(x, p, prec):
    if isinstance(x, PadicNumber):
        return x
    if isinstance(x, dict):
        return PadicNumber.from_json(x)
    return PadicNumber.from_rational(x, p, prec)


@dataclass
class FiltrationReport:
    e: list
    d_p: int
    bases: list  # integer column bases of S^(1), S^(2), ... in ambient coordinates
    complements: list  # integer bases of complements of S^(k+1) in S^(k)
    complements_local: list  # the same, in the coordinates of the basis of S^(k)
    partials: list  # R^(k)
    adapted: list  # True when S^(k+1) is a coordinate tail of S^(k)
    restricted: list = field(default_factory=list)  # pairings on S^(k), basis coordinates

    @property
    def exponent(self) -> int:
        return sum((k + 1) * ek for k, ek in enumerate(self.e))

    def to_json(self):
        return {
            "e": self.e,
            "d_p": self.d_p,
            "exponent": self.exponent,
            "partials": [x.to_json() for x in self.partials],
            "adapted": self.adapted,
            "bases": self.bases,
        }


def _transpose(A):
    return [list(r) for r in zip(*A)] if A else []


def _restrict(H: PMatrix, B_cols) -> PMatrix:
    """Gram matrix B^T H B for an integer matrix B given by its columns."""
    B = _transpose(B_cols)  # rows of B
    if not B_cols:
        return PMatrix("Qp", H.p, [], H.prec)
    left = PMatrix("Qp", H.p, B_cols, H.prec)
    return (left @ H) @ B


def _integral_residues(M: PMatrix):
    """Scale M to an integral matrix and return residues with their precision."""
    vals = [x.valuation() for r in M.entries for x in r if not x.is_zero()]
    shift = min(vals) if vals else 0
    N = min((x.prec for r in M.entries for x in r), default=M.prec) - shift
    A = []
    for r in M.entries:
        row = []
        for x in r:
            if x.is_zero():
                row.append(0)
            else:
                row.append((x.unit * M.p ** (x.val - shift)) % M.p**N)
        A.append(row)
    return A, N, shift


def _centered(x, q):
    x %= q
    return x - q if x > q // 2 else x


def _is_symmetric(M: PMatrix) -> bool:
    return all(M[i, j] == M[j, i] for i in range(M.nrows) for j in range(i + 1, M.ncols))


def compute_filtration(H, r: int, p: int | None = None, guard: int = 1) -> FiltrationReport:
    """Iterated null-spaces of the derived pairings.

    A nonzero elementary divisor within ``guard`` digits of the working
    precision cannot be told apart from zero; the filtration then stops with
    PrecisionExhausted instead of guessing.
    """
    H = list(H)
    if H:
        p = H[0].p if p is None else p
    if p is not None and len(H) > p - 1:
        raise InconsistentDimensions(f"at most p-1 = {p - 1} derived pairings exist")
    if H and H[0].shape != (r, r):
        raise InconsistentDimensions(f"H^(1) has shape {H[0].shape}, expected ({r}, {r})")
    if H and not _is_symmetric(H[0]):
        raise NotSymmetric("H^(1) is not symmetric")
    basis = [[int(i == j) for i in range(r)] for j in range(r)]  # columns
    e, bases, comps, locs, partials, adapted, restricted = [], [basis], [], [], [], [], []
    for k, Hk in enumerate(H, start=1):
        s = len(basis)
        if s == 0:
            e.append(0)
            comps.append([])
            locs.append([])
            partials.append(PadicNumber.from_rational(1, Hk.p, Hk.prec))
            adapted.append(True)
            restricted.append(PMatrix("Qp", Hk.p, [], Hk.prec))
            bases.append([])
            continue
        if Hk.shape == (r, r):
            G = _restrict(Hk, basis)
        elif Hk.shape == (s, s):
            G = Hk
        else:
            raise InconsistentDimensions(f"H^({k}) has shape {Hk.shape}; expected ({r},{r}) or ({s},{s})")
        if k % 2 == 0:
            try:
                check_alternating(G)
            except NotAlternating as exc:
                raise NotAlternating(f"H^({k}) restricted to S^({k}) is not alternating: {exc}") from None
        restricted.append(G)
        A, N, _ = _integral_residues(G)
        if N < 1:
            raise PrecisionExhausted(f"H^({k}) carries no digits after scaling")
        S = smith_int(A, G.p, N)
        if any(a >= N - guard and a > 0 for a in S.exponents):
            raise PrecisionExhausted(f"pivot of H^({k}) sits at the precision boundary {G.p}^{N}")
        q = G.p**N
        rank = S.rank
        kernel = [[_centered(S.V[i][j], q) for i in range(s)] for j in range(rank, s)]
        tail = all(all(v[i] == 0 for i in range(rank)) for v in kernel)
        if tail:
            comp_local = [[int(i == j) for i in range(s)] for j in range(rank)]
            kernel = [[int(i == j) for i in range(s)] for j in range(rank, s)]
        else:
            comp_local = [[_centered(S.V[i][j], q) for i in range(s)] for j in range(rank)]
        Rk = det(_restrict(G, comp_local)) if rank else PadicNumber.from_rational(1, G.p, G.prec)
        if rank and Rk.is_zero():
            raise PrecisionExhausted(f"partial regulator R^({k}) vanishes at the working precision")
        to_ambient = lambda v: [sum(basis[c][i] * v[c] for c in range(s)) for i in range(r)]
        comps.append([to_ambient(v) for v in comp_local])
        locs.append(comp_local)
        basis = [to_ambient(v) for v in kernel]
        bases.append(basis)
        e.append(rank)
        partials.append(Rk)
        adapted.append(tail)
    if p is not None:
        while len(e) < p - 1:
            # a missing pairing is zero: nothing is split off
            e.append(0)
            comps.append([])
            locs.append([])
            partials.append(PadicNumber.from_rational(1, p, H[0].prec if H else 20))
            adapted.append(True)
            bases.append(basis)
    return FiltrationReport(e, len(basis), bases, comps, locs, partials, adapted, restricted)


@dataclass(frozen=True)
class EnhancedRegulator:
    coefficients: PMatrix  # C[i][j] on P_i (x) P_j
    exponent: int

    def to_json(self):
        return {"exponent": self.exponent, "coefficients": self.coefficients.to_json()}


def enhanced_regulator(H1: PMatrix, t_prime=1) -> EnhancedRegulator:
    """Coefficients (-1)^{i+j} R_{ij} / t'^2 at exponent r - 1."""
    if not _is_symmetric(H1):
        raise NotSymmetric("H^(1) is not symmetric")
    r = H1.nrows
    tp = _num(t_prime, H1.p, H1.prec)
    # for symmetric H1 the signed minors are the adjugate entries
    C = adjugate(H1).scale((tp * tp).inverse())
    return EnhancedRegulator(C, r - 1)


def _t_factor(sys_t, p, prec):
    return _num(sys_t, p, prec)


def derived_enhanced_regulator(sys: HeightSystem, report: FiltrationReport | None = None) -> GradedValue:
    """t^{-2} prod R^(k) on y (x) y, at exponent sum k e_k."""
    report = report or compute_filtration(sys.H, sys.r, sys.p)
    if report.d_p != 1:
        raise FiltrationIncomplete(f"residual rank d_p = {report.d_p}, expected 1")
    t = _t_factor(sys.t, sys.p, sys.prec)
    coef = (t * t).inverse()
    for R in report.partials:
        coef = coef * R
    return GradedValue(report.exponent, coef)


def derived_regulator_p(sys: HeightSystem, log_y, report: FiltrationReport | None = None) -> GradedValue:
    """t^{-2} log(y)^2 prod R^(k).

    The filtration may be given on the full module (one universal-norm line
    left over) or on its p-restricted part (nothing left over).
    """
    log_y = _num(log_y, sys.p, sys.prec)
    if log_y.is_zero():
        raise ZeroLogarithm("log of the universal norm generator vanishes")
    report = report or compute_filtration(sys.H, sys.r, sys.p)
    if report.d_p not in (0, 1):
        raise FiltrationIncomplete(f"residual rank d_p = {report.d_p}")
    t = _t_factor(sys.t, sys.p, sys.prec)
    coef = log_y * log_y * (t * t).inverse()
    for R in report.partials:
        coef = coef * R
    return GradedValue(report.exponent, coef)


@dataclass(frozen=True)
class SqrtRegulator:
    value: GradedValue
    cross_det: PadicNumber
    pf: PadicNumber
    sign_ambiguous: bool = True

    def to_json(self):
        return {"value": self.value.to_json(), "cross_det": self.cross_det.to_json(),
                "pf": self.pf.to_json(), "up_to_sign": self.sign_ambiguous}


def check_isotropic(H1: PMatrix, s: int) -> None:
    for block in (range(0, s), range(s, 2 * s)):
        for i in block:
            for j in block:
                if not H1[i, j].is_zero():
                    raise BlockNotIsotropic(f"same-sign entry H^(1)[{i},{j}] = {H1[i, j]} is nonzero")


def sqrt_regulator(sys: HeightSystem, log_y=None, report: FiltrationReport | None = None) -> SqrtRegulator:
    """t^{-1} det(cross block of H^(1)) pf(H^(2) block), at exponent max(r+, r-) - 1.

    The basis is ordered y_1^+..y_s^+, y_1^-..y_s^-, then the rest.  With
    ``log_y`` the p-restricted version (times log(y)) is returned.
    """
    s = min(sys.r_plus, sys.r_minus)
    H1 = sys.H[0] if sys.H else PMatrix("Qp", sys.p, [[0] * sys.r for _ in range(sys.r)], sys.prec)
    check_isotropic(H1, s)
    B = H1.submatrix(range(0, s), range(s, 2 * s))
    cross = det(B)
    report = report or compute_filtration(sys.H, sys.r, sys.p)
    pf = PadicNumber.from_rational(1, sys.p, sys.prec)
    if len(report.e) >= 2 and report.e[1] > 0:
        if len(sys.H) < 2:
            raise InconsistentDimensions("e_2 > 0 needs H^(2)")
        G = report.restricted[1]
        pf = pfaffian(_restrict(G, report.complements_local[1]))
    t = _t_factor(sys.t, sys.p, sys.prec)
    coef = cross * pf * t.inverse()
    if log_y is not None:
        log_y = _num(log_y, sys.p, sys.prec)
        if log_y.is_zero():
            raise ZeroLogarithm("log of the universal norm generator vanishes")
        coef = coef * log_y
    rho = max(sys.r_plus, sys.r_minus) - 1
    return SqrtRegulator(GradedValue(rho, coef), cross, pf)


@dataclass(frozen=True)
class BlockDeterminantCheck:
    full_det: PadicNumber
    cross_det: PadicNumber
    s: int
    sign: int  # full_det == sign * cross_det^2
    reference_sign: int = -1

    @property
    def discrepancy(self) -> bool:
        return self.sign != self.reference_sign

    def to_json(self):
        return {"full_det": self.full_det.to_json(), "cross_det": self.cross_det.to_json(),
                "s": self.s, "sign": self.sign, "reference_sign": self.reference_sign,
                "discrepancy": self.discrepancy}


def isotropic_block_determinant(H1: PMatrix, s: int) -> BlockDeterminantCheck:
    """det of the leading 2s x 2s isotropic block against the square of its cross block.

    Direct expansion gives (-1)^s det(B)^2; the usual statement reads -det(B)^2.
    Both signs are reported.
    """
    check_isotropic(H1, s)
    idx = range(2 * s)
    full = det(H1.submatrix(idx, idx))
    cross = det(H1.submatrix(range(s), range(s, 2 * s)))
    sq = cross * cross
    sign = (-1) ** s
    if not (full == sq * sign):
        if full == -sq:
            sign = -sign
        else:
            raise AssertionError("block determinant is not plus or minus a square")
    return BlockDeterminantCheck(full, cross, s, sign)


def universal_norm_sign(r_plus: int, r_minus: int) -> int:
    if r_plus == r_minus:
        raise EqualRanks("equal eigenspace ranks leave the sign undetermined")
    return 1 if r_plus > r_minus else -1
