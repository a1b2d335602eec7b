"""Leading-coefficient predictions, consistency checks and admissible primes."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from sympy import factorint, primerange

from .elliptic import CurveData, coker_size_from_log, count_points, count_points_scan
from .errors import AnomalousPrime, BadDiscriminant, NonSquareSha, NonUnitFactors
from .heights import HeightSystem, derived_regulator_p, sqrt_regulator
from .iwasawa import GradedValue, IwasawaSeries, leading_image, ord_J
from .linalg import PMatrix, coker_order, smith_int
from .padic import PadicNumber, vp


def _pad(x, p, prec):
    if isinstance(x, PadicNumber):
        return x
    if isinstance(x, dict):
        return PadicNumber.from_json(x)
    return PadicNumber.from_rational(x, p, prec)


@dataclass
class BSDInput:
    p: int
    a_p: int
    r_plus: int
    r_minus: int
    sha: int = 1
    tamagawa: list = field(default_factory=list)
    u_K: int = 1
    c_E: int = 1
    t: int = 1
    t_prime: int | None = None
    det_A: int = 1
    log_y: object = None
    heights: HeightSystem | None = None
    heegner_hypothesis: bool = True
    star_condition: bool | None = None
    prec: int = 20

    def __post_init__(self):
        if self.p == 2:
            raise ValueError("p must be odd")
        if self.sha < 1:
            raise ValueError("#Sha must be a positive integer")
        if self.heegner_hypothesis and (self.r_plus + self.r_minus) % 2 == 0:
            raise ValueError("under the Heegner hypothesis r = r+ + r- must be odd")
        if self.log_y is not None:
            self.log_y = _pad(self.log_y, self.p, self.prec)

    @property
    def r(self):
        return self.r_plus + self.r_minus

    @property
    def rho(self):
        return max(self.r_plus, self.r_minus) - 1

    @property
    def sha_p_part(self) -> int:
        return self.p ** vp(self.sha, self.p)

    @classmethod
    def from_json(cls, obj):
        p = int(obj["p"])
        prec = int(obj.get("prec", 20))
        hs = obj.get("heights")
        heights = HeightSystem.from_json({"p": p, "prec": prec, **hs}) if hs else None
        return cls(
            p=p, a_p=int(obj["ap"]), r_plus=int(obj["r_plus"]), r_minus=int(obj["r_minus"]),
            sha=int(obj.get("sha", 1)), tamagawa=[int(c) for c in obj.get("tamagawa", [])],
            u_K=int(obj.get("u_K", 1)), c_E=int(obj.get("c_E", 1)), t=int(obj.get("t", 1)),
            t_prime=obj.get("t_prime"), det_A=int(obj.get("det_A", 1)), log_y=obj.get("log_y"),
            heights=heights, heegner_hypothesis=bool(obj.get("heegner_hypothesis", True)),
            star_condition=obj.get("star_condition"), prec=prec,
        )


def euler_factor(a_p: int, p: int, prec: int = 20) -> PadicNumber:
    """(1 - a_p + p) / p."""
    return PadicNumber.from_rational(1 - a_p + p, p, prec + 1) / p


def bdp_value(u_K: int, c_E: int, a_p: int, p: int, log_zK) -> PadicNumber:
    """u_K^-2 c_E^-2 ((1 - a_p + p)/p)^2 log(z_K)^2."""
    if (u_K * c_E) % p == 0:
        raise NonUnitFactors(f"p={p} divides u_K*c_E={u_K * c_E}")
    log_zK = _pad(log_zK, p, 20)
    prec = log_zK.prec
    e = euler_factor(a_p, p, prec)
    uc = PadicNumber.from_rational(u_K * c_E, p, prec)
    return e * e * log_zK * log_zK / (uc * uc)


@dataclass(frozen=True)
class Prediction:
    order: int
    value: GradedValue | None
    regulator: GradedValue | None
    notes: tuple = ()
    up_to_sign: bool = False

    def to_json(self):
        return {"order": self.order, "value": self.value.to_json() if self.value else None,
                "regulator": self.regulator.to_json() if self.regulator else None,
                "up_to_sign": self.up_to_sign, "notes": list(self.notes)}


def _regulator_der(inp: BSDInput) -> GradedValue:
    if inp.log_y is None:
        raise ValueError("log(y_p) is required")
    if inp.heights is not None:
        hs = inp.heights
        if hs.t != inp.t:
            hs = HeightSystem(hs.p, hs.r_plus, hs.r_minus, hs.H, inp.t, hs.t_prime, hs.det_A, hs.labels, hs.prec)
        return derived_regulator_p(hs, inp.log_y)
    if inp.r != 1:
        raise ValueError("height data is required when r > 1")
    # rank one: no pairings, regulator t^-2 log(y)^2
    t = PadicNumber.from_rational(inp.t, inp.p, inp.prec)
    return GradedValue(0, inp.log_y * inp.log_y / (t * t))


def _tamagawa_product(inp: BSDInput) -> int:
    return math.prod(inp.tamagawa) if inp.tamagawa else 1


def predict_conjecture_BSD(inp: BSDInput) -> Prediction:
    """Order 2 rho and coefficient Euler^2 Reg_der #Sha prod c_l^2."""
    reg = _regulator_der(inp)
    e = euler_factor(inp.a_p, inp.p, inp.prec)
    cprod = _tamagawa_product(inp)
    coef = e * e * reg.coefficient * inp.sha * (cprod * cprod)
    notes = []
    if reg.exponent != 2 * inp.rho:
        notes.append(f"regulator exponent {reg.exponent} differs from 2*rho = {2 * inp.rho}")
    if inp.sha != inp.sha_p_part:
        notes.append(f"#Sha has prime-to-p part {inp.sha // inp.sha_p_part} (a p-adic unit)")
    return Prediction(2 * inp.rho, GradedValue(2 * inp.rho, coef), reg, tuple(notes))


def predict_conjecture_BSD_sqrt(inp: BSDInput) -> Prediction:
    """Order rho and coefficient +-Euler Reg^(1/2) sqrt(#Sha) prod c_l."""
    root = math.isqrt(inp.sha)
    if root * root != inp.sha:
        warnings.warn(f"#Sha = {inp.sha} is not a perfect square", NonSquareSha)
        return Prediction(inp.rho, None, None, ("#Sha is not a square",), True)
    if inp.log_y is None:
        raise ValueError("log(y_p) is required")
    if inp.heights is not None:
        hs = inp.heights
        if hs.t != inp.t:
            hs = HeightSystem(hs.p, hs.r_plus, hs.r_minus, hs.H, inp.t, hs.t_prime, hs.det_A, hs.labels, hs.prec)
        reg = sqrt_regulator(hs, inp.log_y).value
    else:
        if inp.r != 1:
            raise ValueError("height data is required when r > 1")
        reg = GradedValue(0, inp.log_y / PadicNumber.from_rational(inp.t, inp.p, inp.prec))
    e = euler_factor(inp.a_p, inp.p, inp.prec)
    coef = e * reg.coefficient * root * _tamagawa_product(inp)
    return Prediction(inp.rho, GradedValue(inp.rho, coef), reg, (), True)


@dataclass(frozen=True)
class TheoremAValue:
    order_bound: int
    valuation: int | float
    sel_div: int
    coker: int

    def to_json(self):
        return {"order_bound": self.order_bound, "valuation": self.valuation,
                "sel_div": self.sel_div, "coker": self.coker}


def sel_div_order(sha_p: int, log_y: PadicNumber, a_p: int | None = None) -> int:
    """#Sel_/div = #Sha * #coker^2, through #Sha^{p-bar} = #Sha * #coker."""
    coker = coker_size_from_log(log_y, a_p=a_p)
    sha_pbar = sha_p * coker
    return sha_pbar * coker


def sel_div_order_from_log(sha_p: int, log_y: PadicNumber) -> int:
    """#Sha * (p^-1 #(Z_p / log y))^2, with #(Z_p / log y) read off a 1x1 presentation."""
    p = log_y.p
    quotient = coker_order(PMatrix("Zp", p, [[log_y]], log_y.prec))
    if quotient == math.inf or quotient % p:
        raise ValueError("log(y_p) must lie in pZ_p")
    return sha_p * (quotient // p) ** 2


def theorem_A_value(inp: BSDInput) -> TheoremAValue:
    """Order bound 2 rho and v_p of p^-2 log(y)^2 Reg_p t^-2 #Sha_p."""
    if (inp.a_p - 1) % inp.p == 0:
        raise AnomalousPrime(f"a_p = {inp.a_p} is 1 mod {inp.p}")
    reg = _regulator_der(inp)
    sha_p = inp.sha_p_part
    v = -2 + reg.coefficient.valuation() + vp(sha_p, inp.p)
    sel = sel_div_order(sha_p, inp.log_y, inp.a_p)
    return TheoremAValue(2 * inp.rho, v, sel, coker_size_from_log(inp.log_y))


def rank_one_consistency(index: int, u_K: int, c_E: int, sha: int, tamagawa) -> bool:
    """[E(K):Z y_K]^2 == u_K^2 c_E^2 #Sha prod c_l^2."""
    c = math.prod(tamagawa) if tamagawa else 1
    return index * index == u_K * u_K * c_E * c_E * sha * c * c


# -- admissible primes -------------------------------------------------------------


def kronecker(D: int, q: int) -> int:
    """Kronecker symbol (D / q) for a prime q."""
    if q == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 in (1, 7) else -1
    D %= q
    if D == 0:
        return 0
    return 1 if pow(D, (q - 1) // 2, q) == 1 else -1


def is_fundamental_discriminant(D: int) -> bool:
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return all(e == 1 for e in factorint(abs(D)).values())
    if D % 4 == 0:
        d = D // 4
        return d % 4 in (2, 3) and all(e == 1 for e in factorint(abs(d)).values())
    return False


def curve_bad_primes(E: CurveData) -> set:
    if E.bad_primes:
        return set(E.bad_primes)
    return set(factorint(abs(E.discriminant)))


@dataclass(frozen=True)
class AdmissibleCertificate:
    q: int
    a_q: int
    kronecker: int
    q_mod_p: int
    minus_residue: int  # (q + 1 - a_q) mod p^m
    plus_residue: int  # (q + 1 + a_q) mod p^m
    branches: tuple  # which of "q+1-a_q", "q+1+a_q" are divisible by p^m

    def to_json(self):
        return {"q": self.q, "a_q": self.a_q, "kronecker": self.kronecker, "q_mod_p": self.q_mod_p,
                "minus_residue": self.minus_residue, "plus_residue": self.plus_residue,
                "branches": list(self.branches)}


def _examine(args):
    E, D, p, m, q = args
    k = kronecker(D, q)
    if k != -1:
        return None
    if q % p in (1, p - 1):
        return None
    _, a = count_points(E, q)
    pm = p**m
    minus, plus = (q + 1 - a) % pm, (q + 1 + a) % pm
    branches = tuple(name for name, r in (("q+1-a_q", minus), ("q+1+a_q", plus)) if r == 0)
    if not branches:
        return None
    return AdmissibleCertificate(q, a, k, q % p, minus, plus, branches)


@dataclass(frozen=True)
class AdmissibleResult:
    primes: tuple
    injective: bool | None  # None when no restriction matrix was supplied
    notes: tuple = ()

    def to_json(self):
        return {"primes": [c.to_json() for c in self.primes], "restriction_injective": self.injective,
                "notes": list(self.notes)}


def restriction_injective(matrix, p: int, m: int) -> bool:
    """Injectivity of (Z/p^m)^cols -> (Z/p^m)^rows given by an integer matrix."""
    if not matrix:
        return True
    cols = len(matrix[0])
    S = smith_int(matrix, p, m)
    return S.rank == cols and all(a == 0 for a in S.exponents)


def admissible_search(E: CurveData, D_K: int, p: int, m: int, bound: int, jobs: int | None = None,
                      restriction=None) -> AdmissibleResult:
    """All m-admissible primes q <= bound, each with a certificate."""
    if bound < 2:
        raise ValueError("bound must be at least 2")
    if D_K >= 0 or not is_fundamental_discriminant(D_K):
        raise BadDiscriminant(f"{D_K} is not a negative fundamental discriminant")
    bad = curve_bad_primes(E)
    excluded = bad | {p}
    if any(D_K % ell == 0 for ell in excluded):
        raise BadDiscriminant(f"D_K = {D_K} is not coprime to pN")
    cands = [q for q in primerange(2, bound + 1) if q not in excluded]
    args = [(E, D_K, p, m, q) for q in cands]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            found = list(ex.map(_examine, args, chunksize=16))
    else:
        found = [_examine(a) for a in args]
    primes = tuple(c for c in found if c is not None)
    notes = []
    injective = None
    if restriction is not None:
        injective = restriction_injective(restriction, p, m)
    else:
        notes.append("restriction-map injectivity not checked (no restriction matrix supplied)")
    return AdmissibleResult(primes, injective, tuple(notes))


def verify_certificate(E: CurveData, D_K: int, p: int, m: int, cert: AdmissibleCertificate) -> bool:
    """Re-check the three conditions by brute force, independently of the search."""
    q = cert.q
    if q == 2:
        inert = D_K % 8 == 5
    else:
        squares = {x * x % q for x in range(q)}
        inert = D_K % q != 0 and D_K % q not in squares
    a = q + 1 - count_points_scan(E, q)
    pm = p**m
    ok2 = all(q % p != r % p for r in (1, -1))
    ok3 = (q + 1 - a) % pm == 0 or (q + 1 + a) % pm == 0
    return inert and ok2 and ok3 and a == cert.a_q


# -- series against prediction --------------------------------------------------------


@dataclass
class BSDReport:
    kind: str
    predicted_order: int
    observed_order: int | float
    predicted: dict | None
    observed_leading: dict | None
    valuation_predicted: int | float | None
    valuation_observed: int | float | None
    flags: dict
    notes: list

    @property
    def passed(self) -> bool:
        return not self.flags.get("order_contradiction") and self.flags.get("valuation_match", True) is not False

    def to_json(self):
        return {"kind": self.kind, "predicted_order": self.predicted_order,
                "observed_order": "inf" if self.observed_order == math.inf else self.observed_order,
                "predicted": self.predicted, "observed_leading": self.observed_leading,
                "valuation_predicted": self.valuation_predicted, "valuation_observed": self.valuation_observed,
                "flags": self.flags, "notes": self.notes, "passed": self.passed}


def evaluate_series_against_prediction(series: IwasawaSeries, inp: BSDInput, theta=None, kind: str = "L") -> BSDReport:
    """Compare a user-supplied series with the predicted order and leading term.

    kind: "L" (squared conjecture), "sqrt" (square-root conjecture) or "F"
    (characteristic series; valuation only).
    """
    notes = []
    if kind == "L":
        pred = predict_conjecture_BSD(inp)
        order = pred.order
        vpred = pred.value.coefficient.valuation()
        pjson = pred.to_json()
        notes.extend(pred.notes)
    elif kind == "sqrt":
        pred = predict_conjecture_BSD_sqrt(inp)
        order = pred.order
        vpred = pred.value.coefficient.valuation() if pred.value else None
        pjson = pred.to_json()
        notes.append("square-root prediction is only defined up to sign")
    elif kind == "F":
        ta = theorem_A_value(inp)
        order, vpred, pjson = ta.order_bound, ta.valuation, ta.to_json()
        notes.append("characteristic series compared up to a p-adic unit")
    else:
        raise ValueError(f"unknown series kind {kind!r}")
    obs = ord_J(series)
    flags = {"order_contradiction": obs < order, "extra_vanishing": obs > order}
    lead = None
    vobs = None
    if obs == order:
        g = leading_image(series, order)
        lead = g.to_json()
        vobs = g.coefficient.valuation()
        if vpred is not None:
            flags["valuation_match"] = vobs == vpred
    if theta is not None:
        from .heegner import ord_J_distribution

        th = ord_J_distribution(theta)
        flags["theta_order"] = "inf" if th == math.inf else th
        flags["theta_at_least_series"] = th >= obs
        notes.append("theta order check is one-directional and not enforced")
    if inp.star_condition is not None:
        flags["star_condition"] = inp.star_condition
    if inp.sha != inp.sha_p_part:
        notes.append("prime-to-p part of #Sha folded into the unit")
    return BSDReport(kind, order, obs, pjson, lead, vpred, vobs, flags, notes)
