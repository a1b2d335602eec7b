"""Synthetic Heegner systems, regularized points and the Heegner distribution.

Level n >= 1 carries the cyclic group G_n of order d * p^(n-1), d = (p-1)/u_K,
standing in for Gal(K[p^n]/K); level 0 is the base field (G_0 trivial, the
class-field layer K[1] is identified with K).  A point at level n is a
vector over Z/p^N indexed by (g, c), g in G_n and c < rank, i.e. an element of
the free module Z/p^N[G_n]^rank.  Norms sum over fibres of G_{n+1} -> G_n.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import (
    ActionMismatch,
    NonUnitUK,
    NotInvariant,
    NotSolvable,
    OrderTooSmall,
    RelationViolated,
)
from .iwasawa import (
    GradedValue,
    GroupRingElement,
    derivative_operator,
    graded_coefficient,
    in_ideal_power,
    ord_J,
    project_pi,
)
from .linalg import kernel_mod, solve_mod
from .padic import PadicNumber, unit_root


def _mat_vec(A, v, q):
    return [sum(a * x for a, x in zip(row, v)) % q for row in A]


def _identity(c):
    return [[int(i == j) for j in range(c)] for i in range(c)]


@dataclass
class HeegnerSystem:
    p: int
    a_p: int
    prec: int
    levels: list  # y_0 .. y_nmax, flat int vectors
    rank: int = 1
    u_K: int = 1
    sigma: list | None = None  # sigma_p on the level-0 module (rank x rank)
    sigma_star: list | None = None

    def __post_init__(self):
        if self.u_K % self.p == 0:
            raise NonUnitUK(f"p={self.p} divides u_K={self.u_K}")
        if (self.p - 1) % self.u_K:
            raise ValueError(f"u_K={self.u_K} must divide p-1={self.p - 1}")
        if self.sigma is None:
            self.sigma = _identity(self.rank)
        if self.sigma_star is None:
            self.sigma_star = _identity(self.rank)

    @property
    def q(self) -> int:
        return self.p**self.prec

    @property
    def n_max(self) -> int:
        return len(self.levels) - 1

    @property
    def d(self) -> int:
        return (self.p - 1) // self.u_K

    def group_order(self, n: int) -> int:
        return 1 if n == 0 else self.d * self.p ** (n - 1)

    def frobenius_sum(self, v):
        q = self.q
        a = _mat_vec(self.sigma, v, q)
        b = _mat_vec(self.sigma_star, v, q)
        return [(x + y) % q for x, y in zip(a, b)]

    # -- level maps -----------------------------------------------------------

    def norm_down(self, v, n: int):
        """Norm from level n to level n-1."""
        lo = self.group_order(n - 1)
        c = self.rank
        out = [0] * (lo * c)
        for g in range(self.group_order(n)):
            base = (g % lo) * c
            for i in range(c):
                out[base + i] += v[g * c + i]
        return [x % self.q for x in out]

    def include_up(self, v, n: int):
        """A level-n vector viewed at level n+1."""
        lo = self.group_order(n)
        c = self.rank
        return [v[(g % lo) * c + i] for g in range(self.group_order(n + 1)) for i in range(c)]

    def relation_defects(self):
        """Differences between both sides of every norm relation (all zero when valid)."""
        q, y = self.q, self.levels
        out = []
        if self.n_max >= 1:
            lhs = [(self.u_K * x) % q for x in self.norm_down(y[1], 1)]
            s = self.frobenius_sum(y[0])
            rhs = [(self.a_p * a - b) % q for a, b in zip(y[0], s)]
            out.append([(a - b) % q for a, b in zip(lhs, rhs)])
        for n in range(1, self.n_max):
            lhs = self.norm_down(y[n + 1], n + 1)
            prev = self.include_up(y[n - 1], n - 1)
            rhs = [(self.a_p * a - b) % q for a, b in zip(y[n], prev)]
            out.append([(a - b) % q for a, b in zip(lhs, rhs)])
        return out

    def check_relations(self):
        for n, defect in enumerate(self.relation_defects()):
            if any(defect):
                raise RelationViolated(f"norm relation from level {n + 1} to {n} fails")

    def to_json(self):
        return {"p": self.p, "ap": self.a_p, "prec": self.prec, "rank": self.rank, "u_K": self.u_K,
                "levels": self.levels, "sigma": self.sigma, "sigma_star": self.sigma_star}

    @classmethod
    def from_json(cls, obj):
        return cls(p=int(obj["p"]), a_p=int(obj["ap"]), prec=int(obj.get("prec", 20)),
                   levels=[[int(x) for x in v] for v in obj["levels"]], rank=int(obj.get("rank", 1)),
                   u_K=int(obj.get("u_K", 1)), sigma=obj.get("sigma"), sigma_star=obj.get("sigma_star"))


def generate_system(p: int, a_p: int, n_max: int, prec: int = 20, rank: int = 1, u_K: int = 1,
                    seed: int | None = 0, sigma=None, sigma_star=None) -> HeegnerSystem:
    """Random y_0..y_{n_max} satisfying the norm relations exactly.

    Each level is drawn at random and then one entry per fibre is solved for.
    """
    rng = random.Random(seed)
    sys = HeegnerSystem(p, a_p, prec, [], rank, u_K, sigma, sigma_star)
    q, c = sys.q, rank
    y0 = [rng.randrange(q) for _ in range(c)]
    levels = [y0]
    uinv = pow(u_K, -1, q)
    for n in range(1, n_max + 1):
        if n == 1:
            s = sys.frobenius_sum(y0)
            target = [(uinv * (a_p * a - b)) % q for a, b in zip(y0, s)]
        else:
            prev = sys.include_up(levels[n - 2], n - 2)
            target = [(a_p * a - b) % q for a, b in zip(levels[n - 1], prev)]
        lo = sys.group_order(n - 1)
        y = [rng.randrange(q) for _ in range(sys.group_order(n) * c)]
        sums = [0] * (lo * c)
        for g in range(lo, sys.group_order(n)):
            for i in range(c):
                sums[(g % lo) * c + i] += y[g * c + i]
        for g in range(lo):
            for i in range(c):
                y[g * c + i] = (target[g * c + i] - sums[g * c + i]) % q
        levels.append(y)
    sys.levels = levels
    return sys


def regularize(sys: HeegnerSystem, alpha: PadicNumber | int | None = None, check: bool = True):
    """z_0 = u^-1 (1 - (s + s*) a^-1 + a^-2) y_0 and z_n = a^-n y_n - a^-(n+1) y_{n-1}."""
    if check:
        sys.check_relations()
    q = sys.q
    if alpha is None:
        alpha = unit_root(sys.a_p, sys.p, sys.prec)
    a = alpha.residue(sys.prec) if isinstance(alpha, PadicNumber) else int(alpha) % q
    ainv = pow(a, -1, q)
    y = sys.levels
    uinv = pow(sys.u_K, -1, q)
    s0 = sys.frobenius_sum(y[0])
    z = [[(uinv * (x - ainv * sx + ainv * ainv * x)) % q for x, sx in zip(y[0], s0)]]
    for n in range(1, sys.n_max + 1):
        an = pow(ainv, n, q)
        prev = sys.include_up(y[n - 1], n - 1)
        z.append([(an * x - an * ainv * w) % q for x, w in zip(y[n], prev)])
    return z


def norm_compatible(sys: HeegnerSystem, z) -> list[bool]:
    """Whether Norm z_{n+1} == z_n, level by level."""
    return [sys.norm_down(z[n + 1], n + 1) == [x % sys.q for x in z[n]] for n in range(len(z) - 1)]


def bold_z(sys: HeegnerSystem, z, n: int):
    """Norm of z_{n+1} down to the anticyclotomic layer Gamma_n = Z/p^n."""
    if n + 1 > len(z) - 1:
        raise ValueError(f"bold z_{n} needs z_{n + 1}")
    N = sys.p**n
    c = sys.rank
    out = [0] * (N * c)
    for g in range(sys.group_order(n + 1)):
        for i in range(c):
            out[(g % N) * c + i] += z[n + 1][g * c + i]
    return [x % sys.q for x in out]


# -- distributions ----------------------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    p: int
    n: int
    components: tuple  # GroupRingElement per coordinate

    def project(self) -> "Distribution":
        """pi_{n,n-1} on coefficients, coordinates reduced along Gamma_n -> Gamma_{n-1}."""
        if self.n == 0:
            raise ValueError("no level below 0")
        c = len(self.components) // self.p**self.n
        lo = self.p ** (self.n - 1)
        comps = [project_pi(self.components[i * c + j]) for i in range(lo) for j in range(c)]
        return Distribution(self.p, self.n - 1, tuple(comps))

    def equals(self, other) -> bool:
        return self.n == other.n and all(a.coeffs == b.coeffs for a, b in zip(self.components, other.components))

    def to_json(self):
        return {"p": self.p, "n": self.n, "components": [f.to_json() for f in self.components]}

    @classmethod
    def from_json(cls, obj):
        p, n = int(obj["p"]), int(obj["n"])
        comps = []
        for f in obj["components"]:
            if isinstance(f, dict):
                comps.append(GroupRingElement.from_json({"p": p, "n": n, **f}))
            else:
                comps.append(GroupRingElement(p, n, tuple(int(x) for x in f)))
        return cls(p, n, tuple(comps))


def tower_action(p: int, n: int, rank: int = 1):
    """gamma acting on functions Gamma_n x rank by translation: (i, c) -> (i+1, c)."""
    N = p**n
    perm = [((i + 1) % N) * rank + c for i in range(N) for c in range(rank)]
    return perm, [1] * (N * rank)


def _check_action(perm, coeffs, p, n, m):
    size = len(perm)
    if len(coeffs) != size or sorted(perm) != list(range(size)):
        raise ActionMismatch("action is not a permutation with one coefficient per coordinate")
    q = p**m
    N = p**n
    for start in range(size):
        i, prod, steps = start, 1, 0
        while True:
            prod = prod * coeffs[i] % q
            i = perm[i]
            steps += 1
            if i == start:
                break
        if N % steps or pow(prod, N // steps, q) != 1 % q:
            raise ActionMismatch(f"gamma^{N} does not act trivially on coordinate {start}")


def apply_action(perm, coeffs, P, times: int = 1, q: int | None = None):
    out = list(P)
    for _ in range(times):
        new = [0] * len(out)
        for i, x in enumerate(out):
            new[perm[i]] = coeffs[i] * x if q is None else (coeffs[i] * x) % q
        out = new
    return out


def psi_map(P, action, p: int, n: int, m: int = -1) -> Distribution:
    """Psi(P) = sum_sigma P^sigma (x) sigma^{-1}, coordinate by coordinate."""
    perm, coeffs = action
    if len(P) != len(perm):
        raise ActionMismatch("point and action have different sizes")
    m = max(n, 1) if m < 0 else m
    _check_action(perm, coeffs, p, n, m)
    q = p**m
    N = p**n
    gcoef = [[0] * N for _ in P]
    cur = [x % q for x in P]
    for b in range(N):
        for i, x in enumerate(cur):
            gcoef[i][(-b) % N] += x
        cur = apply_action(perm, coeffs, cur, 1, q)
    return Distribution(p, n, tuple(GroupRingElement.from_gamma(p, n, g, m) for g in gcoef))


def theta(sys: HeegnerSystem, z, n: int, m: int = -1) -> Distribution:
    """theta_n = Psi_n(bold z_n)."""
    P = bold_z(sys, z, n)
    m = max(n, 1) if m < 0 else m
    if m > sys.prec:
        raise ValueError("coefficient modulus exceeds the working precision")
    return psi_map(P, tower_action(sys.p, n, sys.rank), sys.p, n, m)


def ord_J_distribution(theta_n: Distribution):
    return min((ord_J(f) for f in theta_n.components), default=math.inf)


# -- Galois modules with an invariant form ---------------------------------------------------


@dataclass
class GaloisModule:
    """(Z/p^m)^dim with gamma acting by an integer matrix and an invariant bilinear form."""

    p: int
    n: int
    gamma: list
    form: list
    m: int = -1
    blocks: list = field(default_factory=list)

    def __post_init__(self):
        if self.m < 0:
            self.m = max(self.n, 1)

    @property
    def q(self):
        return self.p**self.m

    @property
    def dim(self):
        return len(self.gamma)

    @classmethod
    def free(cls, p: int, n: int, rank: int, m: int = -1, hyperbolic: bool = True):
        """R_n^rank in the gamma^j coordinates, with the trace form.

        With ``hyperbolic`` the first half of the blocks pairs with the second
        half and each half is isotropic; otherwise the blocks are orthogonal.
        """
        N = p**n
        dim = rank * N
        G = [[0] * dim for _ in range(dim)]
        for r in range(rank):
            for j in range(N):
                G[r * N + (j + 1) % N][r * N + j] = 1
        B = [[0] * dim for _ in range(dim)]
        if hyperbolic:
            if rank % 2:
                raise ValueError("a hyperbolic module needs even rank")
            s = rank // 2
            for r in range(s):
                for j in range(N):
                    B[r * N + j][(s + r) * N + j] = 1
                    B[(s + r) * N + j][r * N + j] = 1
        else:
            for i in range(dim):
                B[i][i] = 1
        return cls(p, n, G, B, m, [N] * rank)

    def act(self, x, b: int = 1):
        v = [c % self.q for c in x]
        for _ in range(b % self.p**self.n):
            v = _mat_vec(self.gamma, v, self.q)
        return v

    def base(self, x, y) -> int:
        return sum(x[i] * self.form[i][j] * y[j] for i in range(self.dim) for j in range(self.dim)) % self.q

    def check(self):
        q, N = self.q, self.p**self.n
        e = [[int(i == j) for j in range(self.dim)] for i in range(self.dim)]
        cols = [self.act(v, N) for v in e]
        if cols != [[x % q for x in v] for v in e]:
            raise ActionMismatch(f"gamma^{N} is not the identity")
        A = self.gamma
        for i in range(self.dim):
            for j in range(self.dim):
                lhs = sum(A[k][i] * self.form[k][l] * A[l][j] for k in range(self.dim) for l in range(self.dim))
                if (lhs - self.form[i][j]) % q:
                    raise NotInvariant("base form is not gamma-invariant")

    def apply(self, f: GroupRingElement, x):
        """Action of a group-ring element."""
        g = f.to_gamma()
        out = [0] * self.dim
        v = [c % self.q for c in x]
        for j in range(self.p**self.n):
            if g[j]:
                out = [(a + g[j] * b) % self.q for a, b in zip(out, v)]
            v = _mat_vec(self.gamma, v, self.q)
        return out

    def operator_matrix(self, f: GroupRingElement):
        cols = [self.apply(f, [int(i == j) for i in range(self.dim)]) for j in range(self.dim)]
        return [[cols[j][i] for j in range(self.dim)] for i in range(self.dim)]

    def is_fixed(self, x) -> bool:
        return self.act(x) == [c % self.q for c in x]


def equivariant_pairing(module: GaloisModule, x, y, check: bool = False) -> GroupRingElement:
    """<x, y> = sum_sigma B(x, sigma y) sigma^{-1}."""
    if check:
        module.check()
    N = module.p**module.n
    g = [0] * N
    v = [c % module.q for c in y]
    for b in range(N):
        g[(-b) % N] += module.base(x, v)
        v = _mat_vec(module.gamma, v, module.q)
    return GroupRingElement.from_gamma(module.p, module.n, g, module.m)


@dataclass(frozen=True)
class DerivedHeight:
    value: GradedValue
    pairing: GroupRingElement
    x_prime: tuple
    y_prime: tuple
    stable: bool | None = None

    def to_json(self):
        return {"value": self.value.to_json(), "pairing": self.pairing.to_json(),
                "x_prime": list(self.x_prime), "y_prime": list(self.y_prime), "stable": self.stable}


def derivative_preimage(module: GaloisModule, target, k: int):
    """Some x' with D^(k-1) x' = target, together with the kernel generators."""
    D = derivative_operator(module.p, module.n, k - 1, module.m)
    A = module.operator_matrix(D)
    x = solve_mod(A, target, module.p, module.m)
    if x is None:
        raise NotSolvable(f"no D^({k - 1}) preimage exists")
    return x, kernel_mod(A, module.p, module.m)


def derived_height_extract(module: GaloisModule, x_bar, y_bar, k: int, x_prime=None, y_prime=None,
                           resolves: int = 0, rng: random.Random | None = None) -> DerivedHeight:
    """<x', y'> read in J^k / J^{k+1}, where D^(k-1) x' = x_bar and D^(k-1) y' = y_bar.

    With ``resolves`` > 0, x' is re-drawn that many times from its coset of
    solutions; ``stable`` records whether every re-draw gave the same class.
    """
    if not module.is_fixed(x_bar):
        raise NotInvariant("x_bar is not fixed by gamma")
    D = derivative_operator(module.p, module.n, k - 1, module.m)
    kernel = None
    if x_prime is None:
        x_prime, kernel = derivative_preimage(module, x_bar, k)
    elif module.apply(D, x_prime) != [c % module.q for c in x_bar]:
        raise NotSolvable("supplied x' is not a preimage of x_bar")
    if y_prime is None:
        y_prime, _ = derivative_preimage(module, y_bar, k)
    elif module.apply(D, y_prime) != [c % module.q for c in y_bar]:
        raise NotSolvable("supplied y' is not a preimage of y_bar")
    val = equivariant_pairing(module, x_prime, y_prime)
    if not in_ideal_power(val, k):
        raise OrderTooSmall(f"pairing value is not in J^{k}")
    stable = None
    if resolves:
        rng = rng or random.Random(0)
        if kernel is None:
            kernel = kernel_mod(module.operator_matrix(D), module.p, module.m)
        stable = True
        for _ in range(resolves):
            shift = [0] * module.dim
            for gen in kernel:
                c = rng.randrange(module.q)
                shift = [(a + c * b) % module.q for a, b in zip(shift, gen)]
            x2 = [(a + b) % module.q for a, b in zip(x_prime, shift)]
            if not in_ideal_power(equivariant_pairing(module, x2, y_prime) - val, k + 1):
                stable = False
                break
    coef = graded_coefficient(val, k)
    return DerivedHeight(GradedValue(k, coef), val, tuple(x_prime), tuple(y_prime), stable)
