"""Totally real base fields of degree 1 and 2: exact elements, ideals, units.

Elements are coordinate pairs over the integral basis {1, omega}; all ring
arithmetic and all sign decisions are exact (integer comparisons), so
totally-positive tests can never be misclassified.  Real embeddings are also
available as floats for the analytic layer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from .errors import (
    DegreeUnsupported,
    MixedFields,
    NonSquarefree,
    SearchBudgetExceeded,
)
from .intmat import hnf_lattice, solve_exact

Rat = Fraction


def is_squarefree(m: int) -> bool:
    if m % 4 == 0:
        return False
    d = 2
    while d * d <= m:
        if m % (d * d) == 0:
            return False
        d += 1
    return True


def is_prime_int(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def primes_up_to(bound: int) -> list[int]:
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, isqrt(bound) + 1):
        if sieve[i]:
            sieve[i * i :: i] = b"\x00" * len(range(i * i, bound + 1, i))
    return [i for i, v in enumerate(sieve) if v]


def sqrt_mod_p(a: int, p: int) -> int | None:
    """A square root of a mod p (p prime), or None. Tonelli-Shanks."""
    a %= p
    if p == 2 or a == 0:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


class Field:
    """A totally real field Q or Q(sqrt m) with its arithmetic data.

    omega is 0 for n=1, sqrt(m) for m != 1 mod 4, (1+sqrt m)/2 otherwise;
    omega^2 = c0 + c1*omega.
    """

    def __init__(self, n: int, m: int | None = None, unit_budget: int = 10**6):
        if n == 1:
            self.n = 1
            self.m = None
            self.c0, self.c1 = 0, 0
            self.d_F = 1
        elif n == 2:
            if m is None or m < 2:
                raise NonSquarefree(f"radicand must be a squarefree integer >= 2, got {m}")
            if not is_squarefree(m):
                raise NonSquarefree(f"{m} is not squarefree")
            self.n = 2
            self.m = m
            if m % 4 == 1:
                self.c0, self.c1 = (m - 1) // 4, 1
                self.d_F = m
            else:
                self.c0, self.c1 = m, 0
                self.d_F = 4 * m
        else:
            raise DegreeUnsupported(f"exact arithmetic supports n in {{1,2}}, got {n}")
        self.unit_budget = unit_budget
        self._init_units()
        self._prime_cache: dict[int, SplittingType] = {}
        self._init_class_group()
        self.unit_sq_index = 2**self.n

    def _init_units(self):
        if self.n == 1:
            self.eps = FElem(self, Fraction(1), Fraction(0))
            self.regulator = 1.0
            self.d0 = 0.0
            self.omega_embeddings = (0.0,)
            return
        m = self.m
        s = math.sqrt(m)
        self.omega_embeddings = (s, -s) if self.c1 == 0 else ((1 + s) / 2, (1 - s) / 2)
        x, y = fundamental_unit_xy(m)
        # eps = (x + y sqrt m)/2; omega coords: a + b*omega with b = y (c1=0: b=y/... )
        if self.c1 == 0:
            a, b = Fraction(x, 2), Fraction(y, 2)
        else:
            a, b = Fraction(x - y, 2), Fraction(y)
        self.eps = FElem(self, a, b)
        if abs(self.eps.norm()) != 1 or not self.eps.is_integral():
            raise AssertionError("fundamental unit construction failed")
        # the scan returns x, y > 0, so the first embedding is already > 1
        self.regulator = math.log(self.eps.embed(0))
        self.d0 = math.sqrt(2.0) * self.regulator

    # -- element constructors ---------------------------------------------

    def elem(self, a, b=0) -> "FElem":
        return FElem(self, Fraction(a), Fraction(b))

    def zero(self) -> "FElem":
        return self.elem(0)

    def one(self) -> "FElem":
        return self.elem(1)

    def omega(self) -> "FElem":
        return self.elem(0, 1)

    def sqrt_m(self) -> "FElem":
        """The element sqrt(m) (n=2 only)."""
        if self.n == 1:
            raise DegreeUnsupported("sqrt m needs n=2")
        if self.c1 == 0:
            return self.omega()
        return self.elem(-1, 2)  # 2*omega - 1

    def maximal_order_basis(self) -> list["FElem"]:
        if self.n == 1:
            return [self.one()]
        return [self.one(), self.omega()]

    # -- ideals -------------------------------------------------------------

    def ideal(self, *gens) -> "FIdeal":
        elems = [g if isinstance(g, FElem) else self.elem(Fraction(g)) for g in gens]
        return FIdeal.from_generators(self, elems)

    def unit_ideal(self) -> "FIdeal":
        return self.ideal(self.one())

    # -- class group ----------------------------------------------------------

    def _init_class_group(self):
        if self.n == 1:
            self.h_F = 1
            self.class_reps = [self.unit_ideal()]
            self.minkowski = 1.0
            return
        self.minkowski = math.sqrt(self.d_F) / 2
        reps: list[FIdeal] = [self.unit_ideal()]
        for idl in ideals_of_norm_up_to(self, int(self.minkowski)):
            if not any((idl * r.inverse()).is_principal() for r in reps):
                reps.append(idl)
        self.h_F = len(reps)
        self.class_reps = reps

    def class_index(self, idl: "FIdeal") -> int:
        for i, r in enumerate(self.class_reps):
            if (idl * r.inverse()).is_principal():
                return i
        raise SearchBudgetExceeded("ideal class not matched to any representative")

    # -- misc -------------------------------------------------------------------

    def splitting(self, p: int) -> "SplittingType":
        st = self._prime_cache.get(p)
        if st is None:
            st = factor_prime(self, p)
            self._prime_cache[p] = st
        return st

    def to_json(self) -> str:
        data = {
            "n": self.n,
            "m": self.m,
            "dF": self.d_F,
            "hF": self.h_F,
            "eps": [f"{self.eps.a.numerator}/{self.eps.a.denominator}",
                    f"{self.eps.b.numerator}/{self.eps.b.denominator}"],
            "d0": self.d0,
        }
        return json.dumps(data, sort_keys=True)

    def __repr__(self):
        return "Q" if self.n == 1 else f"Q(sqrt{self.m})"

    def __eq__(self, other):
        return isinstance(other, Field) and self.n == other.n and self.m == other.m

    def __hash__(self):
        return hash((self.n, self.m))


@lru_cache(maxsize=None)
def make_field(n: int, m: int | None = None) -> Field:
    """Construct (and cache) a field descriptor; validates the radicand."""
    return Field(n, m)


def fundamental_unit_xy(m: int) -> tuple[int, int]:
    """Fundamental unit of the maximal order of Q(sqrt m), as (x, y) with
    eps = (x + y*sqrt m)/2.

    The continued fraction of sqrt(m) yields a unit of Z[sqrt m], which bounds
    the search; the minimal y >= 1 with x^2 - m y^2 = +-4 (coordinates
    integral in the maximal order) is then the fundamental unit.
    """
    a0 = isqrt(m)
    if a0 * a0 == m:
        raise NonSquarefree(f"{m} is a perfect square")
    P, Q, a = 0, 1, a0
    p_prev, p_cur = 1, a0
    q_prev, q_cur = 0, 1
    while True:
        P = a * Q - P
        Q = (m - P * P) // Q
        if Q == 1:
            break
        a = (a0 + P) // Q
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
    y_cap = 2 * q_cur
    half_ok = m % 4 == 1
    for y in range(1, y_cap + 1):
        for sgn in (-4, 4):
            t2 = m * y * y + sgn
            if t2 <= 0:
                continue
            x = isqrt(t2)
            if x * x != t2:
                continue
            if half_ok:
                if (x - y) % 2 == 0:
                    return (x, y)
            elif x % 2 == 0 and y % 2 == 0:
                return (x, y)
    raise SearchBudgetExceeded("fundamental unit scan failed below CF bound")


class FElem:
    """Element a + b*omega of a base field, exact rational coordinates."""

    __slots__ = ("F", "a", "b")

    def __init__(self, F: Field, a: Fraction, b: Fraction):
        self.F = F
        self.a = a
        self.b = b

    def _coerce(self, other) -> "FElem":
        if not isinstance(other, FElem):
            return FElem(self.F, Fraction(other), Fraction(0))
        if other.F != self.F:
            raise MixedFields(f"{self.F} vs {other.F}")
        return other

    def __add__(self, other):
        o = self._coerce(other)
        return FElem(self.F, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return FElem(self.F, -self.a, -self.b)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        F = self.F
        a = self.a * o.a + self.b * o.b * F.c0
        b = self.a * o.b + self.b * o.a + self.b * o.b * F.c1
        return FElem(F, a, b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        c = o.conj()
        den = (o * c).a  # rational: product of the conjugates
        if den == 0:
            raise ZeroDivisionError
        num = self * c
        return FElem(self.F, num.a / den, num.b / den)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __eq__(self, other):
        if other is None:
            return False
        if not isinstance(other, FElem):
            try:
                other = FElem(self.F, Fraction(other), Fraction(0))
            except (TypeError, ValueError):
                return NotImplemented
        return self.F == other.F and self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.F, self.a, self.b))

    def __repr__(self):
        if self.F.n == 1 or self.b == 0:
            return str(self.a)
        return f"({self.a}+{self.b}w)"

    def conj(self) -> "FElem":
        return FElem(self.F, self.a + self.b * self.F.c1, -self.b)

    def trace(self) -> Fraction:
        if self.F.n == 1:
            return self.a
        return 2 * self.a + self.b * self.F.c1

    def norm(self) -> Fraction:
        if self.F.n == 1:
            return self.a
        return self.a * self.a + self.F.c1 * self.a * self.b - self.F.c0 * self.b * self.b

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_integral(self) -> bool:
        return self.a.denominator == 1 and self.b.denominator == 1

    def is_rational(self) -> bool:
        return self.b == 0

    def coords(self) -> tuple[Fraction, Fraction]:
        return (self.a, self.b)

    # sqrt(m)-coordinates: x = (u + v*sqrt m)/2
    def _uv(self) -> tuple[Fraction, Fraction]:
        if self.F.c1 == 0:
            return (2 * self.a, 2 * self.b)
        return (2 * self.a + self.b, self.b)

    def embedding_sign(self, i: int) -> int:
        """Exact sign of the i-th real embedding (index 0 sends sqrt m -> +)."""
        if self.F.n == 1:
            return (self.a > 0) - (self.a < 0)
        u, v = self._uv()
        if i == 1:
            v = -v
        if v == 0:
            return (u > 0) - (u < 0)
        if u == 0:
            return 1 if v > 0 else -1
        if u > 0 and v > 0:
            return 1
        if u < 0 and v < 0:
            return -1
        lhs, rhs = u * u, self.F.m * v * v
        if u > 0:
            return 1 if lhs > rhs else (-1 if lhs < rhs else 0)
        return 1 if rhs > lhs else (-1 if rhs < lhs else 0)

    def is_totally_positive(self) -> bool:
        return all(self.embedding_sign(i) > 0 for i in range(self.F.n))

    def is_totally_negative(self) -> bool:
        return all(self.embedding_sign(i) < 0 for i in range(self.F.n))

    def embed(self, i: int) -> float:
        if self.F.n == 1:
            return float(self.a)
        return float(self.a) + float(self.b) * self.F.omega_embeddings[i]

    def embeddings(self) -> tuple[float, ...]:
        return tuple(self.embed(i) for i in range(self.F.n))

    def is_square(self) -> bool:
        return self.square_root() is not None

    def square_root(self) -> "FElem | None":
        """Exact square root in the field, if one exists."""
        F = self.F
        if self.is_zero():
            return F.zero()
        if F.n == 1:
            r = _rat_sqrt(self.a)
            return None if r is None else F.elem(r)
        # (p + q w)^2 = p^2 + q^2 c0 + (2pq + q^2 c1) w
        a, b = self.a, self.b
        if b == 0:
            r = _rat_sqrt(a)
            if r is not None:
                return F.elem(r)
            # may be sqrt of a rational times sqrt m: (q w')^2 with w' = sqrt m
            r2 = _rat_sqrt(a / F.m)
            if r2 is not None:
                return F.elem(0, r2) if F.c1 == 0 else F.elem(-r2, 2 * r2)
            return None
        # q != 0: from 2pq + q^2 c1 = b and p^2 + q^2 c0 = a
        # substitute p = (b - q^2 c1)/(2 q): quartic in q; solve via norm: N(x) = (p^2+q^2c0)^2 - ...
        nrm = self.norm()
        rn = _rat_sqrt(nrm) if nrm >= 0 else None
        if rn is None:
            return None
        for sign in (rn, -rn):
            # p^2 + c1 p q - c0 q^2 = sign and candidate trace relation
            tr = self.trace()
            # x = y^2 => trace(x) = trace(y)^2 - 2*sign(N(y)) ... solve t^2 = tr + 2*sign
            t2 = tr + 2 * sign
            if t2 < 0:
                continue
            t = _rat_sqrt(t2)
            if t is None:
                continue
            for tt in {t, -t}:
                if tt == 0:
                    continue
                # y has trace tt and norm sign: y = (tt +- sqrt(tt^2-4 sign))/2 as element
                # solve y from linear system: y + conj(y) = tt, y*conj(y) = sign
                # y = a' + b' w with 2a' + b' c1 = tt and norm = sign
                # b' from: y - conj(y) = b'(2w - c1) = +-sqrt(d) ... use direct: y^2 = self
                # parametrize b' via y^2 relation: (y^2).b = b => 2 a' b' + b'^2 c1 = b
                # with a' = (tt - b' c1)/2: b'(tt - b' c1) + b'^2 c1 = b => b' tt = b
                if tt == 0:
                    continue
                bprime = self.b / tt
                aprime = (tt - bprime * F.c1) / 2
                y = F.elem(aprime, bprime)
                if y * y == self:
                    return y
        return None


def _rat_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    rn = isqrt(x.numerator)
    rd = isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


def elem_op(op: str, x: FElem, y: FElem | None = None):
    """Dispatch for the elementary operations (CLI plumbing)."""
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "conj":
        return x.conj()
    if op == "norm":
        return x.norm()
    if op == "trace":
        return x.trace()
    if op == "is_totally_positive":
        return x.is_totally_positive()
    raise ValueError(f"unknown op {op}")


class FIdeal:
    """Fractional ideal as a scaled integer HNF lattice over {1, omega}.

    The ideal equals (rows of num)/den; canonical after gcd reduction, so
    equality and hashing are structural.  Integral iff den == 1.
    """

    __slots__ = ("F", "num", "den", "_norm")

    def __init__(self, F: Field, num: list[list[int]], den: int):
        g = den
        for r in num:
            for x in r:
                g = gcd(g, x)
        if g > 1:
            num = [[x // g for x in r] for r in num]
            den //= g
        self.F = F
        self.num = num
        self.den = den
        self._norm = None

    @staticmethod
    def from_generators(F: Field, gens: list[FElem]) -> "FIdeal":
        mults = F.maximal_order_basis()
        prods = [g * mul for g in gens for mul in mults]
        den = 1
        for x in prods:
            den = _lcm(den, x.a.denominator)
            den = _lcm(den, x.b.denominator)
        rows = []
        for x in prods:
            if F.n == 1:
                rows.append([int(x.a * den)])
            else:
                rows.append([int(x.a * den), int(x.b * den)])
        h = hnf_lattice(rows)
        if len(h) != F.n:
            raise ZeroDivisionError("zero ideal")
        return FIdeal(F, h, den)

    def basis_elems(self) -> list[FElem]:
        if self.F.n == 1:
            return [self.F.elem(Fraction(self.num[0][0], self.den))]
        return [
            self.F.elem(Fraction(r[0], self.den), Fraction(r[1], self.den)) for r in self.num
        ]

    def norm(self) -> Fraction:
        if self._norm is None:
            det = 1
            for i in range(len(self.num)):
                det *= self.num[i][i]
            self._norm = Fraction(abs(det), self.den ** self.F.n)
        return self._norm

    real_norm = norm

    def conj(self) -> "FIdeal":
        return FIdeal.from_generators(self.F, [e.conj() for e in self.basis_elems()])

    def __mul__(self, other):
        if isinstance(other, FElem):
            other = FIdeal.from_generators(self.F, [other])
        gens = [x * y for x in self.basis_elems() for y in other.basis_elems()]
        return FIdeal.from_generators(self.F, gens)

    def inverse(self) -> "FIdeal":
        if self.F.n == 1:
            return FIdeal.from_generators(self.F, [self.F.elem(1 / self.norm())])
        inv_n = self.F.elem(1 / self.norm())
        return FIdeal.from_generators(self.F, [e.conj() * inv_n for e in self.basis_elems()])

    def __pow__(self, k: int) -> "FIdeal":
        if k < 0:
            return self.inverse() ** (-k)
        out = self.F.unit_ideal()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def contains(self, x: FElem) -> bool:
        va = x.a * self.den
        vb = x.b * self.den
        if va.denominator != 1 or vb.denominator != 1:
            return False
        if self.F.n == 1:
            return int(va) % self.num[0][0] == 0
        mat = [
            [Fraction(self.num[0][0]), Fraction(self.num[1][0])],
            [Fraction(self.num[0][1]), Fraction(self.num[1][1])],
        ]
        sol = solve_exact(mat, [Fraction(int(va)), Fraction(int(vb))])
        return sol is not None and all(s.denominator == 1 for s in sol)

    def is_integral(self) -> bool:
        return self.den == 1

    def divides(self, other: "FIdeal") -> bool:
        return all(self.contains(e) for e in other.basis_elems())

    def __eq__(self, other):
        return (
            isinstance(other, FIdeal)
            and self.F == other.F
            and self.den == other.den
            and self.num == other.num
        )

    def __hash__(self):
        return hash((self.F, self.den, tuple(tuple(r) for r in self.num)))

    def __repr__(self):
        return f"FIdeal({self.num}/{self.den}, norm={self.norm()})"

    def valuation(self, prime: "PrimeIdeal") -> int:
        """Exact valuation at a prime of the base field."""
        num_ideal = FIdeal(self.F, [list(r) for r in self.num], 1)
        v = 0
        cur = num_ideal
        pinv = prime.ideal.inverse()
        while True:
            nxt = cur * pinv
            if not nxt.is_integral():
                break
            cur = nxt
            v += 1
        vp_den = 0
        d = self.den
        while d % prime.p == 0:
            d //= prime.p
            vp_den += 1
        return v - prime.e * vp_den

    def is_principal(self, budget: int | None = None) -> bool:
        try:
            return self.principal_gen(budget) is not None
        except SearchBudgetExceeded:
            raise

    def principal_gen(self, budget: int | None = None) -> FElem | None:
        """Generator of matching norm, reduced into the unit fundamental domain.

        Any generator has a unit multiple with both |sigma_i(x)| <= sqrt(N)*eps,
        which pins its second coordinate to a finite range; for each such
        coordinate the norm equation is a quadratic in the first, solved
        exactly.  An empty scan certifies non-principality.
        """
        F = self.F
        target = self.norm()
        if F.n == 1:
            return F.elem(Fraction(self.num[0][0], self.den))
        budget = budget if budget is not None else F.unit_budget
        eps1 = F.eps.embed(0)
        lim = math.sqrt(float(target)) * eps1 * 1.0000001 + 1e-12
        b0, b1 = self.basis_elems()
        e00, e01 = b0.embed(0), b0.embed(1)
        e10, e11 = b1.embed(0), b1.embed(1)
        det = e00 * e11 - e01 * e10
        r1_max = int((abs(e00) + abs(e01)) * lim / abs(det)) + 2
        if 2 * r1_max + 1 > budget:
            raise SearchBudgetExceeded("principality search budget exhausted")
        A = b0.norm()
        B = (b0 * b1.conj() + b1 * b0.conj()).a  # Tr-type cross coefficient
        C = b1.norm()
        for r1 in range(-r1_max, r1_max + 1):
            for tt in (target, -target):
                # A r0^2 + B r1 r0 + (C r1^2 - tt) = 0
                disc = (B * r1) * (B * r1) - 4 * A * (C * r1 * r1 - tt)
                if disc < 0:
                    continue
                s = _rat_sqrt(disc)
                if s is None:
                    continue
                for sgn in (s, -s):
                    r0f = (-B * r1 + sgn) / (2 * A)
                    if r0f.denominator != 1:
                        continue
                    r0 = int(r0f)
                    if r0 == 0 and r1 == 0:
                        continue
                    x = FElem(F, r0 * b0.a + r1 * b1.a, r0 * b0.b + r1 * b1.b)
                    if abs(x.norm()) == target:
                        return x
        return None


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@dataclass(frozen=True)
class PrimeIdeal:
    """A prime of the base field above p; second_gen has valuation exactly 1."""

    p: int
    e: int
    f: int
    ideal: FIdeal
    second_gen: FElem

    def norm(self) -> int:
        return self.p**self.f

    def __repr__(self):
        return f"P({self.p};e={self.e},f={self.f})"


@dataclass(frozen=True)
class SplittingType:
    p: int
    primes: tuple[PrimeIdeal, ...]

    def sum_ef(self) -> int:
        return sum(pi.e * pi.f for pi in self.primes)


def factor_prime(F: Field, p: int) -> SplittingType:
    """Kummer-Dedekind factorization of (p) via the minimal polynomial of omega.

    Z[omega] is the maximal order for both supported degrees, so the method
    applies at every prime.
    """
    if not is_prime_int(p):
        raise ValueError(f"{p} is not prime")
    if F.n == 1:
        pi = PrimeIdeal(p, 1, 1, F.ideal(p), F.elem(p))
        return SplittingType(p, (pi,))
    c0, c1 = F.c0, F.c1
    if F.d_F % p == 0:
        # ramified: double root of x^2 - c1 x - c0 mod p
        if p == 2:
            r = next(r for r in range(2) if (r * r - c1 * r - c0) % 2 == 0)
        else:
            r = (c1 * pow(2, -1, p)) % p
        g = F.omega() - F.elem(r)
        idl = F.ideal(F.elem(p), g)
        assert idl.norm() == p
        pi = PrimeIdeal(p, 2, 1, idl, g)
        return SplittingType(p, (pi,))
    # unramified: split iff disc is a QR mod p
    disc = c1 * c1 + 4 * c0  # equals d_F or d_F; nonzero mod p here
    if p == 2:
        roots = [r for r in range(2) if (r * r - c1 * r - c0) % 2 == 0]
        split = len(roots) == 2
        rts = roots
    else:
        s = sqrt_mod_p(disc % p, p)
        split = s is not None
        rts = [] if s is None else sorted({(c1 + s) * pow(2, -1, p) % p, (c1 - s) * pow(2, -1, p) % p})
    if not split:
        pi = PrimeIdeal(p, 1, 2, F.ideal(p), F.elem(p))
        return SplittingType(p, (pi,))
    primes = []
    for r in rts:
        # lift r so that omega - r has valuation exactly 1 at this prime
        val = (r * r - c1 * r - c0) % (p * p)
        rr = r if val != 0 else r + p
        g = F.omega() - F.elem(rr)
        idl = F.ideal(F.elem(p), F.omega() - F.elem(r))
        assert idl.norm() == p
        primes.append(PrimeIdeal(p, 1, 1, idl, g))
    return SplittingType(p, tuple(primes))


def class_group_F(F: Field) -> tuple[int, list[FIdeal]]:
    """(h_F, class representatives); already computed at field construction."""
    return F.h_F, F.class_reps


def ideals_of_norm_up_to(F: Field, bound: int) -> list["FIdeal"]:
    """All integral ideals of norm in [2, bound], sorted by norm."""
    primes: list[PrimeIdeal] = []
    for p in primes_up_to(bound):
        for pi in F.splitting(p).primes:
            if pi.norm() <= bound:
                primes.append(pi)
    out: list[FIdeal] = []

    def rec(i: int, cur: FIdeal, nm: int):
        if i == len(primes):
            if nm > 1:
                out.append(cur)
            return
        rec(i + 1, cur, nm)
        nm2, cur2 = nm, cur
        while True:
            nm2 *= primes[i].norm()
            if nm2 > bound:
                break
            cur2 = cur2 * primes[i].ideal
            rec(i + 1, cur2, nm2)

    rec(0, F.unit_ideal(), 1)
    out.sort(key=lambda idl: idl.norm())
    return out


def factor_element_ideal(F: Field, x: FElem) -> list[tuple[PrimeIdeal, int]]:
    """Prime factorization of the principal ideal (x), x integral and nonzero."""
    if x.is_zero():
        raise ZeroDivisionError
    n = abs(x.norm())
    assert n.denominator == 1
    n = int(n)
    out = []
    idl = F.ideal(x)
    for p in _prime_divisors(n):
        for pi in F.splitting(p).primes:
            v = idl.valuation(pi)
            if v:
                out.append((pi, v))
    return out


def _prime_divisors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out
