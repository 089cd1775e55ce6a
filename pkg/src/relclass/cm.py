"""Totally imaginary quadratic extensions K = F(sqrt(delta)) of a real base field.

The maximal order is assembled from local data: at each prime the largest j
with an integral (b + sqrt(delta))/pi^j is found (odd primes: j = v(delta)//2
with b = 0; primes over 2: bounded residue search), and the global module
o_K = o_F + c^{-1}(b + sqrt(delta)) is glued by CRT.  Ideals of K are integer
HNF lattices over the fixed basis {1, omega, sqrt(delta), omega*sqrt(delta)};
products and trace forms run through precomputed integer structure constants.

The class group is built by subgroup closure over the prime generators with
discrete-log bookkeeping, so conjugation (which is inversion on classes when
the base class group is trivial) and the orbit count come from the group
structure; a slower pairwise-partition fallback covers nontrivial base class
groups.

Fields with o_K^x != o_F^x (the finitely many unit-exceptional extensions,
F(zeta_6) = F(sqrt(-3)) among them) are constructed and flagged; the
classification machinery stamps their reports non-applicable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import (
    DecompositionFailed,
    NotIntegral,
    NotTotallyNegative,
    SearchBudgetExceeded,
)
from .field import FElem, Field, FIdeal, PrimeIdeal, primes_up_to
from .finitefield import ResidueField
from .intmat import hnf_lattice, zspan_kernel, zspan_solve
from .lattice import gauss_reduce_binary, lll_reduce_gram, short_vectors


class KElem:
    """Element x + y*sqrt(delta) of K, with x, y in F."""

    __slots__ = ("K", "x", "y")

    def __init__(self, K: "CMField", x: FElem, y: FElem):
        self.K = K
        self.x = x
        self.y = y

    def __add__(self, o):
        return KElem(self.K, self.x + o.x, self.y + o.y)

    def __sub__(self, o):
        return KElem(self.K, self.x - o.x, self.y - o.y)

    def __neg__(self):
        return KElem(self.K, -self.x, -self.y)

    def __mul__(self, o):
        if isinstance(o, FElem):
            return KElem(self.K, self.x * o, self.y * o)
        d = self.K.delta
        return KElem(
            self.K,
            self.x * o.x + self.y * o.y * d,
            self.x * o.y + self.y * o.x,
        )

    def scale(self, r) -> "KElem":
        f = self.K.F.elem(Fraction(r))
        return KElem(self.K, self.x * f, self.y * f)

    def conj(self) -> "KElem":
        return KElem(self.K, self.x, -self.y)

    def rel_norm(self) -> FElem:
        return self.x * self.x - self.K.delta * self.y * self.y

    def rel_trace(self) -> FElem:
        return self.x + self.x

    def abs_norm(self) -> Fraction:
        return self.rel_norm().norm()

    def abs_trace(self) -> Fraction:
        return self.rel_trace().trace()

    def is_zero(self) -> bool:
        return self.x.is_zero() and self.y.is_zero()

    def is_integral(self) -> bool:
        return self.rel_trace().is_integral() and self.rel_norm().is_integral()

    def inverse(self) -> "KElem":
        n = self.rel_norm()
        if n.is_zero():
            raise ZeroDivisionError
        c = self.conj()
        inv = self.K.F.one() / n
        return KElem(self.K, c.x * inv, c.y * inv)

    def __truediv__(self, o):
        if isinstance(o, FElem):
            return KElem(self.K, self.x / o, self.y / o)
        return self * o.inverse()

    def __eq__(self, o):
        return isinstance(o, KElem) and self.K is o.K and self.x == o.x and self.y == o.y

    def __hash__(self):
        return hash((id(self.K), self.x, self.y))

    def coords(self) -> list[Fraction]:
        """Coordinates over {1, omega, sqrt d, omega sqrt d} (length 2n)."""
        if self.K.F.n == 1:
            return [self.x.a, self.y.a]
        return [self.x.a, self.x.b, self.y.a, self.y.b]

    def __repr__(self):
        return f"({self.x}) + ({self.y})*sqrt(d)"


@dataclass(frozen=True)
class KPrime:
    """Prime of K above a base prime; rel_f is the residue degree of K/F."""

    base: PrimeIdeal
    rel_f: int
    ramified: bool
    ideal: "KIdeal"

    def norm(self) -> int:
        return self.base.norm() ** self.rel_f

    def __repr__(self):
        kind = "ram" if self.ramified else ("inert" if self.rel_f == 2 else "split")
        return f"KP({self.base.p},{kind},N={self.norm()})"


class CMField:
    def __init__(self, F: Field, delta: FElem, budget: int = 10**6):
        if not isinstance(delta, FElem):
            delta = F.elem(Fraction(delta))
        if not delta.is_integral():
            raise NotIntegral(f"delta = {delta} is not integral")
        if not delta.is_totally_negative():
            raise NotTotallyNegative(f"delta = {delta} is not totally negative")
        self.F = F
        self.delta = delta
        self.budget = budget
        self.deg = 2 * F.n
        self._build_order()
        self._build_mult_tables()
        self._class_data = None
        self._kprime_cache: dict = {}

    # -- multiplication structure over the Z-basis of o_K ------------------------

    def _build_mult_tables(self):
        """Structure constants, conjugation matrix, and trace form of o_K.

        KIdeal rows live in coordinates over the order basis, so a module is
        integral exactly when its canonical denominator is 1, and covolumes
        are plain determinants.
        """
        deg = self.deg
        basis = self.order_basis
        amb = [z.coords() for z in basis]  # rows: ambient coordinates
        inv = _rational_inverse(amb)

        def to_order(z: KElem) -> list[Fraction]:
            c = z.coords()
            return [sum(c[a] * inv[a][b] for a in range(deg)) for b in range(deg)]

        self._to_order = to_order
        table = [[None] * deg for _ in range(deg)]
        for i in range(deg):
            for j in range(i, deg):
                row = to_order(basis[i] * basis[j])
                assert all(c.denominator == 1 for c in row)
                t = tuple(int(c) for c in row)
                table[i][j] = t
                table[j][i] = t
        self._mt = table
        conj_rows = []
        g = [[0] * deg for _ in range(deg)]
        for i in range(deg):
            row = to_order(basis[i].conj())
            assert all(c.denominator == 1 for c in row)
            conj_rows.append(tuple(int(c) for c in row))
            for j in range(deg):
                tr = (basis[i] * basis[j].conj()).abs_trace()
                assert tr.denominator == 1
                g[i][j] = int(tr)
        self._conj_mat = conj_rows
        self._trace_mat = g

    def _row_mul(self, r1, r2):
        deg = self.deg
        out = [0] * deg
        mt = self._mt
        for i in range(deg):
            a = r1[i]
            if not a:
                continue
            for j in range(deg):
                b = r2[j]
                if not b:
                    continue
                t = mt[i][j]
                ab = a * b
                for kk in range(deg):
                    out[kk] += ab * t[kk]
        return out

    def conj_row(self, row):
        deg = self.deg
        out = [0] * deg
        for i in range(deg):
            a = row[i]
            if not a:
                continue
            c = self._conj_mat[i]
            for kk in range(deg):
                out[kk] += a * c[kk]
        return out

    # -- order construction ------------------------------------------------------

    def _build_order(self):
        F = self.F
        delta = self.delta
        four_delta = F.ideal(delta * F.elem(4))
        local: list[tuple[PrimeIdeal, int, FElem]] = []
        c_ideal = F.unit_ideal()
        ram_data = []
        nrm = int(abs((delta * F.elem(4)).norm()))
        for p in sorted(set(_prime_divisors(nrm))):
            for pr in F.splitting(p).primes:
                v4d = four_delta.valuation(pr)
                if v4d == 0:
                    continue
                if p != 2:
                    vd = F.ideal(delta).valuation(pr)
                    j = vd // 2
                    b = F.zero()
                else:
                    j, b = self._two_adic_j(pr, v4d)
                if j > 0:
                    local.append((pr, j, b))
                    c_ideal = c_ideal * (pr.ideal**j)
                vdisc = v4d - 2 * j
                if vdisc > 0:
                    ram_data.append((pr, vdisc))
        self.c_ideal = c_ideal
        self.b_shift = self._crt_shift(local)
        self.rel_disc_primes = sorted(
            ram_data, key=lambda t: (t[0].p, t[0].norm(), str(t[0].second_gen))
        )
        self.rel_disc = F.ideal(delta * F.elem(4)) * (c_ideal.inverse() ** 2)
        assert self.rel_disc.is_integral()
        self.rel_disc_norm = int(self.rel_disc.norm())
        self.abs_disc = F.d_F**2 * self.rel_disc_norm
        beta = KElem(self, self.b_shift, F.one())
        basis: list[KElem] = [KElem(self, t, F.zero()) for t in F.maximal_order_basis()]
        for t in self.c_ideal.inverse().basis_elems():
            basis.append(beta * t)
        for z in basis:
            assert z.is_integral()
        self.order_basis = basis
        self._max_order: "KIdeal | None" = None
        self._order_covol: Fraction | None = None
        self.unit_equal = self._units_equal()

    def _two_adic_j(self, pr: PrimeIdeal, v4d: int) -> tuple[int, FElem]:
        F = self.F
        jmax = v4d // 2
        for j in range(jmax, 0, -1):
            p2j = pr.ideal ** (2 * j)
            pj = pr.ideal**j
            for b in _ideal_transversal(F, p2j):
                if pj.contains(b + b) and p2j.contains(b * b - self.delta):
                    return (j, b)
        return (0, F.zero())

    def _crt_shift(self, local) -> FElem:
        F = self.F
        nontrivial = [(pr, j, b) for (pr, j, b) in local if not b.is_zero()]
        if not nontrivial:
            return F.zero()
        modulus_odd = F.unit_ideal()
        for pr, j, b in local:
            if b.is_zero() and j > 0:
                modulus_odd = modulus_odd * (pr.ideal**j)
        sol = F.zero()
        mod_sol = modulus_odd
        for pr, j, b in nontrivial:
            mod_new = pr.ideal ** (2 * j)
            e = _split_one(F, mod_sol, mod_new)
            sol = sol + (b - sol) * e
            mod_sol = mod_sol * mod_new
        return sol

    def _units_equal(self) -> bool:
        for v in _exceptional_radicands(self.F):
            if (self.delta * v).is_square():
                return False
        return True

    # -- elements -----------------------------------------------------------------

    def elem(self, x, y=0) -> KElem:
        F = self.F
        xx = x if isinstance(x, FElem) else F.elem(Fraction(x))
        yy = y if isinstance(y, FElem) else F.elem(Fraction(y))
        return KElem(self, xx, yy)

    def zero(self) -> KElem:
        return self.elem(0, 0)

    def one(self) -> KElem:
        return self.elem(1, 0)

    def sqrt_delta(self) -> KElem:
        return self.elem(0, 1)

    def from_coords(self, coords) -> KElem:
        F = self.F
        if F.n == 1:
            return KElem(self, F.elem(coords[0]), F.elem(coords[1]))
        return KElem(self, F.elem(coords[0], coords[1]), F.elem(coords[2], coords[3]))

    def maximal_order(self) -> "KIdeal":
        if self._max_order is None:
            ident = [[1 if j == i else 0 for j in range(self.deg)] for i in range(self.deg)]
            self._max_order = KIdeal(self, ident, 1)
        return self._max_order

    def ideal(self, *gens) -> "KIdeal":
        elems = [g if isinstance(g, KElem) else self.elem(g) for g in gens]
        return KIdeal.from_generators(self, elems)

    def extend_ideal(self, a: FIdeal) -> "KIdeal":
        gens = [KElem(self, e, self.F.zero()) for e in a.basis_elems()]
        return KIdeal.from_generators(self, gens)

    # -- primes ---------------------------------------------------------------------

    def primes_above(self, pr: PrimeIdeal) -> list[KPrime]:
        key = (pr.p, pr.second_gen.a, pr.second_gen.b)
        if key in self._kprime_cache:
            return self._kprime_cache[key]
        F = self.F
        cinv = self.c_ideal.inverse()
        j = -cinv.valuation(pr)
        tau = _elem_with_valuation(F, cinv, pr, -j)
        w = KElem(self, tau * self.b_shift, tau)
        assert w.is_integral()
        B = w.rel_trace()
        C = -w.rel_norm()
        rf = ResidueField(F, pr)
        roots = rf.quadratic_roots(rf.reduce_integral(B), rf.reduce_integral(C))
        pK = self.extend_ideal(pr.ideal)
        out: list[KPrime] = []
        ram = self.rel_disc.valuation(pr) > 0
        if not roots:
            out.append(KPrime(pr, 2, False, pK))
        else:
            for r in roots:
                g = w - KElem(self, _lift_residue(F, rf, r), F.zero())
                ideal = KIdeal.from_generators(self, pK.basis_kelems() + [g])
                out.append(KPrime(pr, 1, len(roots) == 1, ideal))
        for kp in out:
            expected = pr.norm() ** kp.rel_f
            assert kp.ideal.abs_norm() == expected, (pr, kp.ideal.abs_norm(), expected)
        assert (len(roots) == 1) == ram, f"residue factorization vs discriminant at {pr}"
        self._kprime_cache[key] = out
        return out

    def splitting_kind(self, pr: PrimeIdeal) -> str:
        ks = self.primes_above(pr)
        if len(ks) == 2:
            return "split"
        return "ramified" if ks[0].ramified else "inert"

    def kprimes_up_to(self, bound: float) -> list[KPrime]:
        out = []
        for p in primes_up_to(int(bound)):
            for pr in self.F.splitting(p).primes:
                if pr.norm() > bound:
                    continue
                for kp in self.primes_above(pr):
                    if kp.norm() <= bound:
                        out.append(kp)
        out.sort(key=lambda kp: (kp.norm(), kp.base.p, str(kp.base.second_gen), kp.ideal.key()))
        return out

    # -- class group -------------------------------------------------------------------

    def minkowski_bound(self) -> float:
        nk = self.deg
        fac = math.factorial(nk) / nk**nk
        return fac * (4 / math.pi) ** self.F.n * math.sqrt(self.abs_disc) * (1 + 1e-12)

    def class_data(self) -> "ClassData":
        if self._class_data is None:
            self._class_data = _compute_class_data(self)
        return self._class_data

    def integral_ideals_up_to(self, bound: float) -> list["KIdeal"]:
        """All integral ideals of norm in [1, bound] (prime products)."""
        kps = self.kprimes_up_to(bound)
        out = [self.maximal_order()]

        def rec(i: int, cur: KIdeal, nm: int):
            if i == len(kps):
                if nm > 1:
                    out.append(cur)
                return
            rec(i + 1, cur, nm)
            nm2, cur2 = nm, cur
            while True:
                nm2 *= kps[i].norm()
                if nm2 > bound:
                    break
                cur2 = cur2 * kps[i].ideal
                rec(i + 1, cur2, nm2)

        rec(0, self.maximal_order(), 1)
        uniq = {}
        for idl in out:
            uniq.setdefault(idl.key(), idl)
        return sorted(uniq.values(), key=lambda i: (i.abs_norm(), i.key()))

    def to_json(self) -> str:
        cd = self.class_data()
        data = {
            "base": json.loads(self.F.to_json()),
            "delta": [
                f"{self.delta.a.numerator}/{self.delta.a.denominator}",
                f"{self.delta.b.numerator}/{self.delta.b.denominator}",
            ],
            "reldisc_norm": self.rel_disc_norm,
            "hK": cd.h_K,
            "h": cd.h,
            "orbits": cd.orbits,
            "unit_equal": self.unit_equal,
        }
        return json.dumps(data, sort_keys=True)

    def __repr__(self):
        return f"{self.F}(sqrt({self.delta}))"


def make_cm(F: Field, delta) -> CMField:
    """Construct K = F(sqrt delta), delta integral and totally negative."""
    return CMField(F, delta if isinstance(delta, FElem) else F.elem(Fraction(delta)))


class KIdeal:
    """Fractional o_K-module of full rank as an integer HNF lattice / den."""

    __slots__ = ("K", "num", "den", "_basis", "_relnorm", "_absnorm", "_gram", "_red")

    def __init__(self, K: CMField, num: list[list[int]], den: int):
        g = den
        for r in num:
            for x in r:
                g = gcd(g, x)
        if g > 1:
            num = [[x // g for x in r] for r in num]
            den //= g
        self.K = K
        self.num = num
        self.den = den
        self._basis = None
        self._relnorm = None
        self._absnorm = None
        self._gram = None
        self._red = None

    @staticmethod
    def from_rows(K: CMField, rows: list[list[int]], den: int) -> "KIdeal":
        h = hnf_lattice(rows)
        if len(h) != K.deg:
            raise ZeroDivisionError("zero module")
        return KIdeal(K, h, den)

    @staticmethod
    def from_generators(K: CMField, gens: list[KElem]) -> "KIdeal":
        coords = [K._to_order(g * b) for g in gens for b in K.order_basis]
        den = 1
        for row in coords:
            for c in row:
                den = _lcm(den, c.denominator)
        rows = [[int(c * den) for c in row] for row in coords]
        return KIdeal.from_rows(K, rows, den)

    def key(self):
        return (self.den, tuple(tuple(r) for r in self.num))

    def basis_kelems(self) -> list[KElem]:
        if self._basis is None:
            ob = self.K.order_basis
            out = []
            for r in self.num:
                z = None
                for c, b in zip(r, ob):
                    if c:
                        t = b.scale(Fraction(c, self.den))
                        z = t if z is None else z + t
                out.append(z if z is not None else self.K.zero())
            self._basis = out
        return self._basis

    def abs_norm(self) -> Fraction:
        if self._absnorm is None:
            det = 1
            for i in range(len(self.num)):
                det *= self.num[i][i]
            self._absnorm = Fraction(abs(det), self.den**self.K.deg)
        return self._absnorm

    def rel_norm(self) -> FIdeal:
        """Norm ideal of F, generated by element norms."""
        if self._relnorm is None:
            bs = self.basis_kelems()
            gens = [z.rel_norm() for z in bs]
            for i in range(len(bs)):
                for jj in range(i + 1, len(bs)):
                    gens.append((bs[i] * bs[jj].conj()).rel_trace())
            self._relnorm = FIdeal.from_generators(self.K.F, gens)
        return self._relnorm

    def conj(self) -> "KIdeal":
        rows = [self.K.conj_row(r) for r in self.num]
        return KIdeal.from_rows(self.K, rows, self.den)

    def __mul__(self, other):
        K = self.K
        if isinstance(other, KElem):
            oc = K._to_order(other)
            den2 = 1
            for c in oc:
                den2 = _lcm(den2, c.denominator)
            orow = [int(c * den2) for c in oc]
            rows = [K._row_mul(r, orow) for r in self.num]
            return KIdeal.from_rows(K, rows, self.den * den2)
        rows = [K._row_mul(r1, r2) for r1 in self.num for r2 in other.num]
        return KIdeal.from_rows(K, rows, self.den * other.den)

    def scale(self, r) -> "KIdeal":
        r = Fraction(r)
        num = [[x * r.numerator for x in row] for row in self.num]
        return KIdeal(self.K, num, self.den * r.denominator)

    def inverse(self) -> "KIdeal":
        nm = self.rel_norm()
        cj = self.conj()
        inv = self.K.extend_ideal(nm.inverse())
        return cj * inv

    def __pow__(self, k: int) -> "KIdeal":
        if k < 0:
            return self.inverse() ** (-k)
        out = self.K.maximal_order()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def contains(self, z: KElem) -> bool:
        scaled = [c * self.den for c in self.K._to_order(z)]
        if any(s.denominator != 1 for s in scaled):
            return False
        target = [int(s) for s in scaled]
        return self._contains_row(target)

    def _contains_row(self, target: list[int]) -> bool:
        # back-substitution against the lower-left HNF basis
        n = len(target)
        t = list(target)
        piv = {}
        for r in self.num:
            c = next(k for k in range(n) if r[k] != 0)
            piv[c] = r
        for c in range(n):
            if t[c] == 0:
                continue
            r = piv.get(c)
            if r is None or t[c] % r[c] != 0:
                return False
            q = t[c] // r[c]
            for k in range(c, n):
                t[k] -= q * r[k]
        return all(v == 0 for v in t)

    def is_integral(self) -> bool:
        return self.den == 1

    def divides(self, other: "KIdeal") -> bool:
        """self | other, i.e. other subset of self (lattice containment)."""
        s = _lcm(self.den, other.den)
        self_rows = [[x * (s // self.den) for x in r] for r in self.num]
        aux = KIdeal.__new__(KIdeal)
        aux.K = self.K
        aux.num = self_rows
        aux.den = 1
        aux._basis = aux._relnorm = aux._absnorm = aux._gram = None
        for r in other.num:
            row = [x * (s // other.den) for x in r]
            if not aux._contains_row(row):
                return False
        return True

    def valuation(self, kp: KPrime) -> int:
        num_part = KIdeal(self.K, [list(r) for r in self.num], 1)
        v = 0
        cur = num_part
        pinv = kp.ideal.inverse()
        mo = self.K.maximal_order()
        while True:
            nxt = cur * pinv
            if not mo.divides(nxt):
                break
            cur = nxt
            v += 1
        vp_den = 0
        d = self.den
        while d % kp.base.p == 0:
            d //= kp.base.p
            vp_den += 1
        e_total = kp.base.e * (2 if kp.ramified else 1)
        return v - e_total * vp_den

    def __eq__(self, other):
        return (
            isinstance(other, KIdeal)
            and self.K is other.K
            and self.den == other.den
            and self.num == other.num
        )

    def __hash__(self):
        return hash((id(self.K), self.den, tuple(tuple(r) for r in self.num)))

    def __repr__(self):
        return f"KIdeal(N={self.abs_norm()})"

    # -- metric structure ---------------------------------------------------------

    def gram(self) -> list[list[Fraction]]:
        """Exact Gram matrix of Tr(z conj z) on the basis rows."""
        if self._gram is None:
            G = self.K._trace_mat
            n = len(self.num)
            d2 = self.den * self.den
            out = []
            for i in range(n):
                ri = self.num[i]
                row = []
                Gri = [sum(ri[a] * G[a][b] for a in range(n)) for b in range(n)]
                for j in range(n):
                    rj = self.num[j]
                    row.append(Fraction(sum(Gri[b] * rj[b] for b in range(n)), d2))
                out.append(row)
            self._gram = out
        return self._gram

    def shortest_vectors(self, q_bound) -> list[KElem]:
        if self._red is None:
            self._red = lll_reduce_gram(self.gram())
        G, U = self._red
        vecs = short_vectors(G, q_bound, reduce_first=False)
        bs = self.basis_kelems()
        n = len(bs)
        out = []
        for v in vecs:
            w = [sum(v[i] * U[i][j] for i in range(n)) for j in range(n)]
            z = None
            for c, b in zip(w, bs):
                if c:
                    t = b.scale(c)
                    z = t if z is None else z + t
            out.append(z)
        return out

    def small_nonzero(self) -> KElem:
        """A nonzero element of minimal absolute norm among short vectors."""
        base = float(2 * self.K.deg) * float(self.abs_norm()) ** (1.0 / self.K.F.n) + 1.0
        bound = Fraction(math.ceil(base * 2**10), 2**10)
        vecs = []
        while not vecs:
            vecs = self.shortest_vectors(bound)
            bound = bound * 2
        best = None
        for z in vecs:
            nz = z.abs_norm()
            if best is None or nz < best[0]:
                best = (nz, z)
        return best[1]

    def principal_gen(self, budget: int | None = None) -> KElem | None:
        """Search z in the module with |N(z)| = N(module), unit-window bounded.

        Any generator moves into the window {Tr(z conj z) <= 2 sqrt(N) (eps+1/eps)}
        under multiplication by units, so an empty window certifies
        non-principality.
        """
        K = self.K
        t = self.abs_norm()
        budget = budget if budget is not None else K.budget
        if K.F.n == 1:
            q_bound = 2 * t
        else:
            e1 = K.F.eps.embed(0)
            bf = 2.0 * math.sqrt(float(t)) * (e1 + 1.0 / e1) * (1 + 1e-9)
            q_bound = Fraction(math.ceil(bf * 2**20), 2**20)
        for z in self.shortest_vectors(q_bound):
            if z.abs_norm() == t:
                return z
        return None

    def is_principal(self, budget: int | None = None) -> bool:
        return self.principal_gen(budget) is not None

    def in_same_class(self, other: "KIdeal") -> bool:
        if self.K.F.h_F == 1:
            q = self * other.conj()
            q = q.scale(q.den)
            return q.is_principal()
        q = self * other.inverse()
        q = q.scale(q.den)
        return q.is_principal()

    def small_class_rep(self) -> "KIdeal":
        """Integral ideal of Minkowski-bounded norm in the same class."""
        q = self.scale(self.den) if self.den != 1 else self
        g = q.gram()
        # shortest nonzero vector: grow the bound until something appears
        base = float(2 * q.abs_norm() ** Fraction(1, self.K.F.n))
        bound = Fraction(math.ceil(base * self.K.F.n * 1.2 * 2**10), 2**10)
        vecs = []
        while not vecs:
            vecs = short_vectors(g, bound)
            bound = bound * 2
        best = None
        for z in (q._vec_to_elem(v) for v in vecs):
            nz = z.abs_norm()
            if best is None or nz < best[0]:
                best = (nz, z)
        z = best[1]
        w = q.inverse() * z
        red = w.conj()
        red = red.scale(red.den)
        return red

    def _vec_to_elem(self, v) -> KElem:
        bs = self.basis_kelems()
        z = None
        for c, b in zip(v, bs):
            if c:
                t = b.scale(c)
                z = t if z is None else z + t
        return z

    def reduced_form_key(self):
        """Class invariant for degree-2 K: the reduced binary form of the norm lattice."""
        K = self.K
        assert K.F.n == 1
        g = self.gram()
        n = self.abs_norm()
        aa = g[0][0] / (2 * n)
        bb = g[0][1] / n
        cc = g[1][1] / (2 * n)
        assert aa.denominator == bb.denominator == cc.denominator == 1
        return gauss_reduce_binary(int(aa), int(bb), int(cc))


@dataclass
class ClassData:
    h_K: int
    reps: list[KIdeal]
    conj_pairs: list[int]
    orbits: int
    h: int
    h_prime: int
    N_reps: list[KIdeal]
    flagged: bool
    dlogs: list[tuple[int, ...]] | None = None
    generators: list[KPrime] | None = None
    relations: list[list[int]] | None = None


def _compute_class_data(K: CMField) -> ClassData:
    if K.F.h_F == 1:
        return _class_data_by_closure(K)
    return _class_data_by_partition(K)


def _class_data_by_closure(K: CMField) -> ClassData:
    """Subgroup closure over prime generators with discrete logs.

    Valid when the base class group is trivial: conjugation is then inversion
    on classes, and the orbit count equals (h + #2-torsion)/2.
    """
    bound = K.minkowski_bound()
    kps = K.kprimes_up_to(bound)
    gens: list[KPrime] = []
    seen_base = set()
    for kp in kps:
        if kp.rel_f == 2:
            continue  # inert primes extend base primes: principal over h_F = 1
        bkey = (kp.base.p, kp.base.second_gen.a, kp.base.second_gen.b)
        if bkey in seen_base:
            continue  # one prime per split pair; the other is its inverse class
        seen_base.add(bkey)
        gens.append(kp)
    k = len(gens)
    mo = K.maximal_order()
    elements: list[tuple[tuple[int, ...], KIdeal]] = [(tuple([0] * k), mo)]
    relations: list[list[int]] = []
    for i, g in enumerate(gens):
        cur = mo
        powers: list[KIdeal] = []
        d = 0
        rel = None
        while rel is None:
            cur = (cur * g.ideal).small_class_rep()
            d += 1
            for vec, rep in elements:
                if cur.in_same_class(rep):
                    rvec = [0] * k
                    rvec[i] = d
                    for t in range(k):
                        rvec[t] -= vec[t]
                    rel = rvec
                    break
            if rel is None:
                powers.append(cur)
            if d > 10_000:
                raise SearchBudgetExceeded("generator order runaway")
        relations.append(rel)
        if powers:
            new_elements = list(elements)
            for e in range(1, d):
                pw = powers[e - 1]
                for vec, rep in elements:
                    nv = list(vec)
                    nv[i] += e
                    prod = (pw * rep).small_class_rep()
                    new_elements.append((tuple(nv), prod))
            elements = new_elements
    h_K = len(elements)
    # canonical residue reduction for dlog vectors modulo the relation lattice
    rel_rows = hnf_lattice(relations) if relations else []

    def reduce_vec(v):
        v = list(v)
        for r in rel_rows:
            c = next(kk for kk in range(k) if r[kk] != 0)
            q = v[c] // r[c]
            if q:
                for t in range(k):
                    v[t] -= q * r[t]
        return tuple(v)

    index = {reduce_vec(vec): i for i, (vec, rep) in enumerate(elements)}
    assert len(index) == h_K, "discrete logs do not separate classes"
    conj_pairs = []
    for vec, rep in elements:
        inv = reduce_vec([-x for x in vec])
        conj_pairs.append(index[inv])
    orbits = 0
    seen = set()
    for i, j in enumerate(conj_pairs):
        if i not in seen:
            orbits += 1
            seen.add(i)
            seen.add(j)
    reps = [rep for _, rep in elements]
    dlogs = [vec for vec, _ in elements]
    h_prime = 1
    h = h_K
    return ClassData(
        h_K, reps, conj_pairs, orbits, h, h_prime, list(reps), not K.unit_equal,
        dlogs=dlogs, generators=gens, relations=relations,
    )


def _class_data_by_partition(K: CMField) -> ClassData:
    """Pairwise-partition fallback (nontrivial base class group)."""
    ideals = K.integral_ideals_up_to(K.minkowski_bound())
    reps: list[KIdeal] = []
    for idl in ideals:
        if not any(idl.in_same_class(r) for r in reps):
            reps.append(idl)
    conj_pairs = []
    for r in reps:
        rc = r.conj()
        idx = next((ri for ri, r2 in enumerate(reps) if rc.in_same_class(r2)), None)
        if idx is None:
            raise SearchBudgetExceeded("conjugate class not found among representatives")
        conj_pairs.append(idx)
    h_K = len(reps)
    orbits = 0
    seen = set()
    for i, j in enumerate(conj_pairs):
        if i not in seen:
            orbits += 1
            seen.add(i)
            seen.add(j)
    im_indices = {0}
    base_images = []
    for a in K.F.class_reps[1:]:
        ext = K.extend_ideal(a)
        base_images.append(next(ri for ri, r in enumerate(reps) if ext.in_same_class(r)))
    changed = True
    while changed:
        changed = False
        for bi in base_images:
            for i in list(im_indices):
                prod = reps[i] * reps[bi]
                kk = next(ri for ri, r in enumerate(reps) if prod.in_same_class(r))
                if kk not in im_indices:
                    im_indices.add(kk)
                    changed = True
    h_prime = len(im_indices)
    assert h_K % h_prime == 0
    h = h_K // h_prime
    N_reps = []
    covered: set[int] = set()
    for i, r in enumerate(reps):
        if i in covered:
            continue
        N_reps.append(r)
        for j in im_indices:
            prod = reps[i] * reps[j]
            covered.add(next(ri for ri, r2 in enumerate(reps) if prod.in_same_class(r2)))
    assert len(N_reps) == h
    return ClassData(h_K, reps, conj_pairs, orbits, h, h_prime, N_reps, not K.unit_equal)


def class_group_K(K: CMField):
    """(h_K, class list, conjugation orbit count, h, h') per the class data."""
    cd = K.class_data()
    return cd.h_K, cd.reps, cd.orbits, cd.h, cd.h_prime


def class_counts(K: CMField) -> tuple[int, int]:
    """(h_K, conjugation orbit count) without materializing representatives.

    Degree-1 fields go through the integer-only lattice pipeline, which is the
    same reduction the generic path applies, minus the object overhead.
    """
    if K.F.n == 1:
        from .imagquad import class_group_counts

        return class_group_counts(-K.rel_disc_norm)
    cd = K.class_data()
    return cd.h_K, cd.orbits


# -- unit-exceptional extensions ----------------------------------------------------


def _exceptional_radicands(F: Field) -> list[FElem]:
    """Totally negative v (mod squares) whose sqrt generates extra units."""
    cands = [F.elem(-1), F.elem(-3)]
    if F.n == 2:
        eps = F.eps
        if eps.is_totally_positive():
            cands.append(-eps)
    out: list[FElem] = []
    for v in cands:
        if not v.is_totally_negative():
            continue
        if not any((v * w).is_square() for w in out):
            out.append(v)
    return out


def exceptional_extensions(F: Field) -> list[CMField]:
    """All totally imaginary quadratic K/F with o_K^x != o_F^x, up to isomorphism.

    These are F(zeta_6) = F(sqrt -3) together with F(sqrt v) for totally
    negative unit products v.
    """
    return [make_cm(F, v) for v in _exceptional_radicands(F)]


# -- decomposition of ideals against the class representatives ------------------------


def line_colon_ideal(K: CMField, alpha: KElem, module: KIdeal) -> FIdeal:
    """The fractional F-ideal {x in F : x*alpha in module}.

    Computed as (module intersect F*alpha) / alpha: basis vectors of the
    module landing on the line are integer kernel combinations of the
    cross products with alpha."""
    F = K.F
    bs = module.basis_kelems()
    crosses = [b.x * alpha.y - b.y * alpha.x for b in bs]
    den = 1
    for c in crosses:
        den = _lcm(den, _lcm(c.a.denominator, c.b.denominator))
    rows = [[int(c.a * den)] + ([int(c.b * den)] if F.n == 2 else []) for c in crosses]
    ker = zspan_kernel(rows)
    gens = []
    for comb in ker:
        v = None
        for c, b in zip(comb, bs):
            if c:
                piece = b.scale(c)
                v = piece if v is None else v + piece
        if v is None or v.is_zero():
            continue
        x = v / alpha
        assert x.y.is_zero(), "intersection vector not on the line"
        gens.append(x.x)
    if not gens:
        raise DecompositionFailed("module meets the line trivially")
    return FIdeal.from_generators(F, gens)


def canonical_unit_rep(K: CMField, alpha: KElem) -> KElem:
    """Deterministic representative of alpha modulo o_F^x = {+-eps^k}.

    The trace form q(z) = Tr(z conj z) is strictly convex along the unit
    orbit, so its exact minimizer (ties broken by coordinate key) is an
    orbit invariant; the sign is then fixed by the larger coordinate tuple.
    """
    F = K.F
    if F.n == 2:

        def q(z: KElem) -> Fraction:
            return (z * z.conj()).abs_trace()

        eps = F.eps
        eps_inv = F.one() / eps
        cur = alpha
        while True:
            up = cur * eps
            dn = cur * eps_inv
            qc = q(cur)
            if q(up) < qc:
                cur = up
            elif q(dn) < qc:
                cur = dn
            else:
                best = cur
                for cand in (up, dn):
                    if q(cand) == qc:
                        ck = max(tuple(cand.coords()), tuple((-cand).coords()))
                        bk = max(tuple(best.coords()), tuple((-best).coords()))
                        if ck > bk:
                            best = cand
                cur = best
                break
        alpha = cur
    key = tuple(alpha.coords())
    neg = tuple((-alpha).coords())
    return alpha if key >= neg else -alpha


def decompose_ideal(K: CMField, M: KIdeal):
    """Write an integral module as a * (o alpha) * N_i^{-1}, alpha canonical.

    Returns (i, a: FIdeal, alpha: KElem) with o*alpha saturated in N_i;
    recomposition is verified exactly.
    """
    if K.F.h_F != 1:
        raise DecompositionFailed("decomposition implemented for trivial base class group")
    cd = K.class_data()
    for i, Ni in enumerate(cd.N_reps):
        prod = M * Ni
        prod_int = prod.scale(prod.den)
        gen = prod_int.principal_gen()
        if gen is None:
            continue
        alpha = gen.scale(Fraction(1, prod.den))
        b = line_colon_ideal(K, alpha, Ni)
        g = b.principal_gen()
        if g is None:
            raise DecompositionFailed("coefficient ideal not principal over h_F = 1 base")
        alpha_sat = canonical_unit_rep(K, alpha * g)
        a_ideal = b.inverse()
        recomposed = (
            K.extend_ideal(a_ideal) * KIdeal.from_generators(K, [alpha_sat]) * Ni.inverse()
        )
        if recomposed.num == M.num and recomposed.den == M.den:
            return (i, a_ideal, alpha_sat)
    raise DecompositionFailed("no representative matched")


# -- enumeration of rank-1 lines (for the series and measure layers) -------------------


def line_norms(K: CMField, Ni: KIdeal, x_max: Fraction, exclude: KElem | None = None):
    """Values |N(alpha)|/N(N_i) over lines o*alpha in N_i, alpha up to units.

    Returns a sorted list of (value, saturated, alpha).  Lines on F*exclude
    are dropped when `exclude` is given.
    """
    nN = Ni.abs_norm()
    t_abs = Fraction(x_max) * nN
    if K.F.n == 1:
        q_bound = 2 * t_abs
    else:
        e1 = K.F.eps.embed(0)
        bf = 2.0 * math.sqrt(float(t_abs)) * (e1 + 1.0 / e1) * (1 + 1e-9)
        q_bound = Fraction(math.ceil(bf * 2**20), 2**20)
    seen: dict = {}
    for z in Ni.shortest_vectors(q_bound):
        nz = z.abs_norm()
        if nz == 0 or nz > t_abs:
            continue
        zc = canonical_unit_rep(K, z)
        key = tuple(zc.coords())
        if key in seen:
            continue
        seen[key] = zc
    out = []
    for zc in seen.values():
        if exclude is not None and _on_line(K, zc, exclude):
            continue
        b = line_colon_ideal(K, zc, Ni)
        saturated = b.norm() == 1 and b.is_integral()
        out.append((zc.abs_norm() / nN, saturated, zc))
    out.sort(key=lambda t: (t[0], tuple(t[2].coords())))
    return out


def _on_line(K: CMField, z: KElem, w: KElem) -> bool:
    """z lies on the F-line through w (cross product of (x, y) pairs vanishes)."""
    return (z.x * w.y - z.y * w.x).is_zero()


# -- small helpers -------------------------------------------------------------------


def _prime_divisors(n: int) -> list[int]:
    n = abs(n)
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


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _ideal_transversal(F: Field, idl: FIdeal):
    """Coset representatives of o_F / idl (idl integral)."""
    assert idl.is_integral()
    if F.n == 1:
        a = idl.num[0][0]
        for x in range(a):
            yield F.elem(x)
        return
    a = idl.num[0][0]
    c = idl.num[1][1]
    for x in range(a):
        for y in range(c):
            yield F.elem(x, y)


def _elem_with_valuation(F: Field, idl: FIdeal, pr: PrimeIdeal, v: int) -> FElem:
    """Element of the fractional ideal with exact valuation v at pr."""
    for e in idl.basis_elems():
        if F.ideal(e).valuation(pr) == v:
            return e
    raise SearchBudgetExceeded(f"no basis element of valuation {v} at {pr}")


def _split_one(F: Field, a: FIdeal, b: FIdeal) -> FElem:
    """e in a with 1 - e in b (a, b coprime integral ideals)."""
    assert a.den == 1 and b.den == 1
    rows_a = [list(r) for r in a.num]
    rows_b = [list(r) for r in b.num]
    one = [1] + [0] * (F.n - 1)
    sol = zspan_solve(rows_a + rows_b, one)
    if sol is None:
        raise DecompositionFailed("ideals not coprime")
    e = F.zero()
    for c, r in zip(sol[: len(rows_a)], rows_a):
        if F.n == 1:
            e = e + F.elem(c * r[0])
        else:
            e = e + F.elem(c * r[0], c * r[1])
    return e


def _lift_residue(F: Field, rf: ResidueField, r) -> FElem:
    if rf.f == 1:
        return F.elem(r[0])
    return F.elem(r[0], r[1])


def _rational_inverse(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Inverse of a small square rational matrix (Gauss-Jordan)."""
    n = len(rows)
    a = [[Fraction(rows[i][j]) for j in range(n)] + [Fraction(1 if k == i else 0) for k in range(n)] for i in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if a[i][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [[a[i][n + j] for j in range(n)] for i in range(n)]
