"""Binary quadratic forms on rank-2 modules over the base ring.

A form lives on M = o*alpha + a*beta with coefficient triple (a, b, c); its
discriminant and norm ideals are patched from local data, fundamentality is
decided prime by prime (with the quadratic-residue-mod-4 search at primes
over 2), and definite fundamental forms correspond to ideal classes of
K = F(sqrt(b^2-4ac)) up to conjugation.

Genus characters are local norm-residue symbols of represented values; the
symbol at primes over 2 is decided by a certified residue enumeration, all
other places are closed-form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .cm import CMField, KElem, KIdeal, make_cm
from .errors import (
    CriterionFails,
    DegenerateForm,
    LemmaViolation,
    NoRepresentedValueFound,
    NotFundamental,
    SearchBudgetExceeded,
)
from .field import FElem, Field, FIdeal, PrimeIdeal
from .finitefield import ResidueField
from .intmat import hnf_lattice, zspan_kernel, zspan_solve
from .lattice import short_vectors


@dataclass
class PseudoForm:
    """q(x alpha + y beta) = a x^2 + b xy + c y^2 on o*alpha + steinitz*beta."""

    F: Field
    steinitz: FIdeal
    a: FElem
    b: FElem
    c: FElem

    def field_disc(self) -> FElem:
        return self.b * self.b - 4 * self.a * self.c

    def disc_ideal(self) -> FIdeal:
        """Product of the local discriminant ideals; equals (b^2-4ac) * steinitz^2."""
        d = self.field_disc()
        if d.is_zero():
            raise DegenerateForm("zero discriminant")
        return self.F.ideal(d) * (self.steinitz * self.steinitz)

    def norm_ideal(self) -> FIdeal:
        """Ideal generated by represented values: (a) + b*steinitz + c*steinitz^2."""
        F = self.F
        gens = [self.a]
        for t in self.steinitz.basis_elems():
            gens.append(self.b * t)
        for t in (self.steinitz * self.steinitz).basis_elems():
            gens.append(self.c * t)
        gens = [g for g in gens if not g.is_zero()]
        return FIdeal.from_generators(F, gens)

    def value(self, x: FElem, y: FElem) -> FElem:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def is_definite(self) -> bool:
        d = self.field_disc()
        if d.is_zero():
            raise DegenerateForm("zero discriminant")
        return d.is_totally_negative()

    def is_positive_definite(self) -> bool:
        return self.is_definite() and self.a.is_totally_positive()

    def scaled(self, u: FElem) -> "PseudoForm":
        return PseudoForm(self.F, self.steinitz, self.a * u, self.b * u, self.c * u)

    def module_lattice(self) -> list[tuple[FElem, FElem]]:
        """Z-basis of the module as (x, y) coordinate pairs."""
        F = self.F
        out = [(t, F.zero()) for t in F.maximal_order_basis()]
        out += [(F.zero(), s) for s in self.steinitz.basis_elems()]
        return out

    def key(self):
        return (
            self.steinitz.key() if hasattr(self.steinitz, "key") else str(self.steinitz),
            self.a.coords(),
            self.b.coords(),
            self.c.coords(),
        )


def make_form(F: Field, a, b, c, steinitz: FIdeal | None = None) -> PseudoForm:
    conv = lambda v: v if isinstance(v, FElem) else F.elem(Fraction(v))
    return PseudoForm(F, steinitz if steinitz is not None else F.unit_ideal(), conv(a), conv(b), conv(c))


def form_report(Q: PseudoForm, K: CMField) -> dict:
    """Serializable form data with genus signs."""
    gv = genus_vector(Q, K)
    return {
        "steinitz_norm": f"{Q.steinitz.norm().numerator}/{Q.steinitz.norm().denominator}",
        "a": str(Q.a),
        "b": str(Q.b),
        "c": str(Q.c),
        "disc_ideal_norm": str(Q.disc_ideal().norm()),
        "norm_ideal_norm": str(Q.norm_ideal().norm()),
        "fundamental": is_fundamental(Q, cross_check=False),
        "genus": {"|".join(map(str, k)): v for k, v in sorted(gv.items())},
    }


# -- fundamentality ------------------------------------------------------------------


def _elem_with_val(F: Field, idl: FIdeal, pr: PrimeIdeal, v: int) -> FElem:
    for e in idl.basis_elems():
        if F.ideal(e).valuation(pr) == v:
            return e
    raise SearchBudgetExceeded(f"no basis element of valuation {v} at {pr}")


def _val_elem(F: Field, x: FElem, pr: PrimeIdeal) -> int:
    return F.ideal(x).valuation(pr)


def is_quadratic_residue_mod4(F: Field, d: FElem, pr: PrimeIdeal) -> bool:
    """Whether u^2 = d mod 4 o_p is solvable, with u allowed anywhere in o_p.

    (u + 2w)^2 = u^2 mod 4, so representatives of o/(2 * pr) decide the
    condition exactly; the test on each candidate is an exact ideal
    membership at pr."""
    two = F.ideal(F.elem(2))
    four_p = (two * two).valuation(pr)
    for u in _transversal(F, two * pr.ideal):
        diff = u * u - d
        if diff.is_zero() or F.ideal(diff).valuation(pr) >= four_p:
            return True
    return False


def _transversal(F: Field, idl: FIdeal):
    assert idl.is_integral()
    if F.n == 1:
        for x in range(idl.num[0][0]):
            yield F.elem(x)
        return
    for x in range(idl.num[0][0]):
        for y in range(idl.num[1][1]):
            yield F.elem(x, y)


def is_fundamental_local(F: Field, d: FElem, pr: PrimeIdeal) -> bool:
    """The local fundamentality test for a p-integral d of valuation >= 0.

    Odd p: d not in p^2.  p | 2: quadratic residue mod 4, and either pi^2
    does not divide d or d/pi^2 is not a residue mod 4 (any u in o_p is
    allowed in the residue test)."""
    v = _val_elem(F, d, pr)
    assert v >= 0
    if pr.p != 2:
        return v <= 1
    if not is_quadratic_residue_mod4(F, d, pr):
        return False
    if v < 2:
        return True
    d2 = d / (pr.second_gen * pr.second_gen)
    return not is_quadratic_residue_mod4(F, d2, pr)


def is_fundamental(Q: PseudoForm, cross_check: bool = True) -> bool:
    """Fundamentality of a definite form, local tests at all relevant primes.

    Cross-checked against the relative-discriminant identity
    disc(F(Q)/F) = disc(Q) * norm(Q)^-2 when `cross_check` is set."""
    F = Q.F
    d = Q.field_disc()
    if d.is_zero():
        raise DegenerateForm("zero discriminant")
    dq = Q.disc_ideal()
    nq = Q.norm_ideal()
    target = dq * (nq * nq).inverse()
    assert target.is_integral()
    result = True
    for pr in _relevant_primes(F, Q):
        t_a = _elem_with_val(F, Q.steinitz, pr, Q.steinitz.valuation(pr))
        n_t = _elem_with_val(F, nq, pr, nq.valuation(pr))
        d_star = d * t_a * t_a / (n_t * n_t)
        if not is_fundamental_local(F, d_star, pr):
            result = False
            break
    if cross_check and Q.is_definite():
        ideal_side = _rel_disc_of_form_field(Q)
        assert (target == ideal_side) == result, "local tests disagree with the field discriminant"
    return result


def _relevant_primes(F: Field, Q: PseudoForm) -> list[PrimeIdeal]:
    nums = set()
    for x in (Q.a, Q.b, Q.c, F.elem(2)):
        if not x.is_zero():
            nm = abs(x.norm())
            nums.add(nm.numerator)
            nums.add(nm.denominator)
    nums.add(int(Q.steinitz.norm().numerator))
    nums.add(int(Q.steinitz.norm().denominator))
    ps = set()
    for n in nums:
        ps.update(_prime_divisors(n))
    out = []
    for p in sorted(ps):
        out.extend(F.splitting(p).primes)
    return out


def _rel_disc_of_form_field(Q: PseudoForm) -> FIdeal:
    K = form_field(Q)
    return K.rel_disc


def form_field(Q: PseudoForm) -> CMField:
    """K = F(sqrt(b^2 - 4ac)), via an integral totally negative scaling."""
    d = Q.field_disc()
    den = _lcm(d.a.denominator, d.b.denominator)
    delta = d * Q.F.elem(den * den)
    return make_cm(Q.F, delta)


# -- correspondence -------------------------------------------------------------------


def free_module_basis(K: CMField, A: KIdeal) -> tuple[KElem, KElem]:
    """A free o_F-basis (alpha, beta) of a rank-2 module over an h_F = 1 base.

    beta spans the sqrt(delta)-content; alpha generates the intersection with F.
    """
    F = K.F
    if F.h_F != 1:
        raise SearchBudgetExceeded("free basis requires trivial base class group")
    vs = A.basis_kelems()
    n = F.n
    # content ideal of the sqrt(delta)-coordinates; h_F = 1 makes it principal
    ygens = [v.y for v in vs if not v.y.is_zero()]
    C = FIdeal.from_generators(F, ygens)
    g = C.principal_gen()
    if g is None:
        raise SearchBudgetExceeded("content generator not found")
    # beta = sum c_i (v_i t) with integral coefficients and y-part exactly g
    mults = F.maximal_order_basis()
    pieces = [v * KElem(K, t, F.zero()) for v in vs for t in mults]
    den = _lcm(g.a.denominator, g.b.denominator)
    for z in pieces:
        den = _lcm(den, _lcm(z.y.a.denominator, z.y.b.denominator))
    rows = [[int(z.y.a * den)] + ([int(z.y.b * den)] if n == 2 else []) for z in pieces]
    target = [int(g.a * den)] + ([int(g.b * den)] if n == 2 else [])
    sol = zspan_solve(rows, target)
    if sol is None:
        raise SearchBudgetExceeded("content not attained by module combination")
    beta = None
    for c, z in zip(sol, pieces):
        if c:
            piece = z.scale(c)
            beta = piece if beta is None else beta + piece
    # intersection with F: integer combinations of the Z-basis with zero y-part
    dy = 1
    for v in vs:
        dy = _lcm(dy, _lcm(v.y.a.denominator, v.y.b.denominator))
    rows_y = [[int(v.y.a * dy)] + ([int(v.y.b * dy)] if n == 2 else []) for v in vs]
    ker = zspan_kernel(rows_y)
    xgens = []
    for comb in ker:
        z = None
        for c, v in zip(comb, vs):
            if c:
                piece = v.scale(c)
                z = piece if z is None else z + piece
        if z is not None and not z.is_zero():
            assert z.y.is_zero()
            xgens.append(z.x)
    A0 = FIdeal.from_generators(F, xgens)
    alpha_f = A0.principal_gen()
    if alpha_f is None:
        raise SearchBudgetExceeded("intersection generator not found")
    alpha = KElem(K, alpha_f, F.zero())
    check = KIdeal.from_rows(K, _span_rows(K, [alpha, beta]), _span_den(K, [alpha, beta]))
    assert check.num == A.num and check.den == A.den, "free basis does not span the module"
    return alpha, beta


def _span_rows(K: CMField, gens: list[KElem]) -> list[list[int]]:
    mults = K.F.maximal_order_basis()
    coords = [K._to_order(g * t) for g in gens for t in mults]
    den = _span_den(K, gens)
    return [[int(c * den) for c in row] for row in coords]


def _span_den(K: CMField, gens: list[KElem]) -> int:
    mults = K.F.maximal_order_basis()
    den = 1
    for g in gens:
        for t in mults:
            for c in K._to_order(g * t):
                den = _lcm(den, c.denominator)
    return den


def ideal_to_form(K: CMField, A: KIdeal) -> PseudoForm:
    """The norm form q = N_{K/F} on a free basis of the module.

    Postconditions asserted: positive definite, generates K, fundamental,
    and disc ideal = rel disc * N(A)^2.
    """
    alpha, beta = free_module_basis(K, A)
    F = K.F
    a = alpha.rel_norm()
    b = (alpha.conj() * beta).rel_trace()
    c = beta.rel_norm()
    Q = PseudoForm(F, F.unit_ideal(), a, b, c)
    assert Q.is_positive_definite()
    d = Q.field_disc()
    assert (d * K.delta).is_square() or (d * K.delta).square_root() is not None
    nrm = A.rel_norm()
    assert Q.disc_ideal() == K.rel_disc * (nrm * nrm)
    assert Q.norm_ideal() == nrm
    assert is_fundamental(Q, cross_check=False)
    return Q


def form_to_ideal(Q: PseudoForm) -> tuple[CMField, KIdeal, FElem]:
    """The module o*(2a) + steinitz*(-b + sqrt(b^2-4ac)) as an ideal of F(Q).

    Returns (K, A, scale) with 4a * Q = Q_A after the coordinate change;
    ideal-ness (stability under the maximal order) is verified, as is the
    scale identity.
    """
    if not is_fundamental(Q, cross_check=False):
        raise NotFundamental("only fundamental definite forms correspond to ideals")
    K = form_field(Q)
    F = Q.F
    d = Q.field_disc()
    den = _lcm(d.a.denominator, d.b.denominator)
    # sqrt(d) = sqrt(delta)/den with delta = d * den^2
    sqrt_d = KElem(K, F.zero(), F.elem(Fraction(1, den)))
    two_a = KElem(K, Q.a + Q.a, F.zero())
    second = KElem(K, -Q.b, F.zero()) + sqrt_d
    gens_rows = []
    den_rows = 1
    pieces = [two_a * KElem(K, t, F.zero()) for t in F.maximal_order_basis()]
    pieces += [second * KElem(K, s, F.zero()) for s in Q.steinitz.basis_elems()]
    for z in pieces:
        for c in K._to_order(z):
            den_rows = _lcm(den_rows, c.denominator)
    for z in pieces:
        gens_rows.append([int(c * den_rows) for c in K._to_order(z)])
    A = KIdeal.from_rows(K, gens_rows, den_rows)
    # stability under the maximal order (the ideal criterion)
    for z in A.basis_kelems():
        for t in K.order_basis:
            assert A.contains(z * t), "module is not stable under the maximal order"
    # scale identity 4a Q = Q_A on the basis images
    xim = -two_a  # image of alpha
    yim = second  # image of beta
    four_a = 4 * Q.a
    assert xim.rel_norm() == four_a * Q.a
    assert (xim.conj() * yim).rel_trace() == four_a * Q.b
    assert yim.rel_norm() == four_a * Q.c
    return K, A, four_a


def weakly_equivalent(Q1: PseudoForm, Q2: PseudoForm) -> bool:
    """Weak equivalence, decided through the ideal correspondence."""
    K1, A1, _ = form_to_ideal(Q1)
    K2, A2, _ = form_to_ideal(Q2)
    if K1.rel_disc_norm != K2.rel_disc_norm or not (Q1.field_disc() * Q2.field_disc()).is_square():
        return False
    # move A2 into K1 via the shared generator of the field
    A2_in_K1 = _transport(K1, K2, A2)
    return A1.in_same_class(A2_in_K1) or A1.in_same_class(A2_in_K1.conj())


def _transport(K1: CMField, K2: CMField, A: KIdeal) -> KIdeal:
    """Rewrite a module over K2 = F(sqrt d2) inside K1 = F(sqrt d1), d2*d1 square."""
    if K1 is K2:
        return A
    ratio2 = (K2.delta * K1.delta).square_root()
    if ratio2 is None:
        raise LemmaViolation("transport between non-isomorphic extensions")
    # sqrt(d2) = ratio / sqrt(d1) * d1 ... : sqrt(d2) = (ratio2 / d1) * sqrt(d1)
    fac = ratio2 / K1.delta
    gens = []
    for z in A.basis_kelems():
        gens.append(KElem(K1, z.x, z.y * fac))
    return KIdeal.from_generators(K1, gens)


# -- classification -----------------------------------------------------------------


def classify(K: CMField):
    """(strong class refinements, weak class representatives) for K.

    Weak classes are the conjugation orbits of the class group, realized by
    norm forms of orbit representatives.  Strong classes are refined by the
    unit-square scaling action separated through genus vectors, a certified
    lower bound on the strong count.
    """
    cd = K.class_data()
    seen = set()
    weak = []
    for i, j in enumerate(cd.conj_pairs):
        if i in seen:
            continue
        seen.add(i)
        seen.add(j)
        weak.append(ideal_to_form(K, cd.reps[i]))
    units = _unit_square_reps(K.F)
    strong = []
    strong_keys = set()
    for Q in weak:
        for u in units:
            Qu = Q.scaled(u)
            gv = genus_vector(Qu, K)
            key = (Q.key(), tuple(sorted(gv.items())))
            if key not in strong_keys:
                strong_keys.add(key)
                strong.append((Qu, gv))
    assert len(weak) == cd.orbits
    assert len(weak) <= cd.h_K <= 2 * len(weak)
    return strong, weak


def _unit_square_reps(F: Field) -> list[FElem]:
    if F.n == 1:
        return [F.one(), -F.one()]
    return [F.one(), -F.one(), F.eps, -F.eps]


# -- genus characters and Hilbert symbols ----------------------------------------------


def hilbert_symbol(F: Field, s: FElem, d: FElem, place) -> int:
    """(s, d) at a real embedding index or a prime of F."""
    if isinstance(place, int):
        return -1 if s.embedding_sign(place) < 0 and d.embedding_sign(place) < 0 else 1
    pr: PrimeIdeal = place
    if s.is_zero() or d.is_zero():
        raise ValueError("symbol arguments must be nonzero")
    if pr.p != 2:
        return _tame_symbol(F, s, d, pr)
    return _twoadic_symbol(F, s, d, pr)


def _tame_symbol(F: Field, s: FElem, d: FElem, pr: PrimeIdeal) -> int:
    rf = ResidueField(F, pr)
    alpha = _val_elem(F, s, pr)
    beta = _val_elem(F, d, pr)
    us = rf.unit_residue(s, alpha)
    ud = rf.unit_residue(d, beta)
    q = rf.q
    sign = -1 if (alpha * beta) % 2 == 1 and (q - 1) // 2 % 2 == 1 else 1
    chi_s = rf.legendre(us)
    chi_d = rf.legendre(ud)
    out = sign
    if beta % 2 == 1:
        out *= chi_s
    if alpha % 2 == 1:
        out *= chi_d
    return out


def _twoadic_symbol(F: Field, s: FElem, d: FElem, pr: PrimeIdeal) -> int:
    """Symbol over a prime above 2 by certified residue enumeration.

    s and d are first normalized by exact squares (uniformizer powers) to
    valuation 0 or 1; solubility of z^2 = s x^2 + d y^2 is then decided
    modulo pr^(2e+1+slack) with a Hensel certificate on each witness.
    """
    g = pr.second_gen
    s = _reduce_by_square(F, s, pr, g)
    d = _reduce_by_square(F, d, pr, g)
    e = F.ideal(F.elem(2)).valuation(pr)
    m = 2 * e + 1
    for _attempt in range(3):
        res = _soluble_mod(F, pr, s, d, m)
        if res is not None:
            return 1 if res else -1
        m += 2
    raise NoRepresentedValueFound("2-adic solubility undecided after escalation")


def _reduce_by_square(F: Field, x: FElem, pr: PrimeIdeal, g: FElem) -> FElem:
    v = _val_elem(F, x, pr)
    k = v // 2
    for _ in range(k):
        x = x / (g * g)
    # clear denominators at p by multiplying with conjugate-uniformizer squares
    t = g.conj()
    guard = 0
    while _den_of(x) % pr.p == 0:
        x = x * t * t
        guard += 1
        if guard > 64:
            raise SearchBudgetExceeded("denominator clearing loop")
    return x


def _den_of(x: FElem) -> int:
    return _lcm(x.a.denominator, x.b.denominator)


def _soluble_mod(F: Field, pr: PrimeIdeal, s: FElem, d: FElem, m: int):
    """True/False when certified; None when witnesses exist but none certifies.

    Enumerates primitive triples of z^2 = s x^2 + d y^2 modulo pr^m; a
    witness certifies solubility when m >= 2k+1 for k the minimal valuation
    among the partial derivatives (one-variable Hensel lifting), and an empty
    witness set certifies insolubility."""
    pm = pr.ideal**m
    p1 = pr.ideal
    s_int = _make_integral_mod(F, s, pr, m)
    d_int = _make_integral_mod(F, d, pr, m)
    reps = list(_transversal(F, pm))
    in_p = [p1.contains(r) for r in reps]
    sq: dict = {}
    for iz, z in enumerate(reps):
        sq.setdefault(_red_key(F, z * z, pm), []).append(iz)
    sx2 = [_red_key(F, s_int * x * x, pm) for x in reps]
    dy2 = [_red_key(F, d_int * y * y, pm) for y in reps]
    sum_lookup = {}
    for ix, x in enumerate(reps):
        kx = sx2[ix]
        for iy, y in enumerate(reps):
            ky = dy2[iy]
            w = F.elem(kx[0] + ky[0], (kx[1] + ky[1]) if F.n == 2 else 0)
            key = _red_key(F, w, pm)
            if key not in sq:
                continue
            sum_lookup.setdefault(key, []).append((ix, iy))
    witness_uncertified = False
    for key, pairs in sum_lookup.items():
        for iz in sq[key]:
            for ix, iy in pairs:
                if in_p[ix] and in_p[iy] and in_p[iz]:
                    continue
                x, y, z = reps[ix], reps[iy], reps[iz]
                k = min(
                    _val_capped(F, 2 * s * x, pr, m),
                    _val_capped(F, 2 * d * y, pr, m),
                    _val_capped(F, 2 * z, pr, m),
                )
                if m >= 2 * k + 1:
                    return True
                witness_uncertified = True
    if witness_uncertified:
        return None
    return False


def _val_capped(F: Field, x: FElem, pr: PrimeIdeal, cap: int) -> int:
    if x.is_zero():
        return cap
    return min(cap, F.ideal(x).valuation(pr))


def _make_integral_mod(F: Field, w: FElem, pr: PrimeIdeal, m: int) -> FElem:
    """Integral representative of a pr-integral element modulo pr^m."""
    dw = _lcm(w.a.denominator, w.b.denominator)
    if dw == 1:
        return w
    assert dw % pr.p != 0, "denominator not coprime to p"
    num = w * F.elem(dw)
    i = pow(dw, -1, pr.p**m)
    return num * F.elem(i)


def _red_key(F: Field, x: FElem, modulus: FIdeal):
    """Canonical residue of an integral element modulo an integral ideal.

    HNF rows come pivot-ordered ([A, r], [0, C]): the first coordinate is
    reduced by the first row (which disturbs the second), then the second by
    the pivot-[0, C] row."""
    if F.n == 1:
        A = modulus.num[0][0]
        return (int(x.a) % A,)
    aa, bb = int(x.a), int(x.b)
    r0, r1 = modulus.num[0], modulus.num[1]
    q = aa // r0[0]
    aa -= q * r0[0]
    bb -= q * r0[1]
    q = bb // r1[1]
    bb -= q * r1[1]
    return (aa, bb)


def represented_value(Q: PseudoForm) -> FElem:
    """A canonical nonzero represented value (q(alpha) = a for definite forms)."""
    if not Q.a.is_zero():
        return Q.a
    raise NoRepresentedValueFound("degenerate leading coefficient")


def genus_char(Q: PseudoForm, K: CMField, place) -> int:
    """e_v(Q) = (s, disc)_v for a represented value s."""
    s = represented_value(Q)
    return hilbert_symbol(Q.F, s, _delta_rep(K), place)


def _delta_rep(K: CMField) -> FElem:
    return K.delta


def genus_places(K: CMField):
    """The places v | infinity * rel_disc as (real indices, primes)."""
    reals = list(range(K.F.n))
    primes = [pr for (pr, v) in K.rel_disc_primes]
    return reals, primes


def genus_vector(Q: PseudoForm, K: CMField) -> dict:
    reals, primes = genus_places(K)
    out = {}
    for i in reals:
        out[("inf", i)] = genus_char(Q, K, i)
    for pr in primes:
        out[("p", pr.p, str(pr.second_gen))] = genus_char(Q, K, pr)
    return out


# -- representability and genus prescription ---------------------------------------------


def representable_criterion(K: CMField, s: FElem) -> bool:
    """v_p(s) even at every prime inert in K."""
    F = K.F
    if s.is_zero():
        raise ValueError("s must be nonzero")
    nrm = abs(s.norm())
    for p in sorted(set(_prime_divisors(nrm.numerator) + _prime_divisors(nrm.denominator))):
        for pr in F.splitting(p).primes:
            v = _val_elem(F, s, pr)
            if v == 0:
                continue
            if K.splitting_kind(pr) == "inert" and v % 2 == 1:
                return False
    return True


def represent_search(K: CMField, s: FElem):
    """A fundamental definite form Q_A / gamma representing s, with witness.

    Returns (Q: PseudoForm, A, gamma, witness (x, y)) with Q.value(x, y) = s.
    """
    F = K.F
    if not representable_criterion(K, s):
        raise CriterionFails(f"{s} has odd valuation at an inert prime")
    # B with N_{K/F}(B) = (s)
    nrm = abs(s.norm())
    B = K.maximal_order()
    for p in sorted(set(_prime_divisors(nrm.numerator) + _prime_divisors(nrm.denominator))):
        for pr in F.splitting(p).primes:
            v = _val_elem(F, s, pr)
            if v == 0:
                continue
            kind = K.splitting_kind(pr)
            kps = K.primes_above(pr)
            if kind == "inert":
                B = B * (kps[0].ideal ** (v // 2))
            elif kind == "ramified":
                B = B * (kps[0].ideal**v)
            else:
                B = B * (kps[0].ideal**v)
    assert s.is_integral()
    assert B.rel_norm() == F.ideal(s)
    # z in B small, A = (z) B^{-1}
    z = B.small_nonzero()
    A = B.inverse() * z
    assert A.is_integral()
    gamma = z.rel_norm() / s
    Q = ideal_to_form(K, A)
    Qs = PseudoForm(F, F.unit_ideal(), Q.a / gamma, Q.b / gamma, Q.c / gamma)
    # witness: coordinates of z in the free basis of A
    alpha, beta = free_module_basis(K, A)
    xy = _coords_in_basis(K, z, alpha, beta)
    assert Qs.value(xy[0], xy[1]) == s
    return Qs, A, gamma, xy


def _coords_in_basis(K: CMField, z: KElem, alpha: KElem, beta: KElem):
    # z = x alpha + y beta with x, y in F: solve 2x2 linear system over F
    det = alpha.x * beta.y - alpha.y * beta.x
    if det.is_zero():
        # fall back to generic solve via components
        a1, a2 = alpha.x, beta.x
        b1, b2 = alpha.y, beta.y
        den = a1 * b2 - a2 * b1
        x = (z.x * b2 - z.y * a2) / den
        y = (a1 * z.y - b1 * z.x) / den
        return (x, y)
    x = (z.x * beta.y - z.y * beta.x) / det
    y = (alpha.x * z.y - alpha.y * z.x) / det
    return (x, y)


def prescribe_genus(K: CMField, signs: dict, budget: int = 200000):
    """A form whose genus vector matches the requested signs (product must be 1).

    Scans totally-controlled principal primes satisfying the sign and
    congruence conditions, then represents the found element."""
    F = K.F
    reals, primes = genus_places(K)
    keys = [("inf", i) for i in reals] + [("p", pr.p, str(pr.second_gen)) for pr in primes]
    assert set(signs) == set(keys), f"signs must cover {keys}"
    prod = 1
    for v in signs.values():
        prod *= v
    if prod != 1:
        raise ValueError("sign system must have product 1")
    delta = _delta_rep(K)
    count = 0
    for e0 in _small_elements(F):
        count += 1
        if count > budget:
            raise SearchBudgetExceeded("genus prescription scan budget")
        if e0.is_zero():
            continue
        ok = True
        for i in reals:
            if (1 if e0.embedding_sign(i) > 0 else -1) != signs[("inf", i)]:
                ok = False
                break
        if not ok:
            continue
        nrm = abs(e0.norm())
        if nrm.denominator != 1 or nrm == 0:
            continue
        if not _is_prime_int(int(nrm)):
            continue
        for pr in primes:
            if _val_elem(F, e0, pr) != 0:
                ok = False
                break
            if hilbert_symbol(F, e0, delta, pr) != signs[("p", pr.p, str(pr.second_gen))]:
                ok = False
                break
        if not ok:
            continue
        # (e0) is a prime element; the reciprocity bookkeeping makes it split
        pr_e = F.splitting(int(nrm)).primes
        target = next((q for q in pr_e if _val_elem(F, e0, q) > 0), None)
        if target is None or K.splitting_kind(target) != "split":
            continue
        if not representable_criterion(K, e0):
            continue
        Q, A, gamma, xy = represent_search(K, e0)
        gv = genus_vector(Q, K)
        if all(gv[k] == signs[k] for k in keys):
            return Q, e0
    raise SearchBudgetExceeded("no qualifying element found within the scan")


def _small_elements(F: Field):
    """Deterministic scan of integral elements by box size."""
    if F.n == 1:
        k = 1
        while True:
            yield F.elem(k)
            yield F.elem(-k)
            k += 1
    else:
        box = 1
        while True:
            for x in range(-box, box + 1):
                for y in range(-box, box + 1):
                    if max(abs(x), abs(y)) == box:
                        yield F.elem(x, y)
            box += 1


def _is_prime_int(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


# -- the lower bound and the unique-line lemma ---------------------------------------------


def lower_bound_t(K: CMField) -> tuple[int, int]:
    """(t, 2^(t-1)) with t the number of prime divisors of the relative
    discriminant; the bound 2^(t+n-1)/2^n <= h_K is asserted."""
    t = len(K.rel_disc_primes)
    bound = 2 ** (t + K.F.n - 1) // K.F.unit_sq_index
    from .cm import class_counts

    h_K, _ = class_counts(K)
    assert bound <= h_K, f"genus bound {bound} exceeds h_K = {h_K}"
    return t, bound


def minimal_lines(Q: PseudoForm) -> list[tuple]:
    """Saturated rank-1 submodules N with |I(Q,N)| below sqrt|disc|/2^n.

    Exhaustive under the threshold; two or more would contradict the
    uniqueness lemma and raise."""
    F = Q.F
    if not Q.is_definite():
        raise DegenerateForm("line search needs a definite form")
    # per-embedding signs (a definite form may flip sign between embeddings)
    eps_signs = tuple(Q.a.embedding_sign(i) for i in range(F.n))
    disc_norm = Q.disc_ideal().norm()
    mod_basis = Q.module_lattice()
    nb = len(mod_basis)
    gram = [[Fraction(0)] * nb for _ in range(nb)]
    mixed = F.n == 2 and eps_signs[0] != eps_signs[1]
    sqrt_scale = 1.0
    for i, (x1, y1) in enumerate(mod_basis):
        for j, (x2, y2) in enumerate(mod_basis):
            val = (
                Q.a * x1 * x2
                + Q.b * (x1 * y2 + x2 * y1) * F.elem(Fraction(1, 2))
                + Q.c * y1 * y2
            )
            if not mixed:
                gram[i][j] = Fraction(val.trace()) * eps_signs[0]
            else:
                # (sigma_1 - sigma_2)(val)/sqrt(m) is rational and the twisted
                # form stays positive definite
                k = 2 if F.c1 == 0 else 1
                gram[i][j] = Fraction(val.b) * k * eps_signs[0]
    if mixed:
        sqrt_scale = math.sqrt(F.m)
    # enumerate z with the twisted trace of q(z) within the unit window
    thr2 = disc_norm / Fraction(4**F.n)  # |I|^2 < thr2 required
    if F.n == 1:
        q_bound = Fraction(math.isqrt(int(thr2 * 2**40)) + 1, 2**20)
    else:
        e1 = F.eps.embed(0)
        tf = math.sqrt(float(thr2)) ** 0.5  # fourth root of thr2 = sqrt of threshold
        q_bound = Fraction(
            math.ceil(tf * (e1 * e1 + 1 / (e1 * e1)) / sqrt_scale * (1 + 1e-9) * 2**20), 2**20
        )
    vecs = short_vectors(gram, q_bound)
    lines = {}
    for v in vecs:
        x = F.zero()
        y = F.zero()
        for c, (bx, by) in zip(v, mod_basis):
            if c:
                x = x + bx * F.elem(c)
                y = y + by * F.elem(c)
        qv = Q.value(x, y)
        if qv.is_zero():
            continue
        # the saturated line through (x, y): coefficient ideal b = {t : t*(x,y) in M}
        b_id = _line_colon(F, Q, x, y)
        I = F.ideal(qv) * (b_id * b_id)
        lhs = I.norm() * I.norm()
        if lhs * Fraction(4**F.n) < disc_norm:
            key = _line_key(F, Q, x, y, b_id)
            lines.setdefault(key, (I, (x, y)))
    out = sorted(lines.items(), key=lambda t: str(t[0]))
    if len(out) > 1:
        raise LemmaViolation(f"{len(out)} sub-threshold saturated lines found")
    return [(key, I, wit) for key, (I, wit) in out]


def _line_colon(F: Field, Q: PseudoForm, x: FElem, y: FElem) -> FIdeal:
    """{t in F : t*(x, y) in o + steinitz} as a fractional ideal."""
    # t*x in o and t*y in steinitz
    c1 = F.ideal(x).inverse() if not x.is_zero() else None
    c2 = (Q.steinitz * F.ideal(y).inverse()) if not y.is_zero() else None
    if c1 is None:
        return c2
    if c2 is None:
        return c1
    return _ideal_intersect(F, c1, c2)


def _ideal_intersect(F: Field, A: FIdeal, B: FIdeal) -> FIdeal:
    den = A.den * B.den
    ra = [[x * B.den for x in r] for r in A.num]
    rb = [[x * A.den for x in r] for r in B.num]
    ker = zspan_kernel(ra + rb)
    rows = []
    for comb in ker:
        v = [0] * F.n
        for c, r in zip(comb[: len(ra)], ra):
            for i in range(F.n):
                v[i] += c * r[i]
        if any(v):
            rows.append(v)
    h = hnf_lattice(rows)
    gens = []
    for r in h:
        if F.n == 1:
            gens.append(F.elem(Fraction(r[0], den)))
        else:
            gens.append(F.elem(Fraction(r[0], den), Fraction(r[1], den)))
    return FIdeal.from_generators(F, gens)


def _line_key(F: Field, Q: PseudoForm, x: FElem, y: FElem, b_id: FIdeal):
    """Canonical key of the saturated line through (x, y)."""
    # saturate: the line is {(t x, t y) : t in b_id}
    gens = []
    for t in b_id.basis_elems():
        gens.append(((t * x).coords(), (t * y).coords()))
    den = 1
    for gx, gy in gens:
        for c in list(gx) + list(gy):
            den = _lcm(den, c.denominator)
    rows = [[int(c * den) for c in list(gx) + list(gy)] for gx, gy in gens]
    h = hnf_lattice(rows)
    return (den, tuple(tuple(r) for r in h))


# -- helpers -----------------------------------------------------------------------------


def _prime_divisors(n) -> list[int]:
    n = abs(int(n))
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
