"""Coefficientwise Dirichlet series: zeta functions of the corpus fields,
the positive quotient zeta_K/zeta_F(2s), and the measure comparisons feeding
the contour estimates.

Coefficients are exact integers; the only real arithmetic happens at the
final inequality of each check, rounded outward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .cm import CMField, line_norms
from .errors import InequalityViolated, OutOfRegion, TruncationTooLarge
from .field import Field, primes_up_to

MAX_TRUNCATION = 10**4


@dataclass
class CoeffSeries:
    """Dirichlet coefficients v_1..v_X with a provenance tag."""

    X: int
    coeffs: list[Fraction]
    provenance: str

    def __post_init__(self):
        assert len(self.coeffs) == self.X

    def coeff(self, n: int) -> Fraction:
        return self.coeffs[n - 1]

    def mul(self, other: "CoeffSeries") -> "CoeffSeries":
        X = min(self.X, other.X)
        out = [Fraction(0)] * X
        for i in range(1, X + 1):
            a = self.coeffs[i - 1]
            if a == 0:
                continue
            for j in range(1, X // i + 1):
                b = other.coeffs[j - 1]
                if b:
                    out[i * j - 1] += a * b
        return CoeffSeries(X, out, "product")

    def div(self, other: "CoeffSeries") -> "CoeffSeries":
        """Series quotient; other must have leading coefficient 1."""
        X = min(self.X, other.X)
        assert other.coeffs[0] == 1
        out = [Fraction(0)] * X
        for n in range(1, X + 1):
            acc = self.coeffs[n - 1]
            for d in range(2, n + 1):
                if n % d == 0 and other.coeffs[d - 1]:
                    acc -= other.coeffs[d - 1] * out[n // d - 1]
            out[n - 1] = acc
        return CoeffSeries(X, out, "quotient")

    def partial_sum(self, upto_exclusive: Fraction) -> Fraction:
        s = Fraction(0)
        for n in range(1, self.X + 1):
            if Fraction(n) < upto_exclusive:
                s += self.coeffs[n - 1]
        return s


def _euler_coeffs(local_factors: list[tuple[int, list[Fraction]]], X: int) -> list[Fraction]:
    """Expand a product of local series sum_k c_{p,k} (p^k)^-s up to X.

    local_factors: (prime power base q, [c_0, c_1, ...]) per prime."""
    out = [Fraction(0)] * X
    out[0] = Fraction(1)
    for q, cs in local_factors:
        if q > X:
            continue
        new = [Fraction(0)] * X
        for n in range(1, X + 1):
            if out[n - 1] == 0:
                continue
            qk = 1
            k = 0
            while n * qk <= X and k < len(cs):
                if cs[k]:
                    new[n * qk - 1] += out[n - 1] * cs[k]
                qk *= q
                k += 1
        out = new
    return out


def _geom(X: int, q: int) -> list[Fraction]:
    ln = 0
    qk = 1
    while qk <= X:
        qk *= q
        ln += 1
    return [Fraction(1)] * ln


def zeta_coeffs_field(F: Field, X: int, cross_check_cap: int = 400) -> CoeffSeries:
    """Ideal counts of the base field, Euler product route, cross-checked
    against a direct sublattice enumeration on an initial segment."""
    if X > MAX_TRUNCATION:
        raise TruncationTooLarge(f"X = {X} > {MAX_TRUNCATION}")
    factors = []
    for p in primes_up_to(X):
        for pr in F.splitting(p).primes:
            if pr.norm() <= X:
                factors.append((pr.norm(), _geom(X, pr.norm())))
    coeffs = _euler_coeffs(factors, X)
    cap = min(X, cross_check_cap)
    for n in range(1, cap + 1):
        direct = _ideal_count_direct(F, n)
        assert coeffs[n - 1] == direct, (n, coeffs[n - 1], direct)
    return CoeffSeries(X, coeffs, "ideal-count")


def _ideal_count_direct(F: Field, n: int) -> int:
    """Number of integral ideals of norm n by HNF sublattice enumeration."""
    if F.n == 1:
        return 1
    count = 0
    c0, c1 = F.c0, F.c1
    for a in range(1, n + 1):
        if n % a:
            continue
        c = n // a
        if a % c != 0:
            continue
        for b in range(a):
            # closure of rows (a, 0), (b, c) under multiplication by omega:
            # omega*(a, 0) = (0, a) and omega*(b + c w) = (c c0, b + c c1)
            if ((a // c) * b) % a != 0:
                continue
            w0, w1 = c * c0, b + c * c1
            if w1 % c != 0:
                continue
            if (w0 - (w1 // c) * b) % a != 0:
                continue
            count += 1
    return count


def zeta_coeffs_cm(K: CMField, X: int, cross_check_cap: int = 60) -> CoeffSeries:
    """Ideal counts of the extension field, with a small direct cross-check."""
    if X > MAX_TRUNCATION:
        raise TruncationTooLarge(f"X = {X} > {MAX_TRUNCATION}")
    factors = []
    for p in primes_up_to(X):
        for pr in K.F.splitting(p).primes:
            if pr.norm() > X:
                continue
            for kp in K.primes_above(pr):
                if kp.norm() <= X:
                    factors.append((kp.norm(), _geom(X, kp.norm())))
    coeffs = _euler_coeffs(factors, X)
    cap = min(X, cross_check_cap)
    direct = _ideal_count_direct_cm(K, cap)
    for n in range(1, cap + 1):
        assert coeffs[n - 1] == direct[n - 1], (n, coeffs[n - 1], direct[n - 1])
    return CoeffSeries(X, coeffs, "ideal-count")


def _ideal_count_direct_cm(K: CMField, cap: int) -> list[int]:
    """Counts of integral o_K-sublattices of index <= cap, by enumeration."""
    counts = [0] * cap
    deg = K.deg
    if deg == 2:
        d = -K.rel_disc_norm
        from .imagquad import theta_mul_table

        s, t = theta_mul_table(d)
        for a in range(1, cap + 1):
            for c in range(1, cap // a + 1):
                n = a * c
                for u in range(a):
                    # closure of (a, 0), (u, c) under theta
                    # theta*(a,0) = (0,a): needs c | a, a | (a//c)*u
                    if a % c != 0:
                        continue
                    if ((a // c) * u) % a != 0:
                        continue
                    w0, w1 = c * t, u + c * s
                    if w1 % c != 0:
                        continue
                    if (w0 - (w1 // c) * u) % a != 0:
                        continue
                    counts[n - 1] += 1
        return counts
    # degree 4: enumerate prime products (products of distinct structures are
    # distinct ideals), which is the unique-factorization route
    kps = K.kprimes_up_to(cap)
    seen = {}

    def rec(i, cur, nm):
        key = cur.key()
        if key not in seen:
            seen[key] = nm
        if i == len(kps):
            return
        rec(i + 1, cur, nm)
        nm2, cur2 = nm, cur
        while True:
            nm2 *= kps[i].norm()
            if nm2 > cap:
                break
            cur2 = cur2 * kps[i].ideal
            rec(i + 1, cur2, nm2)

    rec(0, K.maximal_order(), 1)
    for key, nm in seen.items():
        counts[nm - 1] += 1
    return counts


def vseries(K: CMField, X: int) -> CoeffSeries:
    """zeta_K(s)/zeta_F(2s), both as an Euler product over base primes and as
    a coefficient quotient; exact agreement is required."""
    if X > MAX_TRUNCATION:
        raise TruncationTooLarge(f"X = {X} > {MAX_TRUNCATION}")
    factors = []
    for p in primes_up_to(X):
        for pr in K.F.splitting(p).primes:
            q = pr.norm()
            if q > X:
                continue
            kind = K.splitting_kind(pr)
            if kind == "split":
                # (1 + q^-s)/(1 - q^-s) = 1 + 2 q^-s + 2 q^-2s + ...
                ln = len(_geom(X, q))
                factors.append((q, [Fraction(1)] + [Fraction(2)] * (ln - 1)))
            elif kind == "ramified":
                factors.append((q, [Fraction(1), Fraction(1)]))
    prod_route = _euler_coeffs(factors, X)
    zk = zeta_coeffs_cm(K, X)
    zf = zeta_coeffs_field(K.F, X)
    zf2 = [Fraction(0)] * X
    for n in range(1, X + 1):
        if n * n <= X:
            zf2[n * n - 1] = zf.coeffs[n - 1]
        else:
            break
    quotient_route = zk.div(CoeffSeries(X, zf2, "zeta_F(2s)"))
    assert prod_route == quotient_route.coeffs, "Euler product vs quotient mismatch"
    out = CoeffSeries(X, prod_route, "euler-product")
    assert all(v >= 0 for v in out.coeffs)
    return out


def vseries_csv(K: CMField, X: int) -> str:
    """CSV rows n,v_n for the positive quotient series."""
    vs = vseries(K, X)
    lines = ["n,v_n"]
    for n in range(1, X + 1):
        lines.append(f"{n},{int(vs.coeff(n))}")
    return "\n".join(lines) + "\n"


def vsum_check(K: CMField, X: int | None = None) -> dict:
    """sum of v_n over n < sqrt|disc|/2^n_F compared with h = h_K/|im phi|."""
    threshold = math.sqrt(K.rel_disc_norm) / 2**K.F.n
    if X is None:
        X = max(16, int(threshold) + 2)
    if threshold >= X:
        raise TruncationTooLarge("threshold exceeds the truncation range")
    vs = vseries(K, X)
    # exact comparison: n < sqrt(d)/2^nf iff n^2 4^nf < d
    total = Fraction(0)
    for n in range(1, X + 1):
        if n * n * 4**K.F.n < K.rel_disc_norm:
            total += vs.coeff(n)
    cd = K.class_data()
    ok = total <= cd.h
    if not ok:
        raise InequalityViolated(f"vsum {total} > h = {cd.h}")
    return {
        "threshold": threshold,
        "partial_sum": int(total),
        "h": cd.h,
        "ok": ok,
        "margin": cd.h - int(total),
    }


# -- measures and Mellin transforms --------------------------------------------------


@dataclass
class StepMeasure:
    """Atoms plus optional power-law density pieces c * t^gamma on [lo, hi]."""

    atoms: list[tuple[float, float]] = field(default_factory=list)
    density: list[tuple[float, float, float, float]] = field(default_factory=list)
    # density entries: (c, gamma, lo, hi); hi = inf allowed

    def mass_upto(self, t: float) -> float:
        out = 0.0
        for loc, m in self.atoms:
            if loc <= t:
                out += m
        for c, gamma, lo, hi in self.density:
            upper = min(t, hi)
            if upper > lo:
                if gamma == -1:
                    out += c * (math.log(upper) - math.log(lo))
                else:
                    out += c * (upper ** (gamma + 1) - lo ** (gamma + 1)) / (gamma + 1)
        return out

    def integral_of_mass(self, x: float, grid: int = 2000) -> float:
        """int_0^x mass([0,t]) dt; exact for atom-only measures, panelwise
        closed-form for the density pieces."""
        out = 0.0
        for loc, m in self.atoms:
            if loc < x:
                out += m * (x - loc)
        for c, gamma, lo, hi in self.density:
            upper = min(x, hi)
            if upper > lo:
                # int_lo^upper (x - t) c t^gamma dt
                if gamma == -1:
                    raise OutOfRegion("log-divergent density")
                g1 = gamma + 1
                g2 = gamma + 2
                out += c * (
                    x * (upper**g1 - lo**g1) / g1 - (upper**g2 - lo**g2) / g2
                )
        return out


def mellin_closed(kind: str, params: dict, s: complex) -> complex:
    """Closed-form Mellin transforms of the comparison measures.

    kind "gamma": integral of t^-s e^(-1/t) t^(u-1) dt = Gamma(s - u);
    kind "K": h_K A1 2^(n s - n) s / ((s-1) sqrt(d)^s);
    kind "F": h_F sqrt(A2) s/(s - 1/2).
    """
    s = complex(s)
    if kind == "gamma":
        u = params.get("u", 0.0)
        if s.real - u <= 0:
            raise OutOfRegion("Gamma transform needs Re(s) > u")
        return complex(mpmath.gamma(s - u))
    if kind == "K":
        if s.real <= 1:
            raise OutOfRegion("Re(s) > 1 required")
        h_K = params["h_K"]
        A1 = params["A1"]
        n = params["n"]
        d = params["reldisc"]
        return h_K * A1 * complex(2) ** (n * s - n) * s / ((s - 1) * complex(d) ** (s / 2))
    if kind == "F":
        if s.real <= 0.5:
            raise OutOfRegion("Re(s) > 1/2 required")
        h_F = params["h_F"]
        A2 = params["A2"]
        return h_F * math.sqrt(A2) * s / (s - 0.5)
    raise ValueError(f"unknown kind {kind}")


def mellin_quadrature(u: float, s: complex) -> complex:
    """Numerical check of the Gamma transform."""
    f = mpmath.quad(lambda t: t ** (-s) * mpmath.e ** (-1 / t) * t ** (u - 1), [0, mpmath.inf])
    return complex(f)


def measure_mu_K(K: CMField, x_max: float) -> StepMeasure:
    """Atoms |N(L N_i^-1)| over lines L in each N_i off the minimal line."""
    cd = K.class_data()
    mu = StepMeasure()
    for Ni in cd.N_reps:
        lines = line_norms(K, Ni, Fraction(math.ceil(x_max) + 1))
        if not lines:
            continue
        # the fixed L_i: minimal |N(L o_K)| among saturated lines
        sat = [t for t in lines if t[1]]
        exclude = sat[0][2] if sat else None
        for (val, is_sat, alpha) in lines:
            if exclude is not None and _same_line(K, alpha, exclude):
                continue
            if float(val) <= x_max:
                mu.atoms.append((float(val), 1.0))
    mu.atoms.sort()
    return mu


def _same_line(K, a, b) -> bool:
    return (a.x * b.y - a.y * b.x).is_zero()


def measure_mu_K_bound(K: CMField, A1: float) -> StepMeasure:
    cd = K.class_data()
    d = K.rel_disc_norm
    t0 = math.sqrt(d) / 2**K.F.n
    c = A1 * cd.h_K / math.sqrt(d)
    mu = StepMeasure()
    mu.atoms.append((t0, A1 * cd.h_K / 2**K.F.n))
    mu.density.append((c, 0.0, t0, math.inf))
    return mu


def measure_mu_F(F: Field, x_max: float) -> StepMeasure:
    """Atoms |N(m)|^2 over integral ideals m."""
    mu = StepMeasure()
    zf = zeta_coeffs_field(F, max(2, int(math.isqrt(int(x_max)) + 1)))
    mu.atoms.append((1.0, 1.0))  # the unit ideal
    for n in range(2, zf.X + 1):
        if n * n <= x_max:
            mu.atoms.append((float(n * n), float(zf.coeff(n))))
    return mu


def measure_mu_F_bound(F: Field, A2: float) -> StepMeasure:
    mu = StepMeasure()
    mu.atoms.append((1.0, math.sqrt(A2) * F.h_F))
    mu.density.append((F.h_F * math.sqrt(A2) / 2, -0.5, 1.0, math.inf))
    return mu


def measure_compare(K: CMField, samples: list[float], A1: float, A2: float) -> dict:
    """The two integral comparisons at the sample points; raises on violation."""
    x_max = max(samples)
    muK = measure_mu_K(K, x_max)
    muKp = measure_mu_K_bound(K, A1)
    muF = measure_mu_F(K.F, x_max)
    muFp = measure_mu_F_bound(K.F, A2)
    rows = []
    for x in samples:
        lhs_K = muK.integral_of_mass(x)
        rhs_K = muKp.integral_of_mass(x)
        lhs_F = muF.integral_of_mass(x)
        rhs_F = muFp.integral_of_mass(x)
        if lhs_K > rhs_K * (1 + 1e-12) + 1e-12:
            raise InequalityViolated(f"mu_K comparison fails at x = {x}")
        if lhs_F > rhs_F * (1 + 1e-12) + 1e-12:
            raise InequalityViolated(f"mu_F comparison fails at x = {x}")
        rows.append({"x": x, "K": (lhs_K, rhs_K), "F": (lhs_F, rhs_F)})
    return {"ok": True, "rows": rows}
