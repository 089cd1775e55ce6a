"""Small exact linear algebra over the integers and rationals.

Everything here works on lists of lists of ints/Fractions (row vectors).
Dimensions stay tiny (<= 8), so the quadratic algorithms are fine.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


def hnf_lattice(rows: list[list[int]]) -> list[list[int]]:
    """HNF basis of the integer lattice spanned by possibly redundant rows.

    Row-style, lower-left echelon: pivot columns increase, pivots positive,
    entries above each pivot reduced into [0, pivot).
    """
    work = [list(r) for r in rows if any(r)]
    if not work:
        return []
    ncols = len(work[0])
    basis: list[list[int]] = []
    for col in range(ncols):
        with_pivot = [r for r in work if r[col] != 0]
        without = [r for r in work if r[col] == 0]
        if not with_pivot:
            work = without
            continue
        piv = with_pivot[0]
        for r in with_pivot[1:]:
            a, b = piv, r
            while b[col] != 0:
                q = a[col] // b[col]
                a = [x - q * y for x, y in zip(a, b)]
                a, b = b, a
            piv = a
            if any(b):
                without.append(b)
        if piv[col] < 0:
            piv = [-x for x in piv]
        basis.append(piv)
        work = without
    # normalize above-pivot entries; ascending pivot order keeps earlier
    # columns clean since row i has zeros before its pivot
    for i in range(len(basis)):
        c = next(k for k in range(ncols) if basis[i][k] != 0)
        for j in range(i):
            q = basis[j][c] // basis[i][c]
            if q:
                basis[j] = [a - q * b for a, b in zip(basis[j], basis[i])]
    return basis


def lattice_index(basis: list[list[int]]) -> int:
    """Determinant (covolume) of a full-rank square HNF basis."""
    det = 1
    for i in range(len(basis)):
        det *= basis[i][i]
    return abs(det)


def det_int(rows: list[list[int]]) -> int:
    """Determinant of a small integer matrix."""
    n = len(rows)
    m = [[Fraction(x) for x in r] for r in rows]
    det = Fraction(1)
    for i in range(n):
        piv = None
        for r in range(i, n):
            if m[r][i] != 0:
                piv = r
                break
        if piv is None:
            return 0
        if piv != i:
            m[i], m[piv] = m[piv], m[i]
            det = -det
        det *= m[i][i]
        inv = 1 / m[i][i]
        for r in range(i + 1, n):
            f = m[r][i] * inv
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[i])]
    assert det.denominator == 1
    return int(det)


def solve_exact(mat: list[list[Fraction]], rhs: list[Fraction]):
    """One rational solution of mat * x = rhs (rows = equations), or None."""
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    a = [[Fraction(mat[i][j]) for j in range(ncols)] + [Fraction(rhs[i])] for i in range(nrows)]
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if a[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    for i in range(r, nrows):
        if a[i][ncols] != 0:
            return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = a[i][ncols]
    return x


def solve_integral(basis: list[list[int]], target: list[int]):
    """Express `target` as an integer combination of basis rows; None if outside."""
    cols = len(target)
    mat = [[Fraction(basis[i][j]) for i in range(len(basis))] for j in range(cols)]
    sol = solve_exact(mat, [Fraction(t) for t in target])
    if sol is None:
        return None
    if any(s.denominator != 1 for s in sol):
        return None
    return [int(s) for s in sol]


def in_lattice(basis: list[list[int]], target: list[int]) -> bool:
    return solve_integral(basis, target) is not None


def kernel_mod_p(rows: list[list[int]], p: int) -> list[list[int]]:
    """Basis of the right kernel of the matrix over F_p."""
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    a = [[x % p for x in r] for r in rows]
    pivots: dict[int, int] = {}
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if a[i][c] % p:
                pr = i
                break
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        inv = pow(a[r][c], -1, p)
        a[r] = [(x * inv) % p for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
        pivots[c] = r
        r += 1
        if r == nrows:
            break
    ker = []
    for fc in [c for c in range(ncols) if c not in pivots]:
        v = [0] * ncols
        v[fc] = 1
        for c, pr in pivots.items():
            v[c] = (-a[pr][fc]) % p
        ker.append(v)
    return ker


def smith_normal_form(rows: list[list[int]]) -> list[int]:
    """Elementary divisors of an integer matrix."""
    m = [list(r) for r in rows]
    nr = len(m)
    nc = len(m[0]) if nr else 0
    divisors = []
    top = 0
    while top < min(nr, nc):
        best = None
        for i in range(top, nr):
            for j in range(top, nc):
                if m[i][j] != 0 and (best is None or abs(m[i][j]) < abs(m[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i0, j0 = best
        m[top], m[i0] = m[i0], m[top]
        for r in m:
            r[top], r[j0] = r[j0], r[top]
        done = True
        for i in range(top + 1, nr):
            q = m[i][top] // m[top][top]
            if q:
                m[i] = [a - q * b for a, b in zip(m[i], m[top])]
            if m[i][top] != 0:
                done = False
        if done:
            for j in range(top + 1, nc):
                q = m[top][j] // m[top][top]
                if q:
                    for r in m:
                        r[j] -= q * r[top]
                if m[top][j] != 0:
                    done = False
        if not done:
            continue
        d = abs(m[top][top])
        bad = None
        for i in range(top + 1, nr):
            if any(m[i][j] % d for j in range(top + 1, nc)):
                bad = i
                break
        if bad is not None:
            m[top] = [a + b for a, b in zip(m[top], m[bad])]
            continue
        divisors.append(d)
        top += 1
    return divisors


def gcd_list(xs) -> int:
    g = 0
    for x in xs:
        g = gcd(g, int(x))
    return g


def _augmented_hnf(rows: list[list[int]], width: int) -> list[list[int]]:
    """HNF of [rows | I], used to track transformations and kernels."""
    n = len(rows)
    aug = [list(rows[i]) + [1 if j == i else 0 for j in range(n)] for i in range(n)]
    work = aug
    basis: list[list[int]] = []
    for col in range(width):
        with_pivot = [r for r in work if r[col] != 0]
        without = [r for r in work if r[col] == 0]
        if not with_pivot:
            work = without
            continue
        piv = with_pivot[0]
        for r in with_pivot[1:]:
            a, b = piv, r
            while b[col] != 0:
                q = a[col] // b[col]
                a = [x - q * y for x, y in zip(a, b)]
                a, b = b, a
            piv = a
            without.append(b)
        if piv[col] < 0:
            piv = [-x for x in piv]
        basis.append(piv)
        work = without
    basis.extend(work)  # rows whose lattice part is zero carry kernel combinations
    return basis


def zspan_solve(vectors: list[list[int]], target: list[int]):
    """Integer coefficients c with sum c_i * vectors[i] = target, or None."""
    width = len(target)
    aug = _augmented_hnf(vectors, width)
    lattice_rows = [r[:width] for r in aug if any(r[:width])]
    coeffs_rows = [r[width:] for r in aug if any(r[:width])]
    sol = solve_integral(lattice_rows, target)
    if sol is None:
        return None
    n = len(vectors)
    out = [0] * n
    for s, crow in zip(sol, coeffs_rows):
        for k in range(n):
            out[k] += s * crow[k]
    return out


def zspan_kernel(vectors: list[list[int]]) -> list[list[int]]:
    """Basis of integer combinations of `vectors` summing to zero."""
    width = len(vectors[0]) if vectors else 0
    aug = _augmented_hnf(vectors, width)
    return [r[width:] for r in aug if not any(r[:width])]
