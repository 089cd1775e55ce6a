import math
from fractions import Fraction

import pytest
from oracles import hilbert_symbol_2adic_oracle

from relclass.cm import class_counts, make_cm
from relclass.errors import DegenerateForm, LemmaViolation, NotFundamental
from relclass.field import make_field
from relclass.forms import (
    classify,
    form_to_ideal,
    genus_char,
    genus_places,
    genus_vector,
    hilbert_symbol,
    ideal_to_form,
    is_fundamental,
    lower_bound_t,
    make_form,
    minimal_lines,
    prescribe_genus,
    represent_search,
    representable_criterion,
    weakly_equivalent,
)

Q = make_field(1)
F2 = make_field(2, 2)
F5 = make_field(2, 5)


def test_disc_and_norm_ideals():
    assert make_form(Q, 1, 0, 1).disc_ideal().norm() == 4
    assert make_form(Q, 2, 1, 3).disc_ideal().norm() == 23
    assert make_form(Q, 1, 0, 1, Q.ideal(3)).disc_ideal().norm() == 36
    assert make_form(Q, 1, 0, 1).norm_ideal().norm() == 1
    assert make_form(Q, 2, 0, 4).norm_ideal().norm() == 2
    assert make_form(Q, 2, 1, 3).norm_ideal().norm() == 1


def test_degenerate_rejected():
    with pytest.raises(DegenerateForm):
        make_form(Q, 1, 2, 1).disc_ideal()


def test_definiteness():
    assert make_form(Q, 1, 0, 1).is_positive_definite()
    f = make_form(Q, -1, 0, -1)
    assert f.is_definite() and not f.is_positive_definite()
    g = make_form(F2, F2.one(), F2.zero(), F2.omega())  # x^2 + sqrt2 y^2
    assert not g.is_definite()


def test_fundamentality():
    assert is_fundamental(make_form(Q, 1, 0, 1))
    assert not is_fundamental(make_form(Q, 1, 0, 4))
    assert is_fundamental(make_form(Q, 3, 0, 3))  # disc/norm^2 = (4)
    assert is_fundamental(make_form(Q, 2, 2, 3))
    assert not is_fundamental(make_form(Q, 1, 0, 9))  # disc -36 = 9 * (-4)


def test_basis_change_invariance():
    # random unimodular changes preserve the ideals and fundamentality
    import random

    rng = random.Random(7)
    for _ in range(40):
        a, b, c = 1 + rng.randrange(4), rng.randrange(-3, 4), 1 + rng.randrange(5)
        f = make_form(Q, a, b, c)
        if f.field_disc().is_zero() or not f.is_definite():
            continue
        p, q = rng.randrange(-3, 4), rng.randrange(-3, 4)
        r, s = rng.randrange(-3, 4), rng.randrange(-3, 4)
        if p * s - q * r not in (1, -1):
            continue
        # transformed coefficients
        a2 = f.value(Q.elem(p), Q.elem(r))
        c2 = f.value(Q.elem(q), Q.elem(s))
        b2 = (
            f.value(Q.elem(p + q), Q.elem(r + s)) - a2 - c2
        )
        g = make_form(Q, a2.a, b2.a, c2.a)
        assert g.disc_ideal() == f.disc_ideal()
        assert g.norm_ideal() == f.norm_ideal()
        assert g.is_definite() == f.is_definite()
        assert is_fundamental(g) == is_fundamental(f)
        det = p * s - q * r
        assert g.field_disc() == f.field_disc() * Q.elem(det * det)


def test_ideal_to_form_examples():
    K1 = make_cm(Q, -1)
    f = ideal_to_form(K1, K1.maximal_order())
    assert (f.a, f.b, f.c) == (Q.one(), Q.zero(), Q.one())
    K23 = make_cm(Q, -23)
    f = ideal_to_form(K23, K23.maximal_order())
    assert (f.a.a, f.b.a, f.c.a) == (1, 1, 6)
    # the norm form of (2, 1+sqrt-5) has content N(A) = (2)
    K5 = make_cm(Q, -5)
    p2 = K5.kprimes_up_to(3)[0]
    f = ideal_to_form(K5, p2.ideal)
    assert f.norm_ideal().norm() == 2
    assert f.disc_ideal() == K5.rel_disc * (p2.ideal.rel_norm() ** 2)


def test_form_to_ideal_examples():
    K, A, scale = form_to_ideal(make_form(Q, 1, 0, 1))
    assert scale == Q.elem(4)
    assert A.abs_norm() == 4  # the module Z*2 + Z*2i = (2)
    K, A, scale = form_to_ideal(make_form(Q, 2, 1, 3))
    assert A.abs_norm() == 8
    with pytest.raises(NotFundamental):
        form_to_ideal(make_form(Q, 1, 0, 4))


def test_roundtrip_weak_equivalence():
    for (a, b, c) in ((1, 0, 1), (2, 1, 3), (1, 0, 5), (2, 2, 3), (3, 2, 5)):
        f = make_form(Q, a, b, c)
        K, A, _ = form_to_ideal(f)
        g = ideal_to_form(K, A)
        assert weakly_equivalent(f, g)
    assert not weakly_equivalent(make_form(Q, 1, 0, 5), make_form(Q, 2, 2, 3))


def test_classify_counts():
    for delta, weak_expected in ((-1, 1), (-23, 2), (-5, 2)):
        K = make_cm(Q, delta)
        strong, weak = classify(K)
        assert len(weak) == weak_expected
        assert len(weak) <= class_counts(K)[0] <= 2 * len(weak)


def test_hilbert_symbol_classics():
    p2 = Q.splitting(2).primes[0]
    for a in (-7, -5, -3, -1, 1, 2, 3, 5, 6, 10):
        for b in (-6, -1, 2, 3, 5, 7):
            got = hilbert_symbol(Q, Q.elem(a), Q.elem(b), p2)
            assert got == hilbert_symbol_2adic_oracle(a, b), (a, b)


def test_hilbert_symbol_product_formula():
    # product over all places is 1
    for (a, b) in ((-5, 3), (2, -15), (-21, 10), (6, -35)):
        prod = hilbert_symbol(Q, Q.elem(a), Q.elem(b), 0)
        for p in {2, 3, 5, 7, 2, 3, 5, 7} | set(_pdiv(a)) | set(_pdiv(b)):
            pr = Q.splitting(p).primes[0]
            prod *= hilbert_symbol(Q, Q.elem(a), Q.elem(b), pr)
        assert prod == 1, (a, b)


def _pdiv(n):
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def test_hilbert_symbol_real_quadratic_product_formula():
    F = F2
    vals = [F.elem(3, 1), F.elem(-1), F.elem(1, 1), F.elem(7), F.elem(-5, 1)]
    for s in vals:
        for d in vals:
            if s.is_zero() or d.is_zero():
                continue
            prod = 1
            for i in range(2):
                prod *= hilbert_symbol(F, s, d, i)
            ps = set(_pdiv(int((s.norm() * d.norm() * 2).numerator)))
            for p in sorted(ps | {2}):
                for pr in F.splitting(p).primes:
                    prod *= hilbert_symbol(F, s, d, pr)
            assert prod == 1, (s, d)


def test_genus_char_independence():
    # e_5 of 2x^2+2xy+3y^2 computed from different represented values agree
    p5 = Q.splitting(5).primes[0]
    d = Q.elem(-20)
    assert hilbert_symbol(Q, Q.elem(2), d, p5) == hilbert_symbol(Q, Q.elem(3), d, p5)
    f = make_form(Q, 2, 2, 3)
    K5 = make_cm(Q, -5)
    assert genus_char(f, K5, p5) == -1


def test_genus_product_one_for_norm_forms():
    for delta in (-5, -23, -105, -21):
        K = make_cm(Q, delta)
        cd = K.class_data()
        for rep in cd.reps:
            f = ideal_to_form(K, rep)
            gv = genus_vector(f, K)
            assert math.prod(gv.values()) == 1


def test_unramified_characters_trivial():
    K = make_cm(Q, -5)
    f = ideal_to_form(K, K.maximal_order())
    for p in (3, 7, 11, 13):
        pr = Q.splitting(p).primes[0]
        assert genus_char(f, K, pr) == 1


def test_representability():
    K1 = make_cm(Q, -1)
    assert representable_criterion(K1, Q.elem(5))
    assert not representable_criterion(K1, Q.elem(3))
    K5 = make_cm(Q, -5)
    assert representable_criterion(K5, Q.elem(9))
    Qf, A, gamma, xy = represent_search(K1, Q.elem(5))
    assert Qf.value(*xy) == Q.elem(5)
    Qf, A, gamma, xy = represent_search(K5, Q.elem(9))
    assert Qf.value(*xy) == Q.elem(9)


def test_prescribe_genus_disc20():
    K5 = make_cm(Q, -5)
    reals, primes = genus_places(K5)
    keys = [("inf", i) for i in reals] + [("p", pr.p, str(pr.second_gen)) for pr in primes]
    all_plus = {k: 1 for k in keys}
    Qf, e0 = prescribe_genus(K5, all_plus)
    gv = genus_vector(Qf, K5)
    assert all(gv[k] == 1 for k in keys)
    flipped = dict(all_plus)
    flipped[keys[1]] = -1
    flipped[keys[2]] = -1
    Qf2, e02 = prescribe_genus(K5, flipped)
    assert genus_vector(Qf2, K5) == flipped
    bad = dict(all_plus)
    bad[keys[0]] = -1
    with pytest.raises(ValueError):
        prescribe_genus(K5, bad)


def test_lower_bound_t():
    assert lower_bound_t(make_cm(Q, -1)) == (1, 1)
    assert lower_bound_t(make_cm(Q, -5)) == (2, 2)
    assert lower_bound_t(make_cm(Q, -105)) == (4, 8)
    # equality witnesses for t = 1..4
    for delta, t in ((-1, 1), (-5, 2), (-30, 3), (-105, 4)):
        tt, bound = lower_bound_t(make_cm(Q, delta))
        assert tt == t
        assert class_counts(make_cm(Q, delta))[0] >= bound


def test_minimal_line_counts():
    assert len(minimal_lines(make_form(Q, 1, 0, 5))) == 1
    assert len(minimal_lines(make_form(Q, 2, 1, 3))) == 1
    assert len(minimal_lines(make_form(Q, 1, 0, 1))) == 0


def test_minimal_line_random_never_two():
    import random

    rng = random.Random(11)
    count = 0
    for _ in range(200):
        a = 1 + rng.randrange(6)
        b = rng.randrange(-6, 7)
        c = 1 + rng.randrange(8)
        f = make_form(Q, a, b, c)
        d = f.field_disc()
        if d.is_zero() or not d.is_totally_negative():
            continue
        minimal_lines(f)  # raises LemmaViolation if more than one
        count += 1
    assert count > 80


def test_scaling_lemma_on_value_ideals():
    # I(Q, a*N) = a^2 I(Q, N) realized through the form scaled module
    f = make_form(Q, 2, 1, 3)
    base = f.disc_ideal()
    g = make_form(Q, 2, 1, 3, Q.ideal(5))
    assert g.disc_ideal() == base * Q.ideal(25)


def test_real_quadratic_correspondence_small():
    F = F2
    K = make_cm(F, F.elem(-5))
    cd = K.class_data()
    strong, weak = classify(K)
    assert len(weak) == cd.orbits
    for Qf in weak:
        assert Qf.is_positive_definite()
        assert is_fundamental(Qf, cross_check=False)


def test_value_ideal_scaling():
    # I(Q, a N) = a^2 I(Q, N) on the line through (x, y)
    from relclass.forms import _line_colon
    from fractions import Fraction

    f = make_form(Q, 2, 1, 3)
    x, y = Q.elem(1), Q.elem(1)
    b = _line_colon(Q, f, x, y)
    I = Q.ideal(f.value(x, y)) * (b * b)
    x2, y2 = Q.elem(3), Q.elem(3)  # the line scaled by (3)
    b2 = _line_colon(Q, f, x2, y2)
    I2 = Q.ideal(f.value(x2, y2)) * (b2 * b2)
    assert I2 == I  # same saturated line, same value ideal
    # a non-saturated sub-line scales by the square
    g = make_form(Q, 2, 1, 3, Q.ideal(5))
    assert g.disc_ideal() == f.disc_ideal() * Q.ideal(25)


def test_strong_count_reaches_genus_bound():
    K5 = make_cm(Q, -5)
    strong, weak = classify(K5)
    t = len(K5.rel_disc_primes)
    n = 1
    # all sign systems realized implies at least 2^(t+n-1) strong refinements
    assert len(strong) >= 2 ** (t + n - 1)


def test_unit_square_representatives():
    F2l = make_field(2, 2)
    from relclass.forms import _unit_square_reps

    reps = _unit_square_reps(F2l)
    assert len(reps) == F2l.unit_sq_index == 4
    one, minus, eps, meps = reps
    assert eps == F2l.eps and minus == -F2l.one()
