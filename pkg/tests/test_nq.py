import random
from fractions import Fraction

import pytest

from zgraded.algebra import koszul_sign
from zgraded.derivations import Derivation, is_homological
from zgraded.nq import (
    MultiBrackets,
    Section,
    SplitNManifold,
    admissible_tuples,
    brackets_from_q,
    evaluate,
    hat_derivation,
    q_from_brackets,
    verify_l_infinity,
)

from fixtures import abelian2_manifold, so3_brackets, so3_manifold, tm1_brackets, tm1_manifold


class TestHatAndEvaluate:
    def test_hat_contraction_so3(self):
        man = so3_manifold()
        e2 = Section.frame(man, 0, 1)
        eps = man.table.parse("e2*e3")
        assert hat_derivation(e2).apply(eps) == man.table.gen("e3")

    def test_hat_kills_base(self):
        man = tm1_manifold()
        a = Section.frame(man, 0, 0)
        assert hat_derivation(a).apply(man.table.parse("x^2")).is_zero()

    def test_hat_is_coordinate_field_on_duals(self):
        man = so3_manifold()
        e1 = Section.frame(man, 0, 0)
        assert hat_derivation(e1) == Derivation.coordinate(man.table, "e1")

    def test_evaluate_first_argument_innermost(self):
        man = so3_manifold()
        e2, e3 = Section.frame(man, 0, 1), Section.frame(man, 0, 2)
        xi = man.table.parse("e2*e3")
        assert evaluate(xi, (e2, e3)) == man.table.one()
        assert evaluate(xi, (e3, e2)) == -man.table.one()

    def test_evaluate_empty_tuple(self):
        man = tm1_manifold()
        f = man.table.parse("1 + x")
        assert evaluate(f, ()) == f

    def test_evaluate_koszul_permutation(self):
        rng = random.Random(5)
        man = SplitNManifold(["x"], [("q", 1, ["t1", "t2"]), ("p", 2, ["b1"])])
        frames = man.frame_sections()
        for _ in range(40):
            tup = [rng.choice(frames) for _ in range(rng.randint(1, 3))]
            degs = [s.degree for s in tup]
            total = sum(degs)
            cands = [
                e for e in (
                    man.table.parse("t1*t2"),
                    man.table.parse("b1"),
                    man.table.parse("x*t1"),
                    man.table.parse("t1*t2*b1"),
                    man.table.parse("b1^2"),
                )
                if e.degree() == total
            ]
            if not cands:
                continue
            xi = rng.choice(cands)
            perm = list(range(1, len(tup) + 1))
            rng.shuffle(perm)
            permuted = [tup[perm[i] - 1] for i in range(len(tup))]
            lhs = evaluate(xi, permuted)
            rhs = koszul_sign(perm, degs) * evaluate(xi, tup)
            assert lhs == rhs


class TestDictionary:
    def test_so3_q_images(self):
        man, br = so3_brackets()
        q = q_from_brackets(man, br)
        t = man.table
        assert q.image("e1") == -t.parse("e2*e3")
        assert q.image("e2") == -t.parse("e3*e1")
        assert q.image("e3") == -t.parse("e1*e2")

    def test_abelian_gives_zero(self):
        man = so3_manifold()
        br = MultiBrackets(man)
        q = q_from_brackets(man, br)
        assert all(img.is_zero() for img in q.images)

    def test_tm1_q(self):
        man, br = tm1_brackets()
        q = q_from_brackets(man, br)
        assert q.image("x") == man.table.gen("al")
        assert q.image("al").is_zero()

    def test_brackets_from_q_so3(self):
        man, br = so3_brackets()
        q = q_from_brackets(man, br)
        back = brackets_from_q(man, q)
        val = back.bracket_frames(("e2", "e3"))
        assert val.coeffs[0] == man.table.one()
        assert val.coeffs[1].is_zero() and val.coeffs[2].is_zero()

    def test_brackets_from_zero_q(self):
        man = so3_manifold()
        back = brackets_from_q(man, Derivation.zero(man.table, 1))
        assert not any(back.tables[j] for j in back.tables)

    def test_tm1_anchor_recovered(self):
        man, br = tm1_brackets()
        q = q_from_brackets(man, br)
        back = brackets_from_q(man, q)
        assert back.anchor["al"]["x"] == man.table.one()
        assert not any(back.tables[j] for j in back.tables)


def random_degree1_derivation(rng, man):
    """Random degree-1 derivation of a manifold table, poly coeffs deg <= 1."""
    t = man.table
    images = {}
    for name in t.names:
        target = t.degree(name) + 1
        img = t.zero()
        for tup in admissible_tuples(man, target):
            mono = t.one()
            for s in tup:
                mono = mono * t.gen(s.name)
            c = Fraction(rng.randint(-2, 2))
            poly = t.scalar(c)
            if man.base_vars and rng.random() < 0.5:
                poly = poly * t.gen(rng.choice(man.base_vars))
            img = img + poly * mono
        images[name] = img
    return Derivation(t, 1, images)


def random_manifold(rng):
    nb = rng.randint(0, 2)
    base = [f"x{i}" for i in range(nb)]
    r1 = rng.randint(1, 3)
    bundles = [("q", 1, [f"t{i}" for i in range(r1)])]
    if rng.random() < 0.7:
        r2 = rng.randint(1, 3)
        bundles.append(("p", 2, [f"b{i}" for i in range(r2)]))
    return SplitNManifold(base, bundles)


class TestRoundTrip:
    def test_fixture_round_trips(self):
        for man, br in (so3_brackets(), tm1_brackets()):
            q = q_from_brackets(man, br)
            back = brackets_from_q(man, q)
            q2 = q_from_brackets(man, back)
            assert q == q2

    def test_random_round_trips(self):
        rng = random.Random(101)
        for _ in range(25):
            man = random_manifold(rng)
            q = random_degree1_derivation(rng, man)
            br = brackets_from_q(man, q)
            assert q_from_brackets(man, br) == q


class TestLInfinity:
    def test_so3_passes(self):
        man, br = so3_brackets()
        assert verify_l_infinity(man, br).passed

    def test_zero_brackets_pass(self):
        man = abelian2_manifold()
        assert verify_l_infinity(man, MultiBrackets(man)).passed

    def test_off_diagonal_perturbation_fails(self):
        man, br = so3_brackets(off_diagonal=True)
        rep = verify_l_infinity(man, br)
        assert not rep.passed
        assert any("homotopy-jacobi" in c.identity for c in rep.failures())

    def test_equivalence_with_q_squared(self):
        rng = random.Random(77)
        agree = disagree = 0
        for _ in range(30):
            man = random_manifold(rng)
            q = random_degree1_derivation(rng, man)
            br = brackets_from_q(man, q)
            a = verify_l_infinity(man, br).passed
            b = is_homological(q_from_brackets(man, br)).passed
            if a == b:
                agree += 1
            else:
                disagree += 1
        assert disagree == 0
        assert agree == 30
