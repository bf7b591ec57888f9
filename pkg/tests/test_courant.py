import random
from fractions import Fraction

import pytest

from zgraded.algebra import GeneratorTable
from zgraded.derivations import is_homological
from zgraded.lie2 import LinearConnection, check_axioms, q_from_data
from zgraded.courant import (
    CourantData,
    check_courant,
    point_realization,
    split_symplectic_lie2,
)


def so3_quadratic(rank=3, perturb=None):
    """so(3) with the pairing delta_ij, optionally extended by central
    paired generators up to `rank`; perturb = (i, j, k, amount) adds
    amount*e_k to [[e_i, e_j]] and the skew partner."""
    n = rank
    frame = [f"e{i+1}" for i in range(n)]
    t = GeneratorTable([(g, 1) for g in frame])
    one, zero = t.one(), t.zero()
    pairing = [[one if i == j else zero for j in range(n)] for i in range(n)]
    eps = {(0, 1): 2, (1, 2): 0, (2, 0): 1}
    bracket = {}
    for (i, j), k in eps.items():
        vec = [zero] * n
        vec[k] = one
        bracket[(i, j)] = vec
        bracket[(j, i)] = [-c for c in vec]
    data = CourantData([], frame, pairing, bracket=bracket, table=t)
    if perturb:
        i, j, k, amount = perturb
        vec = data.bracket_frames(i, j)
        vec[k] = vec[k] + t.scalar(amount)
        data.bracket[(i, j)] = vec
        back = data.bracket_frames(j, i)
        back[k] = back[k] - t.scalar(amount)
        data.bracket[(j, i)] = back
    return data


def tm_courant():
    """The standard Courant algebroid TR + T*R with frames X (vector) and
    W (covector): all frame brackets vanish, <X, W> = 1."""
    t = GeneratorTable([("x", 0), ("X", 1), ("W", 1)])
    zero, one = t.zero(), t.one()
    pairing = [[zero, one], [one, zero]]
    data = CourantData(["x"], ["X", "W"], pairing,
                       anchor={0: {"x": one}}, table=t)
    return data


class TestCheckCourant:
    def test_so3_passes(self):
        assert check_courant(so3_quadratic()).passed

    def test_abelian_any_pairing(self):
        t = GeneratorTable([("e1", 1), ("e2", 1)])
        pairing = [[t.scalar(2), t.one()], [t.one(), t.scalar(3)]]
        data = CourantData([], ["e1", "e2"], pairing, table=t)
        assert check_courant(data).passed

    def test_tm_courant_passes(self):
        assert check_courant(tm_courant()).passed

    def test_sign_flip_breaks_invariance(self):
        # [[e1,e2]] = -e3 with the cyclic rest is still a Lie algebra but
        # not pairing-invariant
        data = so3_quadratic(perturb=(0, 1, 2, -2))
        rep = check_courant(data)
        assert not rep.passed
        bad = {c.identity for c in rep.failures()}
        assert "courant/axiom-4" in bad
        assert "courant/axiom-3" not in bad

    def test_off_diagonal_breaks_jacobi(self):
        data = so3_quadratic(perturb=(0, 1, 1, 1))
        rep = check_courant(data)
        assert not rep.passed
        assert any(c.identity == "courant/axiom-3" for c in rep.failures())

    def test_singular_pairing_rejected(self):
        t = GeneratorTable([("e1", 1), ("e2", 1)])
        pairing = [[t.one(), t.zero()], [t.zero(), t.zero()]]
        with pytest.raises(ValueError):
            CourantData([], ["e1", "e2"], pairing, table=t)


class TestSplitSymplectic:
    def test_over_point_reduces_to_quadratic_lie(self):
        data = so3_quadratic()
        nabla = LinearConnection.zero((), 3)
        lie2 = split_symplectic_lie2(data, nabla)
        assert check_axioms(lie2).passed
        assert is_homological(q_from_data(lie2)).passed

    def test_tm_courant_with_flat_connection(self):
        data = tm_courant()
        nabla = LinearConnection.zero(("x",), 2)
        lie2 = split_symplectic_lie2(data, nabla)
        rep = check_axioms(lie2)
        assert rep.passed, rep.failures()[:5]
        assert is_homological(q_from_data(lie2)).passed

    def test_non_metric_connection_rejected(self):
        data = tm_courant()
        t = data.table
        nabla = LinearConnection(("x",), 2, {("x", 0): [t.one(), t.zero()]})
        with pytest.raises(ValueError):
            split_symplectic_lie2(data, nabla)

    def test_perturbed_bracket_detected_downstream(self):
        data = so3_quadratic(perturb=(0, 1, 1, 1))
        nabla = LinearConnection.zero((), 3)
        with pytest.raises(ValueError):
            split_symplectic_lie2(data, nabla)
        lie2 = split_symplectic_lie2(data, nabla, require_axioms=False)
        assert not is_homological(q_from_data(lie2)).passed


class TestPointRealization:
    def test_abelian_theta_zero(self):
        t = GeneratorTable([("e1", 1), ("e2", 1)])
        pairing = [[t.one(), t.zero()], [t.zero(), t.one()]]
        data = CourantData([], ["e1", "e2"], pairing, table=t)
        real = point_realization(data)
        assert real.theta.is_zero()
        assert real.report.passed

    def test_so3_realization(self):
        data = so3_quadratic()
        real = point_realization(data)
        assert real.report.passed
        t = data.table
        # Theta is proportional to e1 e2 e3
        assert set(real.theta.terms) == {(0, 1, 2)}
        # {e2, {e1, Theta}} = [[e1, e2]] = e3
        got = real.bracket(t.gen("e2"), real.bracket(t.gen("e1"), real.theta))
        assert got == real.mv.include(t.gen("e3"))

    def test_upsilon_values(self):
        data = so3_quadratic()
        real = point_realization(data)
        t = data.table
        # Upsilon(e_i)(e_j) = <e_i, e_j>
        for i in range(3):
            for j in range(3):
                val = real.upsilon(t.gen(data.frame[i]), [t.gen(data.frame[j])])
                assert val == real.mv.include(data.pairing[i][j])
        # Upsilon(Theta)(e_i,e_j,e_l) = <[[e_i,e_j]], e_l>
        for i in range(3):
            for j in range(3):
                for l in range(3):
                    val = real.upsilon(real.theta,
                                       [t.gen(data.frame[i]), t.gen(data.frame[j]),
                                        t.gen(data.frame[l])])
                    want = data.pair(data.bracket_frames(i, j),
                                     [t.one() if n == l else t.zero() for n in range(3)])
                    assert val == real.mv.include(want)
        # Upsilon(1)() = 1
        assert real.upsilon(t.one(), []) == real.mv.table.one()

    def test_perturbed_so3_refused(self):
        data = so3_quadratic(perturb=(0, 1, 2, -2))
        with pytest.raises(ValueError):
            point_realization(data)

    def test_rank4_perturbation_fails_certification(self):
        # at rank 4 every pair of distinct cubics shares two indices, so
        # {Theta,Theta} stays 0; the recovery certificate catches it
        data = so3_quadratic(rank=4, perturb=(0, 1, 3, 1))
        real = point_realization(data, require_axioms=False)
        assert not real.report.passed
        master = [c for c in real.report if c.identity == "realize/master-equation"]
        assert master[0].passed()
        rec = [c for c in real.report if c.identity == "realize/bracket-recovery"]
        assert not all(c.passed() for c in rec)

    def test_master_equation_fails_at_rank5(self):
        # [[e1,e4]] += e5 puts e1*e4*e5 into Theta, which shares exactly
        # one index with e1*e2*e3, so {Theta,Theta} != 0
        data = so3_quadratic(rank=5, perturb=(0, 3, 4, 1))
        real = point_realization(data, require_axioms=False)
        master = [c for c in real.report if c.identity == "realize/master-equation"]
        assert not master[0].passed()

    def test_equivalence_on_random_antisymmetric_tables(self):
        rng = random.Random(18)
        agree = saw_pass = saw_fail = 0
        for trial in range(20):
            n = rng.randint(2, 3)
            frame = [f"e{i+1}" for i in range(n)]
            t = GeneratorTable([(g, 1) for g in frame])
            pairing = [[t.one() if i == j else t.zero() for j in range(n)]
                       for i in range(n)]
            bracket = {}
            for i in range(n):
                for j in range(i + 1, n):
                    vec = [t.scalar(rng.randint(-1, 1)) for _ in range(n)]
                    bracket[(i, j)] = vec
                    bracket[(j, i)] = [-c for c in vec]
            data = CourantData([], frame, pairing, bracket=bracket, table=t)
            ok_axioms = check_courant(data).passed
            real = point_realization(data, require_axioms=False)
            if ok_axioms == real.report.passed:
                agree += 1
            saw_pass += ok_axioms
            saw_fail += not ok_axioms
        assert agree == 20
        assert saw_pass > 0 and saw_fail > 0
