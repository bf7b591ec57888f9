"""Acceptance suite: one test per criterion, exact (zero-residual) checks.

Each test prints one `[criterion N] PASS` line on success; a failing
assertion leaves the line unprinted.  Randomized criteria use fixed seeds
so the suite is reproducible.
"""

import copy
import json
import random
import subprocess
import sys
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import pytest

from zgraded.algebra import Element, GeneratorTable, ZERO_DEGREE, koszul_sign
from zgraded.derivations import Derivation, commutator, is_homological
from zgraded.lie2 import (
    LinearConnection,
    SplitLie2Data,
    change_of_splitting_transform,
    check_axioms,
    data_from_q,
    q_from_data,
)
from zgraded.nq import MultiBrackets, SplitNManifold, admissible_tuples, brackets_from_q, q_from_brackets, verify_l_infinity
from zgraded.poisson import (
    MultivectorAlgebra,
    check_poisson,
    check_pq,
    darboux_bivector,
    poisson_bracket,
    poisson_weil_check,
)
from zgraded.courant import CourantData, check_courant, point_realization, split_symplectic_lie2
from zgraded.ruth import (
    ConnectionUpToHomotopy,
    EndValued,
    GBundle,
    RepMorphism,
    adjoint_rep,
    canonical_isos,
    check_adjoint_module_iso,
    check_morphism,
    check_rep3,
    compose_morphisms,
    curvature_and_gtr,
    is_exact,
)
from zgraded.weil import WeilAlgebra, bicomplex_check, cartan_report

from fixtures import so3_brackets, so3_manifold, tm1_brackets, tm1_manifold
from test_derivations import so3_q
from test_lie2 import abelian2, random_lie2, so3_lie2, tm1_lie2
from test_poisson import kk_fixture
from test_courant import so3_quadratic, tm_courant


def announce(n, message):
    print(f"[criterion {n}] PASS - {message}")


# -- criterion 1 -------------------------------------------------------------


def random_table(rng):
    n = rng.randint(2, 6)
    return GeneratorTable([(f"g{i}", rng.randint(-2, 3)) for i in range(n)])


def random_element(rng, t, terms=3, factors=2):
    out = t.zero()
    for _ in range(rng.randint(1, terms)):
        term = t.scalar(Fraction(rng.randint(-4, 4), rng.randint(1, 3)))
        for _ in range(rng.randint(0, factors)):
            term = term * t.gen(rng.choice(t.names))
        out = out + term
    return out


def random_homogeneous(rng, t):
    comps = random_element(rng, t).homogeneous_components()
    if not comps:
        return t.zero()
    return comps[rng.choice(list(comps))]


def test_criterion_1_algebra_laws():
    rng = random.Random(20260101)
    for trial in range(1000):
        t = random_table(rng)
        a, b, c = (random_element(rng, t) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        ah, bh = random_homogeneous(rng, t), random_homogeneous(rng, t)
        da, db = ah.degree(), bh.degree()
        if da not in (None, ZERO_DEGREE) and db not in (None, ZERO_DEGREE):
            sign = -1 if (da % 2 and db % 2) else 1
            assert ah * bh == sign * (bh * ah)
        gen = rng.choice(t.names)
        x = Derivation.coordinate(t, gen)
        scale = random_homogeneous(rng, t)
        if scale.degree() not in (None, ZERO_DEGREE):
            x = x.scale(scale)
        if da not in (None, ZERO_DEGREE):
            sign = -1 if (x.degree % 2 and da % 2) else 1
            assert x.apply(ah * b) == x.apply(ah) * b + sign * (ah * x.apply(b))
    announce(1, "associativity, graded commutativity and Leibniz on 1000 instances")


# -- criterion 2 -------------------------------------------------------------


def test_criterion_2_equivalence_theorem():
    rng = random.Random(20260202)
    instances = []
    for _ in range(35):
        instances.append(random_lie2(rng, base_n=rng.randint(0, 1),
                                     rq=rng.randint(1, 2), rb=rng.randint(0, 2)))
    # passing instances via splitting transforms of fixtures
    base = so3_lie2(b_rank=1)
    t = base.table
    for n in range(10):
        sigma = {}
        for i in range(base.rq):
            for j in range(i + 1, base.rq):
                sigma[(i, j)] = [t.scalar(rng.randint(-2, 2)) for _ in range(base.rb)]
        instances.append(change_of_splitting_transform(base, sigma))
    # seeded negative controls: perturb one structure function of passing data
    for n in range(5):
        data = change_of_splitting_transform(base, {(0, 1): [t.scalar(n + 1)]})
        vec = data.dull.bracket_frames(0, 1)
        vec[1] = vec[1] + t.one()
        data.dull.set_bracket(0, 1, vec)
        instances.append(data)
    assert len(instances) == 50
    verdicts = []
    for k, data in enumerate(instances):
        a = check_axioms(data).passed
        b = is_homological(q_from_data(data)).passed
        assert a == b, f"instance {k}: axioms {a} vs Q^2 {b}"
        verdicts.append(a)
    assert any(verdicts) and not all(verdicts)
    announce(2, "check_axioms and Q^2 agree on 50 instances incl. negative controls")


# -- criterion 3 -------------------------------------------------------------


def random_2manifold(rng):
    base = [f"x{i}" for i in range(rng.randint(0, 2))]
    bundles = [("q", 1, [f"t{i}" for i in range(rng.randint(1, 3))])]
    if rng.random() < 0.8:
        bundles.append(("p", 2, [f"b{i}" for i in range(rng.randint(1, 2))]))
    return SplitNManifold(base, bundles)


def random_degree1_field(rng, man):
    t = man.table
    images = {}
    for name in t.names:
        target = t.degree(name) + 1
        img = t.zero()
        for tup in admissible_tuples(man, target):
            mono = t.one()
            for s in tup:
                mono = mono * t.gen(s.name)
            poly = t.scalar(Fraction(rng.randint(-2, 2)))
            if man.base_vars and rng.random() < 0.5:
                poly = poly * t.gen(rng.choice(man.base_vars))
            img = img + poly * mono
        images[name] = img
    return Derivation(t, 1, images)


def test_criterion_3_dictionary_round_trip():
    for man, br in (so3_brackets(), tm1_brackets()):
        q = q_from_brackets(man, br)
        assert q_from_brackets(man, brackets_from_q(man, q)) == q
    man = SplitNManifold(["x"], [("q", 1, ["tau"]), ("p", 2, ["b"])])
    assert q_from_brackets(man, brackets_from_q(man, Derivation.zero(man.table, 1))) \
        == Derivation.zero(man.table, 1)
    rng = random.Random(20260303)
    for trial in range(50):
        man = random_2manifold(rng)
        q = random_degree1_field(rng, man)
        br = brackets_from_q(man, q)
        assert q_from_brackets(man, br) == q, f"trial {trial}"
        back = brackets_from_q(man, q_from_brackets(man, br))
        for j in br.tables:
            assert back.tables[j] == br.tables[j]
        assert back.anchor == br.anchor
    announce(3, "bracket dictionary round trips on fixtures and 50 random fields")


# -- criterion 4 -------------------------------------------------------------


def random_bracket_table(rng, man):
    t = man.table
    br = MultiBrackets(man)
    for g in br.anchor:
        for v in man.base_vars:
            if rng.random() < 0.5:
                poly = t.scalar(rng.randint(-2, 2))
                if rng.random() < 0.5:
                    poly = poly * t.gen(rng.choice(man.base_vars))
                br.anchor[g][v] = poly
    for degsum in range(2, man.degree + 2):
        for tup in admissible_tuples(man, degsum, max_len=man.degree + 1):
            if rng.random() < 0.6:
                continue
            names = tuple(s.name for s in tup)
            bi = br.output_bundle(degsum)
            if bi is None:
                continue
            frame = man.bundles[bi].frame
            value = {}
            for g in frame:
                poly = t.scalar(rng.randint(-1, 1))
                if man.base_vars and rng.random() < 0.4:
                    poly = poly * t.gen(rng.choice(man.base_vars))
                value[g] = poly
            try:
                br.set_bracket(len(names), names, value)
            except ValueError:
                continue
    return br


def test_criterion_4_linfty_iff_q_squared():
    fixture_cases = [so3_brackets(), tm1_brackets(),
                     (so3_manifold(), MultiBrackets(so3_manifold()))]
    man0 = so3_manifold()
    fixture_cases.append((man0, MultiBrackets(man0)))
    rng = random.Random(20260404)
    cases = list(fixture_cases)
    while len(cases) < len(fixture_cases) + 50:
        man = random_2manifold(rng)
        cases.append((man, random_bracket_table(rng, man)))
    verdicts = []
    for n, (man, br) in enumerate(cases):
        a = verify_l_infinity(man, br).passed
        b = is_homological(q_from_brackets(man, br)).passed
        assert a == b, f"case {n}"
        verdicts.append(a)
    assert any(verdicts) and not all(verdicts)
    announce(4, "strong homotopy Jacobi agrees with Q^2 on fixtures and 50 tables")


# -- criterion 5 -------------------------------------------------------------


def connection_pairs(data):
    t = data.table
    zero = (LinearConnection.zero(data.base_vars, data.rq),
            LinearConnection.zero(data.base_vars, data.rb))
    if data.base_vars:
        v = data.base_vars[0]
        other = (
            LinearConnection(data.base_vars, data.rq,
                             {(v, i): [t.gen(v) if k == i else t.zero()
                                       for k in range(data.rq)]
                              for i in range(data.rq)}),
            LinearConnection(data.base_vars, data.rb,
                             {(v, m): [t.one() if k == m else t.zero()
                                       for k in range(data.rb)]
                              for m in range(data.rb)}),
        )
    else:
        # over a point, TM-connections are vacuous; use the same pair twice
        other = zero
    return zero, other


def test_criterion_5_adjoint_suite():
    fixtures = [abelian2(), so3_lie2(), tm1_lie2(True, 1)]
    for data in fixtures:
        for conns in connection_pairs(data):
            rep = adjoint_rep(data, *conns)
            assert check_rep3(data, rep).passed
            assert check_adjoint_module_iso(data, *conns).passed
        c0, c1 = connection_pairs(data)
        mu_conn, _ = canonical_isos(data, c0, c1, {})
        assert check_morphism(adjoint_rep(data, *c0), adjoint_rep(data, *c1),
                              mu_conn).passed
    # splitting-change isomorphisms, including a case with d sigma != 0
    solvable = SplitLie2Data([], ["q1", "q2", "q3"], ["b"])
    t = solvable.table
    solvable.dull.set_bracket(0, 1, [t.one(), t.zero(), t.zero()])
    for data, sigma in (
        (so3_lie2(b_rank=1), {(0, 1): [so3_lie2(b_rank=1).table.one()]}),
        (solvable, {(0, 2): [t.one()], (0, 1): [t.scalar(2)]}),
    ):
        conns = connection_pairs(data)[0]
        _, mu_sigma = canonical_isos(data, conns, conns, sigma)
        moved = change_of_splitting_transform(data, sigma)
        assert check_morphism(adjoint_rep(data, *conns),
                              adjoint_rep(moved, *conns), mu_sigma).passed
        neg = {k: [-c for c in v] for k, v in sigma.items()}
        _, mu_back = canonical_isos(moved, conns, conns, neg)
        assert compose_morphisms(mu_back, mu_sigma,
                                 twist_second=mu_back.twist).is_identity()
    announce(5, "adjoint representation, module isomorphism and canonical isos")


# -- criterion 6 -------------------------------------------------------------


def test_criterion_6_cartan_suite():
    t = GeneratorTable([("x", 0), ("th", 1)])
    w = WeilAlgebra(t)
    dx = Derivation.coordinate(t, "x")
    dth = Derivation.coordinate(t, "th")
    fields = [dx, dx.scale(t.gen("th")), dth, dth.scale(t.gen("x"))]
    pairs = 0
    for x in fields:
        for y in fields:
            rep = cartan_report(w, x, y)
            identities = {c.identity for c in rep}
            assert len(identities) == 6
            assert rep.passed
            pairs += 1
    assert pairs == 16
    announce(6, "all six Cartan identities on all 16 ordered field pairs")


# -- criterion 7 -------------------------------------------------------------


def test_criterion_7_bicomplexes():
    q = so3_q()
    assert bicomplex_check(WeilAlgebra(q.table), q).passed
    mv, qkk, pi = kk_fixture()
    assert bicomplex_check(WeilAlgebra(mv.base), qkk).passed
    assert poisson_weil_check(qkk, pi, mv).passed
    plane = MultivectorAlgebra(GeneratorTable([("q", 0), ("p", 0)]), 0)
    pi_std = darboux_bivector(plane, [("q", "p")])
    assert poisson_weil_check(Derivation.zero(plane.base, 1), pi_std, plane).passed
    announce(7, "Weil and Poisson-Weil bicomplex identities on fixtures")


# -- criterion 8 -------------------------------------------------------------


def test_criterion_8_schouten_poisson():
    plane = MultivectorAlgebra(GeneratorTable([("q", 0), ("p", 0)]), 0)
    pi2 = darboux_bivector(plane, [("q", "p")])
    assert plane.schouten(pi2, pi2).is_zero()
    assert poisson_bracket(plane.base.gen("q"), plane.base.gen("p"), pi2, plane) \
        == plane.table.one()
    r4 = MultivectorAlgebra(
        GeneratorTable([("q1", 0), ("q2", 0), ("p1", 0), ("p2", 0)]), 0)
    pi4 = darboux_bivector(r4, [("q1", "p1"), ("q2", "p2")])
    assert r4.schouten(pi4, pi4).is_zero()

    rng = random.Random(20260808)
    t3 = GeneratorTable([("x", 0), ("y", 0), ("z", 0)])
    mv3 = MultivectorAlgebra(t3, 0)
    both_fail = 0
    for trial in range(100):
        pi = mv3.table.zero()
        for a, b in (("x", "y"), ("y", "z"), ("x", "z")):
            coeff = mv3.include(random_element(rng, t3, terms=2, factors=2))
            pi = pi + coeff * mv3.conj(a) * mv3.conj(b)
        rep = check_poisson(pi, mv3)
        agree = [c for c in rep if c.identity == "poisson/jacobi-master-agreement"]
        assert agree[0].passed(), f"trial {trial}"
        master_ok = [c for c in rep if c.identity == "poisson/[pi,pi]=0"][0].passed()
        if not master_ok:
            both_fail += 1
    assert both_fail >= 10
    announce(8, f"Darboux master equation, {{q,p}} = +1, 100-bivector agreement "
                f"({both_fail} joint failures)")


# -- criterion 9 -------------------------------------------------------------


def random_mv_bivector(rng, mv):
    t = mv.table
    out = t.zero()
    names = list(mv.base.names)
    for _ in range(rng.randint(1, 4)):
        a, b = rng.choice(names), rng.choice(names)
        piece = mv.conj(a) * mv.conj(b)
        if piece.is_zero():
            continue
        coeff = t.scalar(rng.randint(-2, 2))
        if rng.random() < 0.5:
            coeff = coeff * t.gen(rng.choice(names))
        out = out + coeff * piece
    comps = mv.decompose(out)
    out = comps.get(2, t.zero())
    want_q = -mv.k
    keep = {}
    for mono, c in out.terms.items():
        q_part = sum(t.degrees[i] for i in mono) - 2
        if q_part == want_q:
            keep[mono] = c
    return Element(t, keep)


def test_criterion_9_pq_verdict_agreement():
    mv, qkk, pi = kk_fixture()
    rep = check_pq(qkk, pi, mv)
    assert rep.passed
    agree_checks = [c for c in rep if c.identity == "pq/verdicts-agree"]
    assert agree_checks[0].passed()
    # negative control: perturbed bivector, both verdicts fail together
    bad_pi = pi + mv.include(mv.base.gen("x1")) * mv.conj("th1") * mv.conj("x2")
    rep_bad = check_pq(qkk, bad_pi, mv)
    assert not rep_bad.passed
    assert [c for c in rep_bad if c.identity == "pq/verdicts-agree"][0].passed()

    rng = random.Random(20260909)
    t = GeneratorTable([("e1", 1), ("e2", 1), ("e3", 1)])
    q_pool = [so3_q(), Derivation.zero(t, 1), so3_q(perturb=True)]
    seen_fail = seen_pass = 0
    for k in (-1, -2):
        mvk = MultivectorAlgebra(t, k)
        for trial in range(15):
            q = rng.choice(q_pool)
            pi_r = random_mv_bivector(rng, mvk)
            rep = check_pq(q, pi_r, mvk)
            agree = [c for c in rep if c.identity == "pq/verdicts-agree"]
            assert agree[0].passed(), f"k={k} trial={trial}"
            if rep.passed:
                seen_pass += 1
            else:
                seen_fail += 1
    assert seen_pass > 0 and seen_fail > 0
    announce(9, "sharp-map and direct compatibility verdicts agree on 30 pairs")


# -- criterion 10 ------------------------------------------------------------


def test_criterion_10_courant():
    point = so3_quadratic()
    assert check_courant(point).passed
    tmc = tm_courant()
    assert check_courant(tmc).passed

    real = point_realization(point)
    assert real.report.passed

    # ten single-structure-constant perturbations: certification must fail
    perturbations = [
        (0, 1, 2, 1), (0, 1, 2, -2), (0, 1, 0, 1), (0, 1, 1, 1), (1, 2, 0, 1),
        (1, 2, 2, 1), (2, 0, 1, -1), (2, 0, 0, 1), (1, 2, 1, 2), (0, 1, 1, -1),
    ]
    assert len(perturbations) == 10
    for pert in perturbations:
        bad = so3_quadratic(perturb=pert)
        bad_real = point_realization(bad, require_axioms=False)
        assert not bad_real.report.passed, f"perturbation {pert}"
        assert not check_courant(bad).passed, f"perturbation {pert}"
    # master-equation-specific failure needs rank 5 (see analysis in tests
    # of the courant module): a nonzero {Theta,Theta} appears as soon as two
    # cubics share exactly one index
    bad5 = so3_quadratic(rank=5, perturb=(0, 3, 4, 1))
    real5 = point_realization(bad5, require_axioms=False)
    master = [c for c in real5.report if c.identity == "realize/master-equation"]
    assert not master[0].passed()

    for data in (point, tmc):
        nabla = LinearConnection.zero(data.base_vars, data.rank)
        lie2 = split_symplectic_lie2(data, nabla)
        assert check_axioms(lie2).passed
    announce(10, "Courant fixtures, realization certificates and perturbations")


# -- criterion 11 ------------------------------------------------------------


def so3_connection(theta=False):
    q = so3_q()
    t = q.table
    bundle = GBundle((0,), (("u1", "u2"),))
    conn = {
        (0, "e1", 0): [t.zero(), t.one()],
        (0, "e1", 1): [-t.one(), t.zero()],
        (0, "e2", 0): [t.one(), t.zero()],
        (0, "e2", 1): [t.zero(), -t.one()],
    }
    tail = EndValued(t, bundle)
    if theta:
        tail.components[(0, 0)] = [[t.parse("e1*e2"), t.zero()],
                                   [t.zero(), t.parse("e2*e3")]]
    return ConnectionUpToHomotopy(t, q, bundle, ("e1", "e2", "e3"), conn, tail)


def test_criterion_11_characteristic_cocycles():
    q = so3_q()
    d1 = so3_connection()
    d2 = so3_connection(theta=True)
    rep1, traces1 = curvature_and_gtr(d1, 2)
    rep2, traces2 = curvature_and_gtr(d2, 2)
    assert rep1.passed and rep2.passed
    assert not d1.curvature().is_zero()
    for k in (1, 2):
        assert q.apply(traces1[k - 1]).is_zero()
        assert q.apply(traces2[k - 1]).is_zero()
    for k in (1, 2):
        diff = traces1[k - 1] - traces2[k - 1]
        prim = is_exact(q.table, q, diff, poly_cap=0)
        assert prim is not None
        assert q.apply(prim) == diff
    announce(11, "Q-closed curvature traces and exact trace differences")


# -- criterion 12 ------------------------------------------------------------


def test_criterion_12_cli_determinism(tmp_path, capsys):
    from test_cli import EXAMPLES, PASS_CASES, mutate_fail, run_cli

    for cmd, fname in PASS_CASES:
        src = EXAMPLES / fname
        code1, out1 = run_cli(cmd + [str(src), "--json"], capsys)
        code2, out2 = run_cli(cmd + [str(src), "--json"], capsys)
        assert code1 == code2 == 0, f"{cmd} {fname}"
        assert out1 == out2, f"report not byte-identical for {cmd} {fname}"
        payload = json.loads(out1)
        assert payload["format"] == 1 and payload["passed"] is True

        fail_doc = mutate_fail(cmd, json.loads(src.read_text()))
        if fail_doc is not None:
            bad = tmp_path / f"acc_fail_{fname}"
            bad.write_text(json.dumps(fail_doc))
            assert run_cli(cmd + [str(bad), "--json"], capsys)[0] == 1, f"{cmd}"
        broken = tmp_path / f"acc_broken_{fname}"
        broken.write_text("{]")
        assert run_cli(cmd + [str(broken)], capsys)[0] == 2
    announce(12, "byte-identical --json reports and conforming exit codes")
