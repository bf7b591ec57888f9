"""Shared fixtures: small algebroids and bracket tables used across tests."""

from zgraded.nq import MultiBrackets, SplitNManifold


def so3_manifold():
    """so(3)[1] over a point: three odd degree-1 frame generators."""
    return SplitNManifold([], [("g", 1, ["e1", "e2", "e3"])])


def so3_brackets(man=None, scale=1, off_diagonal=False):
    """Cyclic so(3) table: [ei, ej] = ek.

    `off_diagonal=True` adds [e1,e2] += e2, which genuinely breaks Jacobi
    (pure sign flips and rescalings of the cyclic table do not).
    """
    man = man or so3_manifold()
    t = man.table
    b = MultiBrackets(man)
    val12 = {"e3": t.scalar(scale)}
    if off_diagonal:
        val12["e2"] = t.one()
    b.set_bracket(2, ("e1", "e2"), val12)
    b.set_bracket(2, ("e2", "e3"), {"e1": t.one()})
    b.set_bracket(2, ("e3", "e1"), {"e2": t.one()})
    return man, b


def tm1_manifold():
    """T(R)[1]: one base variable, one odd frame generator."""
    return SplitNManifold(["x"], [("a", 1, ["al"])])


def tm1_brackets(man=None):
    """Tangent Lie algebroid of the line: rho(a) = d/dx, [a,a] = 0."""
    man = man or tm1_manifold()
    b = MultiBrackets(man, anchor={"al": {"x": man.table.one()}})
    return man, b


def abelian2_manifold():
    """[2]-manifold with rank-1 frames in degrees 1 and 2 over one base var."""
    return SplitNManifold(["x"], [("q", 1, ["tau"]), ("p", 2, ["b"])])
