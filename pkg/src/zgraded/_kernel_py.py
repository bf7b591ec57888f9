"""Pure-Python term kernel: normal-form monomial products with Koszul signs.

A monomial is a tuple of generator indices sorted non-decreasingly; an odd
index may appear at most once.  Multiplying two monomials merges the two
sorted tuples and counts, pair by pair, the transpositions of odd factors
performed by the merge; each such transposition contributes a factor -1.
A repeated odd index kills the product.

The kernel operates on plain dicts mapping monomial tuples to Fraction
coefficients so that the compiled variant (_kernel_c.pyx) can share the
exact same interface.
"""

from fractions import Fraction

IMPL = "py"


def mono_mul(a, b, parity):
    """Merge two normal-form monomials.

    Returns (monomial, sign) with sign in {1, -1}, or None when the product
    vanishes because an odd generator would be squared.  `parity` is a
    tuple holding degree mod 2 per generator index.
    """
    if not a:
        return b, 1
    if not b:
        return a, 1
    la, lb = len(a), len(b)
    # odd factors of `a` not yet emitted; each one jumped over by an odd
    # factor of `b` flips the sign
    odd_rest = 0
    for i in a:
        odd_rest += parity[i]
    out = []
    sign = 1
    ia = ib = 0
    prev = -1
    prev_odd = False
    while ia < la and ib < lb:
        x, y = a[ia], b[ib]
        if x <= y:
            if parity[x]:
                if x == prev and prev_odd:
                    return None
                odd_rest -= 1
                prev_odd = True
            else:
                prev_odd = False
            out.append(x)
            prev = x
            ia += 1
        else:
            if parity[y]:
                if y == prev and prev_odd:
                    return None
                if odd_rest & 1:
                    sign = -sign
                prev_odd = True
            else:
                prev_odd = False
            out.append(y)
            prev = y
            ib += 1
    while ia < la:
        x = a[ia]
        if parity[x] and x == prev and prev_odd:
            return None
        prev_odd = bool(parity[x])
        prev = x
        out.append(x)
        ia += 1
    while ib < lb:
        y = b[ib]
        if parity[y] and y == prev and prev_odd:
            return None
        prev_odd = bool(parity[y])
        prev = y
        out.append(y)
        ib += 1
    return tuple(out), sign


def terms_mul(A, B, parity):
    """Product of two term maps; drops cancelled coefficients."""
    out = {}
    for ma, ca in A.items():
        for mb, cb in B.items():
            hit = mono_mul(ma, mb, parity)
            if hit is None:
                continue
            m, s = hit
            c = ca * cb if s > 0 else -ca * cb
            acc = out.get(m)
            if acc is None:
                out[m] = c
            else:
                acc = acc + c
                if acc:
                    out[m] = acc
                else:
                    del out[m]
    return out


def terms_add(A, B):
    out = dict(A)
    for m, c in B.items():
        acc = out.get(m)
        if acc is None:
            out[m] = c
        else:
            acc = acc + c
            if acc:
                out[m] = acc
            else:
                del out[m]
    return out


def terms_scale(A, c):
    if not c:
        return {}
    return {m: v * c for m, v in A.items()}


def _selftest():
    par = (0, 1, 1)
    assert mono_mul((1,), (1,), par) is None
    assert mono_mul((1,), (2,), par) == ((1, 2), 1)
    assert mono_mul((2,), (1,), par) == ((1, 2), -1)
    one = Fraction(1)
    assert terms_mul({(1,): one}, {(2,): one}, par) == {(1, 2): one}
    return True
