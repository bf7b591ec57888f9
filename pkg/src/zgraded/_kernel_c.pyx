# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled term kernel; mirrors _kernel_py exactly.

Coefficients stay arbitrary-precision Fractions (opaque Python objects);
the speed-up comes from the typed merge loop and dict plumbing around the
hot monomial product.
"""

IMPL = "c"


def mono_mul(tuple a, tuple b, tuple parity):
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    if la == 0:
        return b, 1
    if lb == 0:
        return a, 1
    cdef Py_ssize_t ia = 0, ib = 0, i
    cdef int odd_rest = 0
    cdef int sign = 1
    cdef int x, y, prev = -1
    cdef bint prev_odd = False
    cdef list out = []
    for i in range(la):
        odd_rest += <int> parity[<int> a[i]]
    while ia < la and ib < lb:
        x = <int> a[ia]
        y = <int> b[ib]
        if x <= y:
            if <int> parity[x]:
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
            if <int> parity[y]:
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
        x = <int> a[ia]
        if <int> parity[x] and x == prev and prev_odd:
            return None
        prev_odd = <int> parity[x] != 0
        prev = x
        out.append(x)
        ia += 1
    while ib < lb:
        y = <int> b[ib]
        if <int> parity[y] and y == prev and prev_odd:
            return None
        prev_odd = <int> parity[y] != 0
        prev = y
        out.append(y)
        ib += 1
    return tuple(out), sign


def terms_mul(dict A, dict B, tuple parity):
    cdef dict out = {}
    cdef tuple ma, mb, m
    cdef int s
    for ma, ca in A.items():
        for mb, cb in B.items():
            hit = mono_mul(ma, mb, parity)
            if hit is None:
                continue
            m = <tuple> hit[0]
            s = <int> hit[1]
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


def terms_add(dict A, dict B):
    cdef dict out = dict(A)
    cdef tuple m
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


def terms_scale(dict A, c):
    if not c:
        return {}
    cdef dict out = {}
    cdef tuple m
    for m, v in A.items():
        out[m] = v * c
    return out
