"""The two term kernels must agree operation-for-operation."""

import random
from fractions import Fraction

import pytest

from zgraded import _kernel_py
from zgraded import kernel


def _load_c():
    try:
        from zgraded import _kernel_c
        return _kernel_c
    except ImportError:
        return None


_kernel_c = _load_c()

needs_c = pytest.mark.skipif(_kernel_c is None, reason="compiled kernel not built")


def random_mono(rng, n_gens, parity):
    out = []
    for i in sorted(rng.sample(range(n_gens), rng.randint(0, n_gens))):
        if parity[i]:
            out.append(i)
        else:
            out.extend([i] * rng.randint(1, 3))
    return tuple(out)


def random_terms(rng, n_gens, parity, n_terms=4):
    out = {}
    for _ in range(rng.randint(1, n_terms)):
        m = random_mono(rng, n_gens, parity)
        out[m] = Fraction(rng.randint(-5, 5) or 1, rng.randint(1, 4))
    return out


@needs_c
def test_mono_mul_parity():
    rng = random.Random(1)
    for _ in range(500):
        n = rng.randint(1, 6)
        parity = tuple(rng.randint(0, 1) for _ in range(n))
        a = random_mono(rng, n, parity)
        b = random_mono(rng, n, parity)
        assert _kernel_py.mono_mul(a, b, parity) == _kernel_c.mono_mul(a, b, parity)


@needs_c
def test_terms_mul_parity():
    rng = random.Random(2)
    for _ in range(200):
        n = rng.randint(1, 5)
        parity = tuple(rng.randint(0, 1) for _ in range(n))
        a = random_terms(rng, n, parity)
        b = random_terms(rng, n, parity)
        assert _kernel_py.terms_mul(a, b, parity) == _kernel_c.terms_mul(a, b, parity)


@needs_c
def test_terms_add_scale_parity():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(1, 5)
        parity = tuple(rng.randint(0, 1) for _ in range(n))
        a = random_terms(rng, n, parity)
        b = random_terms(rng, n, parity)
        assert _kernel_py.terms_add(a, b) == _kernel_c.terms_add(a, b)
        c = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        assert _kernel_py.terms_scale(a, c) == _kernel_c.terms_scale(a, c)


def test_selected_kernel_reports_impl():
    assert kernel.IMPL in ("py", "c")


def test_cancellation_drops_entries():
    parity = (1, 1)
    a = {(0,): Fraction(1)}
    b = {(1,): Fraction(1)}
    ab = _kernel_py.terms_mul(a, b, parity)
    ba = _kernel_py.terms_mul(b, a, parity)
    assert _kernel_py.terms_add(ab, ba) == {}


def test_pure_python_selftest():
    assert _kernel_py._selftest()
