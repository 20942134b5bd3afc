from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvqracah.qseries import (
    PhiSpec,
    ZeroDenominatorError,
    hyp_scaled,
    phi_naive,
    phi_scaled,
    phi_terminating,
    poch,
    qpoch,
    qpoch_inf,
    qpoch_multi,
)
from mvqracah.scalar import EXACT

unit = st.fractions(min_value=Fraction(1, 30), max_value=Fraction(29, 30), max_denominator=40)


def test_qpoch_examples():
    q = Fraction(1, 3)
    assert qpoch(Fraction(7, 5), q, 0) == 1
    assert qpoch(Fraction(1, 2), Fraction(1, 2), 2) == Fraction(3, 8)
    assert qpoch(1 / q, q, 3) == 0
    assert qpoch_multi([], q, 5) == 1
    assert qpoch_multi([Fraction(1, 2), Fraction(1, 3)], Fraction(1, 2), 1) == Fraction(1, 3)


@given(unit, unit, st.integers(0, 8), st.integers(0, 8))
def test_qpoch_splits(a, q, m, n):
    assert qpoch(a, q, m + n) == qpoch(a, q, m) * qpoch(a * q**m, q, n)


def test_qpoch_inf(fb):
    half = fb.convert(Fraction(1, 2))
    assert qpoch_inf(0, half) == 1
    ref = fb.convert("0.28878809508660242127889972192923078008891190484068578411474106618490224090684701")
    assert abs(qpoch_inf(half, half) - ref) < fb.convert("1e-70")
    a = fb.convert(Fraction(2, 7))
    assert abs(qpoch_inf(a, half) - (1 - a) * qpoch_inf(a * half, half)) < fb.convert("1e-70")


def test_qpoch_inf_rejects_exact():
    with pytest.raises(TypeError):
        qpoch_inf(Fraction(1, 2), Fraction(1, 2))


def test_phi_examples():
    q = Fraction(1, 2)
    assert phi_terminating(PhiSpec([1, Fraction(1, 3), Fraction(1, 5)], [Fraction(1, 7), Fraction(1, 9)], q, q, 0), validate=False) == 1
    spec = PhiSpec([q**-1, Fraction(1), q**-3], [q**-3], q, q, 1)
    assert phi_terminating(spec) == 1
    b, c, N = Fraction(1, 3), Fraction(1, 5), 3
    spec = PhiSpec([q**-2, q**-1, c * q ** (1 - N)], [b * c * q, q**-N], q, q, 2)
    assert phi_terminating(spec) == Fraction(185, 203)


def test_phi_validation():
    q = Fraction(1, 2)
    with pytest.raises(ValueError):
        PhiSpec([Fraction(1, 3)], [], q, q, 2).validate()
    with pytest.raises(ZeroDenominatorError):
        PhiSpec([q**-3, Fraction(1, 3)], [q**-1], q, q, 3).validate()


@settings(max_examples=60)
@given(st.integers(0, 6), unit, unit, unit)
def test_q_chu_vandermonde(n, b, c, q):
    """2phi1(q^-n, b; c; q, q) = (c/b;q)_n / (c;q)_n b^n."""
    if qpoch(c, q, n) == 0 or b == 0:
        return
    lhs = phi_terminating(PhiSpec([q**-n, b], [c], q, q, n))
    assert lhs == qpoch(c / b, q, n) / qpoch(c, q, n) * b**n


@settings(max_examples=60)
@given(st.integers(0, 5), unit, unit, unit, unit)
def test_q_saalschutz(n, a, b, c, q):
    """3phi2(a, b, q^-n; c, abq^{1-n}/c; q, q) = (c/a, c/b;q)_n / (c, c/(ab);q)_n."""
    d = a * b * q ** (1 - n) / c
    if qpoch(c, q, n) * qpoch(d, q, n) * qpoch(c / (a * b), q, n) == 0:
        return
    lhs = phi_terminating(PhiSpec([a, b, q**-n], [c, d], q, q, n))
    assert lhs == qpoch_multi([c / a, c / b], q, n) / qpoch_multi([c, c / (a * b)], q, n)


@given(st.integers(0, 6), st.lists(unit, min_size=3, max_size=3), st.lists(unit, min_size=2, max_size=2), unit, unit)
def test_scaled_form_agrees_with_naive(n, ups, lows, z, q):
    if qpoch_multi(lows, q, n) == 0:
        return
    upper = [q**-n] + ups[:2]
    spec = PhiSpec(upper, lows, q, z, n)
    assert phi_scaled(upper, lows, q, z, n) == qpoch_multi(lows, q, n) * phi_naive(spec)
    assert phi_terminating(spec) == phi_naive(spec)


def test_scaled_form_survives_vanishing_lower():
    q = Fraction(1, 3)
    # lower q^-1 makes (q^-1;q)_2 = 0; the scaled sum is still defined
    assert phi_scaled([q**-2, Fraction(1, 5)], [q**-1], q, q, 2) == phi_scaled([q**-2, Fraction(1, 5)], [q**-1], q, q, 2)
    with pytest.raises(ZeroDenominatorError):
        phi_naive(PhiSpec([q**-2, Fraction(1, 5)], [q**-1], q, q, 2))


def test_float_and_exact_series_agree(fb):
    q, n = Fraction(2, 5), 4
    upper, lower = [q**-n, Fraction(1, 7), Fraction(3, 11)], [Fraction(2, 9), Fraction(5, 13)]
    exact = phi_scaled(upper, lower, q, q, n)
    approx = phi_scaled([fb.convert(u) for u in upper], [fb.convert(v) for v in lower], fb.convert(q), fb.convert(q), n)
    assert abs(approx - fb.convert(exact)) < fb.convert("1e-60") * abs(fb.convert(exact))


@given(st.integers(0, 5), st.fractions(min_value=-3, max_value=3, max_denominator=7))
def test_hyp_scaled_chu_vandermonde(n, b):
    """2F1(-n, b; c; 1) = (c-b)_n / (c)_n with c = b + 3/2."""
    c = b + Fraction(3, 2)
    if poch(c, n) == 0:
        return
    assert hyp_scaled([Fraction(-n), b], [c], n) == poch(c - b, n)
