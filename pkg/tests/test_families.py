from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvqracah import families as fam
from mvqracah.qseries import qpoch, qpoch_inf, qpoch_multi
from mvqracah.scalar import RootParam, half_pow

from conftest import rp

roots = st.fractions(min_value=Fraction(1, 20), max_value=Fraction(19, 20), max_denominator=23)


def qracah(a="1/3", b="1/2", c="1/5", N=2, q="1/2"):
    return fam.Family1V(fam.QRACAH, {"a": rp(a), "b": rp(b), "c": rp(c)}, N, rp(q))


def gram_1v(f, xs):
    """Direct Gram matrix: sum_x p_n p_m w over the given points."""
    ns = range(f.N + 1) if f.bounded else range(4)
    return {
        (n, m): sum(fam.eval_poly_1v(f, n, x) * fam.eval_poly_1v(f, m, x) * fam.eval_weight_1v(f, x) for x in xs)
        for n in ns
        for m in ns
        if n <= m
    }


def assert_orthogonal(f, G, tol=None):
    for (n, m), v in G.items():
        want = fam.eval_norm_1v(f, n) if n == m else 0
        if tol is None:
            assert v == want, (n, m)
        else:
            assert abs(v - want) <= tol * max(1, abs(want)), (n, m)


def test_qracah_examples():
    f = qracah()
    assert all(fam.eval_poly_1v(f, 0, x) == 1 for x in range(3))
    q, a, b, c = Fraction(1, 4), Fraction(1, 9), Fraction(1, 4), Fraction(1, 25)
    for n in range(3):
        want = qpoch_multi([a * q, b * c * q, q**-2], q, n) * half_pow(rp("1/2") ** 2 / rp("1/5"), n)
        assert fam.eval_poly_1v(f, n, 0) == want
    assert fam.eval_poly_1v(f, 1, 1) == Fraction(-1925, 128)
    assert fam.eval_weight_1v(f, 0) == 1
    lam0 = qpoch_multi([1 / c, a * b * q * q], q, 2) / qpoch_multi([a * q / c, b * q], q, 2)
    assert fam.eval_norm_1v(f, 0) == lam0
    assert fam.eval_norm_1v(f, 1) == Fraction(-704717125, 417792)
    assert sum(fam.eval_weight_1v(f, x) for x in range(3)) == lam0


BOUNDED = {
    fam.QRACAH: ("a", "b", "c"),
    fam.DUAL_QHAHN: ("b", "c"),
    fam.DUAL_QHAHN_STAR: ("b", "c"),
    fam.QHAHN: ("a", "b"),
    fam.QKRAWTCHOUK: ("b",),
}


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(sorted(BOUNDED)), st.lists(roots, min_size=4, max_size=4), st.integers(1, 4))
def test_bounded_families_are_orthogonal(fid, vals, N):
    q = RootParam(vals[0])
    params = {name: RootParam(v) for name, v in zip(BOUNDED[fid], vals[1:])}
    f = fam.Family1V(fid, params, N, q)
    if fam.validate_params(f):
        return
    assert_orthogonal(f, gram_1v(f, range(N + 1)))


@settings(max_examples=25, deadline=None)
@given(roots, roots, roots, roots, st.integers(0, 5))
def test_sears_symmetry(q, a, b, c, N):
    f = fam.Family1V(fam.QRACAH, {"a": RootParam(a), "b": RootParam(b), "c": RootParam(c)}, N, RootParam(q))
    g = fam.Family1V(fam.QRACAH, {"a": RootParam(b), "b": RootParam(a), "c": RootParam(1 / c)}, N, RootParam(q))
    for n in range(N + 1):
        for x in range(N + 1):
            assert fam.eval_poly_1v(f, n, x) == fam.eval_poly_1v(g, n, N - x)


def test_classical_racah_orthogonal(fb):
    c = fb.convert
    f = fam.Family1V(fam.RACAH, {"alpha": c("0.7"), "beta": c("1.3"), "gamma": c(Fraction(-17, 3))}, 4)
    assert_orthogonal(f, gram_1v(f, range(5)), tol=c("1e-60"))


def test_meixner_and_charlier_orthogonal(fb):
    c = fb.convert
    q = RootParam(fb.ctx.sqrt(c("0.5")))
    m = fam.Family1V(fam.QMEIXNER, {"a": RootParam(c("0.6")), "c": RootParam(c("0.7"))}, q=q)
    ch = fam.Family1V(fam.QCHARLIER, {"a": RootParam(c("0.8"))}, q=q)
    assert fam.eval_weight_1v(m, 0) == 1
    lam0 = qpoch_inf(-c("0.49"), q.value) / qpoch_inf(-c("0.36") * c("0.49") * q.value, q.value)
    assert abs(fam.eval_norm_1v(m, 0) - lam0) < c("1e-70")
    for f in (m, ch):
        assert_orthogonal(f, gram_1v(f, range(160)), tol=c("1e-40"))


def test_unbounded_norms_need_float():
    m = fam.Family1V(fam.QMEIXNER, {"a": rp("1/2"), "c": rp("1/3")}, q=rp("1/2"))
    with pytest.raises(TypeError):
        fam.eval_norm_1v(m, 1)


@given(roots, roots, roots, st.integers(0, 4))
def test_dual_qhahn_is_qracah_at_a_zero(q, b, c, N):
    d = fam.Family1V(fam.DUAL_QHAHN, {"b": RootParam(b), "c": RootParam(c)}, N, RootParam(q))
    r = fam.Family1V(fam.QRACAH, {"a": RootParam(Fraction(0)), "b": RootParam(b), "c": RootParam(c)}, N, RootParam(q))
    for n in range(N + 1):
        for x in range(N + 1):
            assert fam.eval_poly_1v(d, n, x) == fam.eval_poly_1v(r, n, x)


def test_starred_dual_is_large_a_limit(fb):
    c = fb.convert
    q, b, cc, N = RootParam(c("0.5")), RootParam(c("0.6")), RootParam(c("0.45")), 3
    ds = fam.Family1V(fam.DUAL_QHAHN_STAR, {"b": b, "c": cc}, N, q)
    devs = []
    for a in (c("1e6"), c("1e8")):
        r = fam.Family1V(fam.QRACAH, {"a": RootParam(fb.ctx.sqrt(a)), "b": b, "c": cc}, N, q)
        devs.append(
            max(abs(fam.eval_poly_1v(r, n, x) / (a * q.value) ** n - fam.eval_poly_1v(ds, n, x)) for n in range(N + 1) for x in range(N + 1))
        )
    assert 50 <= devs[0] / devs[1] <= 200


def test_validate_params_examples():
    q = rp("1/2")  # q = 1/4
    bad_hahn = fam.Family1V(fam.QHAHN, {"a": RootParam(Fraction(4)), "b": rp("1/3")}, 3, q)  # a = q^-2
    assert any("a q: factor k=1" in v for v in fam.validate_params(bad_hahn))
    bad_racah = fam.Family1V(fam.QRACAH, {"a": rp("1/3"), "b": RootParam(Fraction(2)), "c": rp("1/5")}, 3, q)
    assert any("(b q;q)_3" in v for v in fam.validate_params(bad_racah))
    assert fam.validate_params(qracah()) == []


def test_degree_out_of_range():
    with pytest.raises(ValueError):
        fam.eval_poly_1v(qracah(), 3, 0)
