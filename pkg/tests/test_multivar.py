from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvqracah import families as fam
from mvqracah import multivar as mv
from mvqracah.qseries import qpoch, qpoch_inf, qpoch_multi
from mvqracah.scalar import RootParam

from conftest import meixner_params, qracah_params, rp

# q = 1/4, a = (1/9, 1/25, 1/49), b = 1/121, N = 3 (all given by roots)
EXAMPLE = qracah_params(("1/3", "1/5", "1/7"), "1/11", "1/2", 3)


def test_worked_example_values():
    """Frozen from an independent symbolic transcription of the defining products."""
    F = mv.FamilyMV(mv.QRACAH_MV, EXAMPLE)
    assert mv.eval_poly_mv(F, (1, 1), (1, 2)) == Fraction(12485595052108341, 479756288000)
    assert mv.eval_weight_mv(F, (1, 2)) == Fraction(-222187645440039569, 5615975625000)
    assert mv.eval_norm_mv(F, (1, 0)) == Fraction(3302568454186048352713585057839, 991232000000000000)


@pytest.mark.parametrize("fid", [f for f in mv.EXACT_FAMILIES])
def test_zero_index_is_one(fid):
    P = qracah_params() if fid != mv.QKRAWTCHOUK_MV else mv.ParamSetMV(s=2, a=(rp("1/3"), rp("1/5")), q=rp("1/2"), N=3)
    F = mv.FamilyMV(fid, P)
    for x in mv.lattice_points(F):
        assert mv.eval_poly_mv(F, (0, 0), x) == 1


def test_single_variable_reduction():
    P = qracah_params(("1/3", "2/7"), "1/5", "1/2", 3)
    F = mv.FamilyMV(mv.QRACAH_MV, P)
    q, a1, a2, b = P.q, P.ak(1), P.ak(2), P.b
    f = fam.Family1V(fam.QRACAH, {"a": b, "b": a2 / q, "c": a1 * q**3}, 3, q)
    for n in range(4):
        for x in range(4):
            assert mv.eval_poly_mv(F, (n,), (x,)) == fam.eval_poly_1v(f, n, x)


def test_weight_at_origin():
    F = mv.FamilyMV(mv.QRACAH_MV, EXAMPLE)
    P, s, N = EXAMPLE, 2, 3
    qv = P.q.value
    A = lambda k: P.A(k).value
    want = qpoch_multi([qv, qv * A(s)], qv, N) / qpoch_multi([P.ak(s + 1).value, A(s + 1)], qv, N)
    # x_1 = x_2 = 0, x_3 = N: only the k = s chain factor survives
    want *= qpoch(P.ak(3).value, qv, N) * qpoch(A(3), qv, N) / (qpoch(qv, qv, N) * qpoch(qv * A(2), qv, N))
    assert mv.eval_weight_mv(F, (0, 0)) == want


def test_norm_at_zero_index():
    F = mv.FamilyMV(mv.QRACAH_MV, EXAMPLE)
    P, N = EXAMPLE, 3
    qv, a1, b = P.q.value, P.ak(1).value, P.b.value
    As, As1 = P.A(2).value, P.A(3).value
    want = qpoch_multi([qv * As, qv * b * As1 / a1], qv, N) / qpoch_multi([P.ak(3).value, a1 / b], qv, N)
    assert mv.eval_norm_mv(F, (0, 0)) == want * (a1 / (qv * b * As)) ** N


def test_charlier_origin(fb):
    P = meixner_params(fb)
    F = mv.FamilyMV(mv.QCHARLIER_MV, P)
    assert mv.eval_weight_mv(F, (0, 0)) == 1
    qv = P.q.value
    assert abs(mv.eval_norm_mv(F, (0, 0)) - qpoch_inf(qv / P.ak(2).value, qv)) < fb.convert("1e-70")


def test_outside_region_weight_is_zero():
    F = mv.FamilyMV(mv.QRACAH_MV, EXAMPLE)
    assert mv.eval_weight_mv(F, (2, 1)) == 0
    assert mv.eval_weight_mv(F, (0, 4)) == 0


def test_permutation_is_an_involution():
    for P in (EXAMPLE, qracah_params(("1/3", "2/7"), "1/5", "1/2", 2)):
        assert mv.permuted_params(mv.permuted_params(P)) == P
    P = qracah_params(("1/3", "2/7"), "1/5", "1/2", 2)
    Q = mv.permuted_params(P)
    q = P.q
    assert Q.ak(1).value == 1 / (P.ak(1).value * q.value**4)
    assert Q.ak(2) == P.b * q and Q.b.value == P.ak(2).value / q.value


def test_validate_examples():
    assert mv.validate_params_mv(mv.FamilyMV(mv.QRACAH_MV, EXAMPLE)) == []
    # a_1 / b = q^-1 (q = 1/4)
    bad = qracah_params(("1/3", "1/5", "1/7"), "1/6", "1/2", 3)
    assert any("a_1/b" in v for v in mv.validate_params_mv(mv.FamilyMV(mv.QRACAH_MV, bad)))
    # A_3 = q^(1-N) = 16 makes (A_3;q)_N vanish
    bad = qracah_params(("1/3", "2", "6"), "1/11", "1/2", 3)
    assert any("(A_{s+1};q)_3" in v for v in mv.validate_params_mv(mv.FamilyMV(mv.QRACAH_MV, bad)))


def test_family_construction_errors():
    with pytest.raises(ValueError):
        mv.FamilyMV(mv.QRACAH_MV, mv.ParamSetMV(s=2, a=(rp("1/3"), rp("1/5")), q=rp("1/2"), b=rp("1/7"), N=2))
    with pytest.raises(ValueError):
        mv.FamilyMV(mv.QRACAH_MV, EXAMPLE, {"qhahn_param": "printed"})
    with pytest.raises(ValueError):
        mv.FamilyMV(mv.QHAHN_MV, EXAMPLE, {"qhahn_param": "sideways"})
    with pytest.raises(ValueError):
        mv.eval_poly_mv(mv.FamilyMV(mv.QRACAH_MV, EXAMPLE), (2, 2), (0, 0))


def test_enumeration_order():
    assert list(mv.chain_points(2, 2)) == [(0, 0), (0, 1), (1, 1), (0, 2), (1, 2), (2, 2)]
    assert len(list(mv.chain_points(1, 4))) == 5
    assert mv.multi_indices(2, 1) == [(0, 0), (0, 1), (1, 0)]


@given(st.integers(1, 4), st.integers(0, 6))
def test_lattice_counts(s, N):
    chain = list(mv.chain_points(s, N))
    comp = list(mv.composition_points(s, N))
    idx = mv.multi_indices(s, N)
    for pts in (chain, comp, idx):
        assert len(pts) == len(set(pts)) == comb(N + s, s)
    assert all(all(p[i] <= p[i + 1] for i in range(s - 1)) and p[-1] <= N for p in chain)
    assert all(sum(p) <= N for p in comp)
    assert idx == sorted(idx)


@given(st.lists(st.integers(0, 5), min_size=1, max_size=4))
def test_multi_index_sums(n):
    m = mv.MultiIndex(n)
    s = len(n)
    assert m.partial(0) == 0 and m.partial(s) == m.total == sum(n)
    assert all(m.partial(k - 1) + m.tail(k) == m.total for k in range(1, s + 1))


def test_reflect_point():
    assert mv.reflect_point((0, 1, 3), 4) == (1, 3, 4)


def test_racah_requires_float():
    P = mv.ParamSetMV(s=1, a=(Fraction(1, 2), Fraction(3, 2)), N=2, eta=Fraction(1, 5))
    with pytest.raises(TypeError):
        mv.eval_weight_mv(mv.FamilyMV(mv.RACAH_MV, P), (0,))


def test_variant_registry_defaults():
    for key, v in mv.VARIANTS.items():
        assert v.default in v.options
        assert mv.default_variants(v.family)[key] == v.default
