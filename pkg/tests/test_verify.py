import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvqracah import families as fam
from mvqracah import multivar as mv
from mvqracah import verify as V
from mvqracah.scalar import RootParam

from conftest import meixner_params, qracah_params, rp

EXAMPLE = qracah_params(("1/3", "1/5", "1/7"), "1/11", "1/2", 3)


def exact_family(fid, seed=0, s=2, N=3):
    return mv.FamilyMV(fid, V.random_paramset(fid, s, N, seed))


def test_enumeration_wrappers(fb):
    F = mv.FamilyMV(mv.QRACAH_MV, EXAMPLE)
    assert len(list(V.enumerate_lattice(F))) == 10
    assert len(V.enumerate_indices(F)) == 10
    M = mv.FamilyMV(mv.QMEIXNER_MV, meixner_params(fb))
    with pytest.raises(ValueError):
        V.enumerate_lattice(M)
    assert len(V.enumerate_indices(M)) == 15


@pytest.mark.parametrize("fid", mv.EXACT_FAMILIES)
def test_total_mass_is_lambda_zero(fid):
    F = exact_family(fid)
    mass = sum(mv.eval_weight_mv(F, x) for x in V.enumerate_lattice(F))
    assert mass == mv.eval_norm_mv(F, (0, 0))


def test_example_gram_is_diagonal():
    F = mv.FamilyMV(mv.QRACAH_MV, EXAMPLE)
    rep = V.gram(F)
    assert rep.exact and rep.passed and rep.max_abs_residual == 0
    assert rep.diagonal == [mv.eval_norm_mv(F, n) for n in rep.indices]
    assert all(v == 0 for v in rep.residuals.values())


def test_weight_scaling_is_linear():
    F = mv.FamilyMV(mv.QRACAH_MV, EXAMPLE)
    idx = V.enumerate_indices(F, 2)
    plain = V.gram(F, indices=idx, norm=lambda F, n: 0)
    kappa = Fraction(-7, 3)
    scaled = V.gram(F, indices=idx, norm=lambda F, n: 0, weight_scale=kappa)
    for key, v in plain.residuals.items():
        assert scaled.residuals[key] == kappa * v


def test_thread_count_does_not_change_report():
    F = exact_family(mv.QRACAH_MV, seed=3, s=3, N=3)
    one, many = V.gram(F, threads=1), V.gram(F, threads=8)
    strip = lambda r: json.dumps({k: v for k, v in r.to_dict().items()}, sort_keys=True)
    assert strip(one) == strip(many)
    assert one.lattice_size > V.CHUNK_SIZE


def test_fault_injection_names_diagonal():
    F = mv.FamilyMV(mv.QRACAH_MV, EXAMPLE)
    rep = V.gram(F, norm=lambda F, n: 2 * mv.eval_norm_mv(F, n))
    assert not rep.passed
    n, m = rep.witness
    assert n == m


@settings(max_examples=8, deadline=None)
@given(st.sampled_from(mv.EXACT_FAMILIES), st.integers(0, 10**6), st.integers(1, 3), st.integers(0, 3))
def test_random_exact_orthogonality(fid, seed, s, N):
    F = mv.FamilyMV(fid, V.random_paramset(fid, s, N, seed))
    assert V.gram(F).passed


def test_random_paramset_is_deterministic():
    assert V.random_paramset(mv.QRACAH_MV, 2, 3, 11) == V.random_paramset(mv.QRACAH_MV, 2, 3, 11)


def test_plan_is_required_exactly_for_infinite_families(fb):
    F = mv.FamilyMV(mv.QRACAH_MV, EXAMPLE)
    M = mv.FamilyMV(mv.QMEIXNER_MV, meixner_params(fb))
    with pytest.raises(ValueError):
        V.gram(M)
    plan = V.plan_truncation(M, 2, fb.convert("1e-10"))
    with pytest.raises(ValueError):
        V.gram(F, plan)
    with pytest.raises(ValueError):
        V.plan_truncation(F)


def charlier(fb, a_roots):
    return mv.FamilyMV(mv.QCHARLIER_MV, meixner_params(fb, a_roots=a_roots))


def test_plan_examples(fb):
    F = charlier(fb, ("19/10", "21/10"))  # q = 1/2, a close to 4
    tight = V.plan_truncation(F, 2, fb.convert("1e-30"))
    loose = V.plan_truncation(F, 2, fb.convert("1e-10"))
    assert tight.cutoff <= 120 and tight.bound < fb.convert("1e-30")
    assert loose.cutoff <= tight.cutoff
    wider = V.plan_truncation(charlier(fb, ("19/10", "5/2")), 2, fb.convert("1e-30"))
    assert wider.cutoff < tight.cutoff


def test_plan_rejects_growing_tail(fb):
    with pytest.raises(V.TruncationError):
        V.plan_truncation(charlier(fb, ("19/10", "21/10")), 3)
    with pytest.raises(V.TruncationError):
        V.plan_truncation(charlier(fb, ("1/2", "1/3")), 0)


def test_truncated_gram_meets_bound(fb):
    F = mv.FamilyMV(mv.QMEIXNER_MV, meixner_params(fb))
    plan = V.plan_truncation(F, 2, fb.convert("1e-25"))
    rep = V.gram(F, plan)
    assert rep.passed and rep.max_abs_residual < plan.bound + plan.tol
    json.dumps(rep.to_dict())


def test_sears_identity():
    f = fam.Family1V(fam.QRACAH, {"a": rp("1/3"), "b": rp("2/7"), "c": rp("3/5")}, 4, rp("1/2"))
    res = V.check_identity("sears_symmetry", f)
    assert res.passed and res.checked == 25


def test_weight_permutation_constant():
    assert V.check_identity("weight_permutation", EXAMPLE).passed
    printed = V.check_identity("weight_permutation", EXAMPLE, constant="printed")
    assert not printed.passed and printed.witness["x"] == (0, 0)


def test_second_family_and_partial_sums():
    assert V.check_identity("second_family", EXAMPLE).passed
    assert V.check_identity("partial_sum", EXAMPLE, j=1).passed
    with pytest.raises(ValueError):
        V.check_identity("partial_sum", EXAMPLE, j=2)


def test_qhahn_label_swap_reports_witness():
    P = mv.ParamSetMV(s=2, a=(rp("1/3"), rp("2/5"), rp("3/7")), q=rp("1/2"), N=3)
    res = V.check_identity("qhahn_label_invariance", P)
    assert not res.passed
    assert res.witness["y_first"] == (0, 0) and res.witness["y"] == (1, 0)


def test_dstar_weight_factor():
    P = mv.ParamSetMV(s=2, a=(rp("1/3"), rp("2/5"), rp("3/7")), q=rp("1/2"), N=3)
    assert V.check_identity("dstar_weight_relation", P).passed
    assert not V.check_identity("dstar_weight_relation", P, factor="printed").passed


def test_unknown_checks():
    with pytest.raises(ValueError):
        V.check_identity("nope", EXAMPLE)
    with pytest.raises(ValueError):
        V.check_limit("nope", EXAMPLE)


def float_qracah(fb):
    return qracah_params(("1/3", "2/5", "3/7"), "2/9", "1/2", 3, backend=fb)


@pytest.mark.parametrize("which", ["b_to_0_R_to_D", "b_to_inf_R_to_Dstar", "a1_path_to_H"])
def test_first_order_limits(fb, which):
    table = V.check_limit(which, float_qracah(fb))
    assert table.passed(), table.to_dict()


def test_printed_large_b_multiplier_does_not_converge(fb):
    table = V.check_limit("b_to_inf_R_to_Dstar", float_qracah(fb), multiplier="printed")
    assert not table.passed()


def test_limits_need_float():
    with pytest.raises(TypeError):
        V.check_limit("b_to_0_R_to_D", EXAMPLE)


def test_beta_zero_is_charlier_exactly(fb):
    P = meixner_params(fb)
    M = mv.FamilyMV(mv.QMEIXNER_MV, P.__class__(**{**P.__dict__, "beta": RootParam(fb.convert(0))}))
    C = mv.FamilyMV(mv.QCHARLIER_MV, P)
    for n in mv.multi_indices(2, 3):
        for x in mv.chain_points(2, 5):
            assert mv.eval_poly_mv(M, n, x) == mv.eval_poly_mv(C, n, x)


def test_arbitration_selects_shipped_variants(fb):
    sets = [V.random_paramset(mv.QKRAWTCHOUK_MV, 2, 3, s) for s in range(2)]
    out = V.arbitrate("qkrawtchouk_weight_sign", sets)
    assert out == {"printed": [False, False], "positive": [True, True]}
    rows = {r["variant"]: r for r in V.variant_catalog()}
    assert rows["qkrawtchouk_weight_sign"]["shipped"] == "positive"
