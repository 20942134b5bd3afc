"""Gram-matrix engine, identity checks and limit checks.

The engine sums ``P_n(x) P_m(x) rho(x)`` over the orthogonality lattice for
every pair of indices and compares with ``diag(lambda)``.  Polynomial
values are computed once per lattice point and index; only the upper
triangle is accumulated.

The lattice is cut into fixed chunks of :data:`CHUNK_SIZE` points.  Chunks
may be processed by several threads, but partial sums are always merged in
chunk order, so a report does not depend on the thread count (exact
reports are byte-identical, float reports bit-identical).
"""

from __future__ import annotations

import math
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import families as fam
from . import multivar as mv
from .multivar import (
    COMPOSITION_FAMILIES,
    EXACT_FAMILIES,
    INFINITE_FAMILIES,
    VARIANTS,
    FamilyMV,
    MultiIndex,
    ParamSetMV,
    chain_points,
    composition_points,
    eval_norm_mv,
    eval_poly_mv,
    eval_weight_mv,
    multi_indices,
    permuted_params,
    reflect_point,
)
from .qseries import qpoch, qpoch_multi
from .scalar import EXACT, Backend, FloatBackend, RootParam, backend_of, half_pow, int_pow

CHUNK_SIZE = 16
DEFAULT_DEGREE_CAP = 4


class TruncationError(ValueError):
    """The tail of an infinite lattice sum is not contracting."""


# --------------------------------------------------------------------------
# lattices and indices
# --------------------------------------------------------------------------


def enumerate_lattice(F: FamilyMV, cap: Optional[int] = None):
    """Lattice points of ``F`` (each exactly once).

    Chain lattices run 0 <= x_1 <= ... <= x_s with x_s slowest, so for
    s = 2, N = 2 the order is (0,0), (0,1), (1,1), (0,2), (1,2), (2,2).
    ``cap`` bounds x_s for the infinite families and is required there.
    """
    if F.bounded:
        top = F.params.N
    else:
        if cap is None:
            raise ValueError(f"{F.id} has infinite support; a cap on x_s is required")
        top = cap
    if F.id in COMPOSITION_FAMILIES:
        return composition_points(F.s, top)
    return chain_points(F.s, top)


def enumerate_indices(F: FamilyMV, bound: Optional[int] = None) -> List[MultiIndex]:
    """All n with N_s <= bound in lexicographic order.

    ``bound`` defaults to N for bounded families and to
    :data:`DEFAULT_DEGREE_CAP` for the infinite ones.
    """
    if bound is None:
        bound = F.params.N if F.bounded else DEFAULT_DEGREE_CAP
    return multi_indices(F.s, bound)


def _shell(F: FamilyMV, X: int):
    """Chain points with x_s == X."""
    s = F.s
    if s == 1:
        return [(X,)]
    return [p + (X,) for p in chain_points(s - 1, X)]


# --------------------------------------------------------------------------
# serialization helpers
# --------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int):
        return str(value)
    return backend_of(value).format(value)


def _root_str(p: Optional[RootParam]):
    if p is None:
        return None
    return _fmt(p.root) if p.has_root else _fmt(p.value)


def serialize_params(P: ParamSetMV) -> Dict[str, object]:
    """Parameter set as strings (roots for the q-families)."""
    out: Dict[str, object] = {"s": P.s}
    if P.N is not None:
        out["N"] = P.N
    if P.q is None:
        out["a"] = [_fmt(v) for v in P.a]
        out["eta"] = _fmt(P.eta)
        return out
    out["q_root"] = _root_str(P.q)
    out["a_roots"] = [_root_str(v) for v in P.a]
    if P.b is not None:
        out["b_root"] = _root_str(P.b)
    if P.beta is not None:
        out["beta_root"] = _root_str(P.beta)
    return out


# --------------------------------------------------------------------------
# truncation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncationPlan:
    """Cutoff for x_s plus an empirical geometric tail bound.

    ``bound = shells[-1] * ratio / (1 - ratio)`` where ``ratio`` is the
    largest shell-to-shell ratio over the last five shells.
    """

    cutoff: int
    ratio: object
    bound: object
    tol: object
    degree_cap: int
    shells: Tuple = field(default=(), repr=False)


def _shell_mass(F: FamilyMV, X: int, indices):
    total = 0
    for x in _shell(F, X):
        w = eval_weight_mv(F, x)
        if w == 0:
            continue
        peak = max(abs(eval_poly_mv(F, n, x)) for n in indices)
        total = total + peak * peak * abs(w)
    return total


def plan_truncation(
    F: FamilyMV,
    degree_cap: int = DEFAULT_DEGREE_CAP,
    tol=Fraction(1, 10**20),
    window: int = 5,
    max_cutoff: int = 400,
) -> TruncationPlan:
    """Choose x_s cutoff for an infinite-support Gram sum.

    Shell sums ``M(X) = sum_{x_s = X} max_n |P_n(x)|^2 |rho(x)|`` dominate
    every Gram entry's contribution from the shell.  The cutoff is the
    first X at which the last ``window`` ratios M(X)/M(X-1) stay below one
    and the geometric tail estimate drops below ``tol``.
    """
    if F.id not in INFINITE_FAMILIES:
        raise ValueError(f"{F.id} has finite support; no truncation plan is needed")
    P = F.params
    backend = backend_of(P.q.value)
    if not isinstance(backend, FloatBackend):
        raise TypeError("truncation plans need the float backend")
    tol = backend.convert(tol)
    s = P.s
    prev = P.ak(s - 1).value if s >= 2 else 1
    decay = abs(P.q.value / (prev * P.ak(s).value))
    if decay >= 1:
        raise TruncationError(
            f"|q/(a_(s-1) a_s)| = {backend.format(decay)} >= 1: the weight does not decay in x_s; "
            "increase a_(s-1) a_s"
        )
    growth = abs(int_pow(P.q.value, 1 - 2 * degree_cap) / (prev * P.ak(s).value))
    if growth >= 1:
        raise TruncationError(
            f"|q^(1-2 cap) / (a_(s-1) a_s)| = {backend.format(growth)} >= 1: polynomials of degree "
            f"{degree_cap} outgrow the weight; increase a_(s-1) a_s or lower the degree cap"
        )
    indices = multi_indices(s, degree_cap)
    shells = []
    for X in range(max_cutoff + 1):
        shells.append(_shell_mass(F, X, indices))
        if len(shells) <= window:
            continue
        ratios = []
        for i in range(len(shells) - window, len(shells)):
            if shells[i - 1] == 0:
                ratios = None
                break
            ratios.append(shells[i] / shells[i - 1])
        if not ratios:
            continue
        r = max(ratios)
        if r >= 1:
            continue
        bound = shells[-1] * r / (1 - r)
        if bound < tol:
            return TruncationPlan(X, r, bound, tol, degree_cap, tuple(shells))
    raise TruncationError(
        f"tail of {F.id} not contracting below tol within x_s <= {max_cutoff}; "
        "increase a_(s-1) a_s or lower the degree cap"
    )


# --------------------------------------------------------------------------
# Gram engine
# --------------------------------------------------------------------------


@dataclass
class GramReport:
    family: str
    params: Dict[str, object]
    variants: Dict[str, str]
    indices: List[Tuple[int, ...]]
    residuals: Dict[Tuple[int, int], object]
    diagonal: List[object]
    norms: List[object]
    max_abs_residual: object
    max_rel_residual: object
    witness: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]
    exact: bool
    truncation_bound: object = None
    tol: object = None
    lattice_size: int = 0
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        if self.exact:
            return self.max_abs_residual == 0
        limit = (self.tol or 0) + (self.truncation_bound or 0)
        return self.max_abs_residual <= limit

    def residual(self, i: int, j: int):
        return self.residuals[(min(i, j), max(i, j))]

    def residual_matrix(self):
        K = len(self.indices)
        return [[self.residual(i, j) for j in range(K)] for i in range(K)]

    def to_dict(self) -> Dict[str, object]:
        K = len(self.indices)
        return {
            "family": self.family,
            "params": self.params,
            "variants": self.variants,
            "indices": [list(n) for n in self.indices],
            "exact": self.exact,
            "max_abs_residual": _fmt(self.max_abs_residual),
            "max_rel_residual": _fmt(self.max_rel_residual),
            "witness": None if self.witness is None else [list(self.witness[0]), list(self.witness[1])],
            "truncation_bound": None if self.truncation_bound is None else _fmt(self.truncation_bound),
            "tol": None if self.tol is None else _fmt(self.tol),
            "lattice_size": self.lattice_size,
            "norms": [_fmt(v) for v in self.norms],
            "residual_matrix": [[_fmt(self.residual(i, j)) for j in range(K)] for i in range(K)],
            "passed": self.passed,
        }


def _chunk_sum(F: FamilyMV, points, indices, scale):
    K = len(indices)
    acc = [0] * (K * (K + 1) // 2)
    for x in points:
        w = eval_weight_mv(F, x)
        if w == 0:
            continue
        if scale is not None:
            w = w * scale
        v = [eval_poly_mv(F, n, x) for n in indices]
        t = 0
        for i in range(K):
            wi = w * v[i]
            for j in range(i, K):
                acc[t] = acc[t] + wi * v[j]
                t += 1
    return acc


def gram(
    F: FamilyMV,
    plan: Optional[TruncationPlan] = None,
    threads: int = 1,
    indices: Optional[Sequence] = None,
    tol=None,
    norm: Optional[Callable] = None,
    weight_scale=None,
) -> GramReport:
    """Full Gram matrix of ``F`` against its stated norms.

    ``plan`` is required exactly for the infinite families.  ``norm``
    replaces :func:`eval_norm_mv` (fault injection in tests);
    ``weight_scale`` multiplies every weight by a constant.
    """
    start = time.perf_counter()
    if F.bounded and plan is not None:
        raise ValueError(f"{F.id} has finite support; a truncation plan is not used")
    if not F.bounded and plan is None:
        raise ValueError(f"{F.id} has infinite support; a truncation plan is required")
    if indices is None:
        indices = enumerate_indices(F, None if F.bounded else plan.degree_cap)
    indices = [MultiIndex(n) for n in indices]
    points = list(enumerate_lattice(F, None if F.bounded else plan.cutoff))
    chunks = [points[i : i + CHUNK_SIZE] for i in range(0, len(points), CHUNK_SIZE)]
    work = lambda chunk: _chunk_sum(F, chunk, indices, weight_scale)
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(work, chunks))
    else:
        partials = [work(c) for c in chunks]
    K = len(indices)
    total = partials[0] if partials else [0] * (K * (K + 1) // 2)
    for part in partials[1:]:
        total = [a + b for a, b in zip(total, part)]
    norm_fn = norm or eval_norm_mv
    norms = [norm_fn(F, n) for n in indices]
    residuals = {}
    diagonal = []
    t = 0
    max_abs, max_rel, witness = 0, 0, None
    for i in range(K):
        for j in range(i, K):
            g = total[t]
            t += 1
            r = g - norms[i] if i == j else g
            if i == j:
                diagonal.append(g)
            residuals[(i, j)] = r
            a = abs(r)
            scale = abs(norms[i] * norms[j])
            rel = a / _sqrt(scale) if scale != 0 else a
            if a > max_abs:
                max_abs = a
                witness = (tuple(indices[i]), tuple(indices[j]))
            if rel > max_rel:
                max_rel = rel
    exact = all(isinstance(v, (Fraction, int)) for v in total) and all(isinstance(v, (Fraction, int)) for v in norms)
    if tol is None and not exact:
        tol = plan.tol if plan is not None else 0
    return GramReport(
        family=F.id,
        params=serialize_params(F.params),
        variants=dict(F.variants),
        indices=[tuple(n) for n in indices],
        residuals=residuals,
        diagonal=diagonal,
        norms=norms,
        max_abs_residual=max_abs,
        max_rel_residual=max_rel,
        witness=witness,
        exact=exact,
        truncation_bound=None if plan is None else plan.bound,
        tol=None if exact else tol,
        lattice_size=len(points),
        wall_time=time.perf_counter() - start,
    )


def _sqrt(v):
    if isinstance(v, (Fraction, int)):
        return math.sqrt(v) if v < 10**300 else math.sqrt(float(v))
    return backend_of(v).ctx.sqrt(v)


# --------------------------------------------------------------------------
# random parameter sets
# --------------------------------------------------------------------------

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31)


def random_paramset(family_id: str, s: int, N: int, seed: int, backend: Backend = EXACT, tries: int = 50) -> ParamSetMV:
    """A random parameter set for ``family_id`` that passes validation.

    q-Racah type families get small rational roots in (0, 1).  q-Meixner and
    q-Charlier get large a_k, and draws are kept only when degree-3
    polynomials decay fast on the tail (|q^-5 / (a_(s-1) a_s)| <= 1/4).  The
    classical family gets rationals in (1/2, 5/2).
    """
    rng = random.Random(seed)
    for _ in range(tries):
        P = _draw(family_id, s, N, rng, backend)
        F = FamilyMV(family_id, P)
        if family_id in INFINITE_FAMILIES:
            prev = P.ak(s - 1).value if s >= 2 else 1
            if abs(int_pow(P.q.value, -5) / (prev * P.ak(s).value)) > 0.25:
                continue
            violations = mv.validate_params_mv(F, degree_bound=3, top=8)
        else:
            violations = mv.validate_params_mv(F)
        if not violations:
            return P
    raise RuntimeError(f"no valid parameter set found for {family_id} after {tries} draws")


def _rand_frac(rng, lo_num, hi_num, primes=_SMALL_PRIMES):
    den = rng.choice(primes)
    num = rng.randint(lo_num, hi_num * den)
    return Fraction(num, den)


def _draw(family_id, s, N, rng, backend):
    conv = backend.convert
    if family_id == mv.RACAH_MV:
        a = tuple(conv(Fraction(rng.randint(11, 49), rng.choice((7, 11, 13, 17, 19)))) for _ in range(s + 1))
        eta = conv(Fraction(rng.randint(1, 9), rng.choice((13, 17, 19, 23))))
        return ParamSetMV(s=s, a=a, N=N, eta=eta)
    if family_id in INFINITE_FAMILIES:
        q = RootParam(conv(Fraction(rng.randint(7, 9), rng.choice((10, 11, 13)))))
        a = tuple(RootParam(conv(Fraction(rng.randint(31, 60), rng.choice((5, 7))))) for _ in range(s))
        beta = RootParam(conv(Fraction(1, rng.choice((3, 5, 7))))) if family_id == mv.QMEIXNER_MV else None
        return ParamSetMV(s=s, a=a, q=q, beta=beta)

    def root():
        while True:
            f = Fraction(rng.randint(1, 12), rng.choice(_SMALL_PRIMES))
            if 0 < f < 1:
                return conv(f)

    q = RootParam(root())
    count = s if family_id == mv.QKRAWTCHOUK_MV else s + 1
    a = tuple(RootParam(root()) for _ in range(count))
    b = RootParam(root()) if family_id in (mv.QRACAH_MV, mv.QRACAH_MV2) else None
    return ParamSetMV(s=s, a=a, q=q, b=b, N=N)


# --------------------------------------------------------------------------
# identity checks
# --------------------------------------------------------------------------

IDENTITIES = {
    "sears_symmetry": "r_n(x; a, b, c, N) = r_n(N - x; b, a, 1/c, N)",
    "weight_permutation": "rho(reflected x; permuted params) = kappa rho(x)",
    "second_family": "R2_n(x) = R_(reversed n)(reflected x; permuted params)",
    "partial_sum": "sum over x_1..x_j of R_n R_m rho in closed form",
    "qhahn_label_invariance": "q-Hahn weight under a swap of two labels",
    "dstar_weight_relation": "rho_D*(x) = a_1^x_1 q^(x_1^2) rho_D(x)",
}


@dataclass
class IdentityResult:
    name: str
    equation: str
    passed: bool
    checked: int
    witness: Optional[object] = None
    detail: str = ""
    max_residual: object = 0
    wall_time: float = 0.0

    def to_dict(self):
        return {
            "name": self.name,
            "formula": self.equation,
            "status": "pass" if self.passed else "fail",
            "max_residual": _fmt(self.max_residual) if self.max_residual is not None else None,
            "witness": None if self.witness is None else str(self.witness),
            "checked": self.checked,
            "detail": self.detail,
            "wall_time": round(self.wall_time, 6),
        }


def check_identity(which: str, P, **options) -> IdentityResult:
    """Run one identity over its full range; returns the first counterexample on failure.

    ``P`` is a :class:`~mvqracah.families.Family1V` (q-Racah) for
    ``sears_symmetry`` and a :class:`~mvqracah.multivar.ParamSetMV` otherwise.

    Options: ``constant`` ("derived" or "printed") for the weight
    permutation; ``j`` for the partial sum; ``labels`` (a pair of 1-based
    labels, default (1, 2)) for the q-Hahn label check; ``factor``
    ("derived" or "printed") for the D*/D weight relation.
    """
    if which not in IDENTITIES:
        raise ValueError(f"unknown identity {which!r}; choose from {sorted(IDENTITIES)}")
    start = time.perf_counter()
    fn = {
        "sears_symmetry": _check_sears,
        "weight_permutation": _check_weight_permutation,
        "second_family": _check_second_family,
        "partial_sum": _check_partial_sum,
        "qhahn_label_invariance": _check_qhahn_labels,
        "dstar_weight_relation": _check_dstar_relation,
    }[which]
    passed, checked, witness, detail, resid = fn(P, **options)
    return IdentityResult(which, IDENTITIES[which], passed, checked, witness, detail, resid, time.perf_counter() - start)


def _check_sears(f: fam.Family1V):
    if f.id != fam.QRACAH:
        raise ValueError("the Sears check takes a q-Racah family")
    a, b, c = f.params["a"], f.params["b"], f.params["c"]
    g = fam.Family1V(fam.QRACAH, {"a": b, "b": a, "c": c.inverse()}, f.N, f.q)
    checked, worst = 0, 0
    for n in range(f.N + 1):
        for x in range(f.N + 1):
            lhs = fam.eval_poly_1v(f, n, x)
            rhs = fam.eval_poly_1v(g, n, f.N - x)
            checked += 1
            d = abs(lhs - rhs)
            if d != 0:
                return False, checked, {"n": n, "x": x, "lhs": _fmt(lhs), "rhs": _fmt(rhs)}, "", d
    return True, checked, None, "", worst


def weight_permutation_constant(P: ParamSetMV, constant: str = "derived"):
    """Ratio rho(reflected x; permuted params) / rho(x; params).

    ``printed`` is (a_{s+1}, a_1/b, A_{s+1};q)_N / (a_1, bq, qA_s;q)_N
    (qbA_s/a_1)^N.  ``derived`` replaces A_{s+1} and a_1 in the Pochhammers
    by a_1 q^N and A_{s+1} q^N, i.e. multiplies the printed constant by
    (a_1;q)_{2N} / (A_{s+1};q)_{2N}.
    """
    s, N = P.s, P.N
    qv, a1, bv = P.q.value, P.ak(1).value, P.b.value
    As, As1, as1 = P.A(s).value, P.A(s + 1).value, P.ak(s + 1).value
    mono = int_pow(qv * bv * As / a1, N)
    if constant == "printed":
        return qpoch_multi([as1, a1 / bv, As1], qv, N) / qpoch_multi([a1, bv * qv, qv * As], qv, N) * mono
    if constant == "derived":
        qN = int_pow(qv, N)
        return qpoch_multi([as1, a1 / bv, a1 * qN], qv, N) / qpoch_multi([bv * qv, qv * As, As1 * qN], qv, N) * mono
    raise ValueError(f"unknown constant reading {constant!r}")


def _check_weight_permutation(P: ParamSetMV, constant: str = "derived"):
    F = FamilyMV(mv.QRACAH_MV, P)
    Fp = FamilyMV(mv.QRACAH_MV, permuted_params(P))
    kappa = weight_permutation_constant(P, constant)
    checked = 0
    for x in enumerate_lattice(F):
        lhs = eval_weight_mv(Fp, reflect_point(x, P.N))
        rhs = kappa * eval_weight_mv(F, x)
        checked += 1
        if lhs != rhs:
            return False, checked, {"x": x, "lhs": _fmt(lhs), "rhs": _fmt(rhs)}, f"constant={constant}", abs(lhs - rhs)
    return True, checked, None, f"constant={constant}", 0


def _check_second_family(P: ParamSetMV):
    F2 = FamilyMV(mv.QRACAH_MV2, P)
    Fp = FamilyMV(mv.QRACAH_MV, permuted_params(P))
    checked = 0
    for n in enumerate_indices(F2):
        rev = MultiIndex(tuple(reversed(n)))
        for x in enumerate_lattice(F2):
            lhs = eval_poly_mv(F2, n, x)
            rhs = eval_poly_mv(Fp, rev, reflect_point(x, P.N))
            checked += 1
            if lhs != rhs:
                return False, checked, {"n": tuple(n), "x": x, "lhs": _fmt(lhs), "rhs": _fmt(rhs)}, "", abs(lhs - rhs)
    return True, checked, None, "", 0


def _qracah_factor(P: ParamSetMV, k: int, nk: int, Nk1: int, xk: int, xk1: int):
    q, b, a1 = P.q, P.b, P.ak(1)
    pa = b * P.A(k) * q ** (2 * Nk1) / a1
    return fam.qracah_poly(nk, xk - Nk1, pa, P.ak(k + 1) / q, P.A(k) * q ** (xk1 + Nk1), xk1 - Nk1, q)


def partial_sum_lhs(P: ParamSetMV, j: int, n: Sequence[int], m: Sequence[int], x_next: int):
    """Sum over 0 <= x_1 <= ... <= x_j <= x_{j+1} of the x_1..x_j part of R_n R_m rho."""
    qv, a1, bv = P.q.value, P.ak(1).value, P.b.value
    total = 0
    for pt in chain_points(j, x_next):
        X = pt + (x_next,)
        x1 = X[0]
        w = qpoch_multi([a1, bv * qv], qv, x1) / qpoch_multi([qv, a1 / bv], qv, x1) * int_pow(bv * qv, -x1)
        for k in range(1, j + 1):
            xk, xk1 = X[k - 1], X[k]
            Ak, Ak1 = P.A(k).value, P.A(k + 1).value
            num = qpoch(P.ak(k + 1).value, qv, xk1 - xk) * qpoch(Ak1, qv, xk1 + xk) * (1 - Ak * int_pow(qv, 2 * xk))
            den = qpoch(qv, qv, xk1 - xk) * qpoch(qv * Ak, qv, xk1 + xk) * (1 - Ak)
            w = w * num / den
            if k >= 2:
                w = w * int_pow(P.ak(k).value, -xk)
        pn = pm = 1
        for k in range(1, j + 1):
            pn = pn * _qracah_factor(P, k, n[k - 1], sum(n[: k - 1]), X[k - 1], X[k])
            pm = pm * _qracah_factor(P, k, m[k - 1], sum(m[: k - 1]), X[k - 1], X[k])
        total = total + w * pn * pm
    return total


def partial_sum_rhs(P: ParamSetMV, j: int, n: Sequence[int], m: Sequence[int], x_next: int):
    """The closed form after summing x_1..x_j (zero unless n_k = m_k, k <= j)."""
    if tuple(n[:j]) != tuple(m[:j]):
        return 0
    qv, a1, bv = P.q.value, P.ak(1).value, P.b.value
    Nj = sum(n[:j])
    if x_next < Nj:
        return 0
    result = 1
    for k in range(1, j + 1):
        Nk, Nk1 = sum(n[:k]), sum(n[: k - 1])
        Ak, Ak1 = P.A(k).value, P.A(k + 1).value
        u = bv * Ak1 / a1
        num = (1 - u) * qpoch_multi([qv, P.ak(k + 1).value], qv, n[k - 1]) * qpoch(qv * bv * Ak / a1, qv, Nk + Nk1)
        den = (1 - u * int_pow(qv, 2 * Nk)) * qpoch(u, qv, Nk + Nk1)
        result = result * num / den
    Aj, Aj1 = P.A(j).value, P.A(j + 1).value
    result = result * qpoch_multi([Aj1, qv * bv * Aj1 / a1], qv, Nj + x_next)
    result = result / qpoch_multi([qv, a1 / bv], qv, x_next - Nj)
    result = result * int_pow(bv / a1, Nj) * int_pow(qv, Nj * Nj)
    return result * int_pow(bv * Aj * int_pow(qv, 2 * Nj + 1) / a1, -x_next)


def _check_partial_sum(P: ParamSetMV, j: int = 1):
    if not 1 <= j <= P.s - 1:
        raise ValueError(f"partial sums need 1 <= j <= s-1 (s = {P.s}, j = {j})")
    N = P.N
    heads = multi_indices(j, N)
    checked = 0
    for n in heads:
        for m in heads:
            for x_next in range(N + 1):
                lhs = partial_sum_lhs(P, j, n, m, x_next)
                rhs = partial_sum_rhs(P, j, n, m, x_next)
                checked += 1
                if lhs != rhs:
                    w = {"n": tuple(n), "m": tuple(m), "x_next": x_next, "lhs": _fmt(lhs), "rhs": _fmt(rhs)}
                    return False, checked, w, f"j={j}", abs(lhs - rhs)
    return True, checked, None, f"j={j}", 0


def _check_qhahn_labels(P: ParamSetMV, labels: Tuple[int, int] = (1, 2)):
    i, j = labels[0] - 1, labels[1] - 1
    s, N = P.s, P.N
    if not (0 <= i < j <= s):
        raise ValueError(f"labels must satisfy 1 <= i < j <= s+1, got {labels}")
    a = list(P.a)
    a[i], a[j] = a[j], a[i]
    F = FamilyMV(mv.QHAHN_MV, P)
    Fs = FamilyMV(mv.QHAHN_MV, replace(P, a=tuple(a)))
    ratio, first, checked = None, None, 0
    for y in enumerate_lattice(F):
        full = list(y) + [N - sum(y)]
        full[i], full[j] = full[j], full[i]
        r = eval_weight_mv(Fs, tuple(full[:s])) / eval_weight_mv(F, y)
        checked += 1
        if ratio is None:
            ratio, first = r, y
        elif r != ratio:
            w = {"y_first": first, "ratio_first": _fmt(ratio), "y": y, "ratio": _fmt(r)}
            return False, checked, w, f"labels={labels}", abs(r - ratio)
    return True, checked, None, f"labels={labels}; constant ratio {_fmt(ratio)}", 0


def dstar_weight_factor(P: ParamSetMV, x1: int, factor: str = "derived"):
    """rho_{D*}(x) / rho_D(x) as a function of x_1.

    ``printed``: (a_1/q)^{x_1} q^{C(x_1,2)}; ``derived``: a_1^{x_1} q^{x_1^2}.
    """
    qv, a1 = P.q.value, P.ak(1).value
    if factor == "printed":
        return int_pow(a1 / qv, x1) * int_pow(qv, x1 * (x1 - 1) // 2)
    if factor == "derived":
        return int_pow(a1, x1) * int_pow(qv, x1 * x1)
    raise ValueError(f"unknown factor reading {factor!r}")


def _check_dstar_relation(P: ParamSetMV, factor: str = "derived"):
    Fd = FamilyMV(mv.DUAL_QHAHN_MV, P)
    Fs = FamilyMV(mv.DUAL_QHAHN_STAR_MV, P)
    checked = 0
    for x in enumerate_lattice(Fd):
        lhs = eval_weight_mv(Fs, x)
        rhs = dstar_weight_factor(P, x[0], factor) * eval_weight_mv(Fd, x)
        checked += 1
        if lhs != rhs:
            return False, checked, {"x": x, "lhs": _fmt(lhs), "rhs": _fmt(rhs)}, f"factor={factor}", abs(lhs - rhs)
    return True, checked, None, f"factor={factor}", 0


# --------------------------------------------------------------------------
# limit checks
# --------------------------------------------------------------------------

LIMITS = {
    "b_to_0_R_to_D": "R_n(x; b) -> D_n(x) as b -> 0",
    "b_to_inf_R_to_Dstar": "R_n(x; b) * mult -> D*_n(x) as b -> oo",
    "a1_path_to_H": "R_n(Y; a_1 -> 0) * mult -> H_n(y)",
    "beta_to_0_M_to_C": "M_n(x; beta) -> C_n(x) as beta -> 0",
    "a_to_0_r_to_d": "r_n(x; a) -> d_n(x) as a -> 0",
}


@dataclass
class LimitTable:
    name: str
    equation: str
    epsilons: List[object]
    deviations: List[object]
    detail: str = ""
    wall_time: float = 0.0

    @property
    def ratios(self) -> List[object]:
        d = self.deviations
        return [d[i] / d[i + 1] if d[i + 1] != 0 else None for i in range(len(d) - 1)]

    def passed(self, lo=50, hi=200) -> bool:
        return all(r is not None and lo <= r <= hi for r in self.ratios)

    def to_dict(self, lo=50, hi=200):
        worst = max(self.deviations) if self.deviations else 0
        return {
            "name": self.name,
            "formula": self.equation,
            "status": "pass" if self.passed(lo, hi) else "fail",
            "max_residual": _fmt(worst),
            "epsilons": [_fmt(e) for e in self.epsilons],
            "deviations": [_fmt(d) for d in self.deviations],
            "ratios": [None if r is None else _fmt(r) for r in self.ratios],
            "detail": self.detail,
            "wall_time": round(self.wall_time, 6),
        }


def _float_of(P) -> FloatBackend:
    value = P.q.value if getattr(P, "q", None) is not None else None
    b = backend_of(value)
    if not isinstance(b, FloatBackend):
        raise TypeError("limit checks run in the float backend")
    return b


def _root_of(value, backend: FloatBackend) -> RootParam:
    v = backend.convert(value)
    return RootParam(backend.ctx.sqrt(v))


def _max_dev(pairs):
    worst = 0
    for u, v in pairs:
        d = abs(u - v)
        if d > worst:
            worst = d
    return worst


def check_limit(which: str, P, epsilons: Sequence = (Fraction(1, 10**4), Fraction(1, 10**6)), **options) -> LimitTable:
    """Deviation between an epsilon-family and its limit, one entry per epsilon.

    ``P`` is a float :class:`ParamSetMV` (a_1..a_{s+1}, q, N; for q-Meixner
    a_1..a_s, q and a degree cap) or, for ``a_to_0_r_to_d``, a float
    single-variable dual q-Hahn :class:`~mvqracah.families.Family1V`.

    Options: ``multiplier`` ("degree" or "printed") for the b -> oo limit;
    ``degree_cap`` and ``top`` for q-Meixner -> q-Charlier.
    """
    if which not in LIMITS:
        raise ValueError(f"unknown limit {which!r}; choose from {sorted(LIMITS)}")
    start = time.perf_counter()
    fn = {
        "b_to_0_R_to_D": _lim_b0,
        "b_to_inf_R_to_Dstar": _lim_binf,
        "a1_path_to_H": _lim_hahn,
        "beta_to_0_M_to_C": _lim_beta,
        "a_to_0_r_to_d": _lim_a0,
    }[which]
    backend = _float_of(P)
    eps = [backend.convert(e) for e in epsilons]
    devs, detail = fn(P, eps, backend, **options)
    return LimitTable(which, LIMITS[which], eps, devs, detail, time.perf_counter() - start)


def _grid(F: FamilyMV):
    return [(n, x) for n in enumerate_indices(F) for x in enumerate_lattice(F)]


def _lim_b0(P: ParamSetMV, eps, backend):
    Fd = FamilyMV(mv.DUAL_QHAHN_MV, replace(P, b=None))
    grid = _grid(Fd)
    target = [eval_poly_mv(Fd, n, x) for n, x in grid]
    devs = []
    for e in eps:
        Fr = FamilyMV(mv.QRACAH_MV, replace(P, b=_root_of(e, backend)))
        devs.append(_max_dev(zip((eval_poly_mv(Fr, n, x) for n, x in grid), target)))
    return devs, "max |R_n(x; b=eps) - D_n(x)|"


def _binf_multiplier(P: ParamSetMV, n: MultiIndex, mode: str):
    q, b, a1 = P.q, P.b, P.ak(1)
    result = 1
    for k in range(1, P.s + 1):
        Nk1 = n.partial(k - 1)
        e = 2 * Nk1 + 1 if mode == "degree" else Nk1 + 1
        result = result * int_pow((b * P.A(k) * q ** e / a1).value, -n[k - 1])
    return result


def _lim_binf(P: ParamSetMV, eps, backend, multiplier: str = "degree"):
    if multiplier not in ("degree", "printed"):
        raise ValueError(f"unknown multiplier {multiplier!r}")
    Fs = FamilyMV(mv.DUAL_QHAHN_STAR_MV, replace(P, b=None))
    grid = _grid(Fs)
    target = [eval_poly_mv(Fs, n, x) for n, x in grid]
    devs = []
    for e in eps:
        Pe = replace(P, b=_root_of(1 / e, backend))
        Fr = FamilyMV(mv.QRACAH_MV, Pe)
        vals = (eval_poly_mv(Fr, n, x) * _binf_multiplier(Pe, n, multiplier) for n, x in grid)
        devs.append(_max_dev(zip(vals, target)))
    return devs, f"max |R_n(x; b=1/eps) * mult - D*_n(x)|, multiplier={multiplier}"


def _lim_hahn(P: ParamSetMV, eps, backend):
    Fh = FamilyMV(mv.QHAHN_MV, replace(P, b=None))
    grid = _grid(Fh)
    target = [eval_poly_mv(Fh, n, y) for n, y in grid]
    q = P.q
    devs = []
    for e in eps:
        a = (_root_of(e, backend),) + tuple(q * ak for ak in P.a[1:])
        Pe = ParamSetMV(s=P.s, a=a, q=q, b=P.ak(1), N=P.N)
        Fr = FamilyMV(mv.QRACAH_MV, Pe)
        vals = []
        for n, y in grid:
            x = tuple(sum(y[: k + 1]) for k in range(P.s))
            scale = 1
            for k in range(1, P.s + 1):
                scale = scale * half_pow(Pe.A(k) * q ** (2 * n.partial(k - 1)), n[k - 1])
            vals.append(eval_poly_mv(Fr, n, x) * scale)
        devs.append(_max_dev(zip(vals, target)))
    return devs, "max |R_n(Y; a_1=eps, a_k -> q a_k, b -> a_1) * prod (A_k q^{2N_(k-1)})^{n_k/2} - H_n(y)|"


def _lim_beta(P: ParamSetMV, eps, backend, degree_cap: int = 3, top: int = 8):
    Fc = FamilyMV(mv.QCHARLIER_MV, replace(P, beta=None))
    grid = [(n, x) for n in multi_indices(P.s, degree_cap) for x in chain_points(P.s, top)]
    target = [eval_poly_mv(Fc, n, x) for n, x in grid]
    devs = []
    for e in eps:
        Fm = FamilyMV(mv.QMEIXNER_MV, replace(P, beta=_root_of(e, backend)))
        devs.append(_max_dev(zip((eval_poly_mv(Fm, n, x) for n, x in grid), target)))
    return devs, f"max |M_n(x; beta=eps) - C_n(x)|, N_s <= {degree_cap}, x_s <= {top}"


def _lim_a0(f: fam.Family1V, eps, backend):
    if f.id != fam.DUAL_QHAHN:
        raise ValueError("the a -> 0 limit takes a dual q-Hahn family")
    grid = [(n, x) for n in range(f.N + 1) for x in range(f.N + 1)]
    target = [fam.eval_poly_1v(f, n, x) for n, x in grid]
    devs = []
    for e in eps:
        g = fam.Family1V(fam.QRACAH, dict(f.params, a=_root_of(e, backend)), f.N, f.q)
        devs.append(_max_dev(zip((fam.eval_poly_1v(g, n, x) for n, x in grid), target)))
    return devs, "max |r_n(x; a=eps) - d_n(x)|"


# --------------------------------------------------------------------------
# typo arbitration
# --------------------------------------------------------------------------


def arbitrate(key: str, param_sets: Sequence[ParamSetMV], rel_tol=None) -> Dict[str, List[bool]]:
    """Gram-test every option of formula variant ``key`` at each parameter set.

    Exact families must give an identically zero residual matrix.  For the
    classical Racah system the relative residual must not exceed
    ``rel_tol`` (default 1e-25).
    """
    variant = VARIANTS[key]
    out: Dict[str, List[bool]] = {}
    for option in variant.options:
        results = []
        for P in param_sets:
            F = FamilyMV(variant.family, P, {key: option})
            try:
                rep = gram(F)
            except ZeroDivisionError:
                results.append(False)
                continue
            if rep.exact:
                results.append(rep.passed)
            else:
                limit = rel_tol if rel_tol is not None else backend_of(rep.max_rel_residual).convert("1e-25")
                results.append(rep.max_rel_residual <= limit)
        out[option] = results
    return out


def variant_catalog() -> List[Dict[str, str]]:
    """Shipped and rejected readings of every formula variant."""
    rows = []
    for key, v in VARIANTS.items():
        rows.append(
            {
                "family": v.family,
                "variant": key,
                "shipped": v.default,
                "rejected": ", ".join(o for o in v.options if o != v.default),
                "note": v.note,
            }
        )
    return rows
