"""Single-variable families: polynomials, weights and squared norms.

Families on a finite lattice ``0..N`` (q-Racah, dual q-Hahn and its starred
companion, q-Hahn, q-Krawtchouk, classical Racah) evaluate exactly under the
exact backend.  q-Meixner and q-Charlier live on ``x = 0, 1, ...``; their
norms involve infinite products and need the float backend.

Polynomials are evaluated with the lower Pochhammer prefactor folded into
the series (:func:`~mvqracah.qseries.phi_scaled`), which keeps them
well-defined when they are composed with shifted, possibly negative
lattice bounds in the multivariable systems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from .qseries import (
    PhiSpec,
    ZeroDenominatorError,
    hyp_scaled,
    phi_scaled,
    phi_terminating,
    poch,
    qpoch,
    qpoch_inf,
    qpoch_multi,
)
from .scalar import FloatBackend, RootParam, backend_of, half_pow, int_pow

QRACAH = "QRacah"
DUAL_QHAHN = "DualQHahn"
DUAL_QHAHN_STAR = "DualQHahnStar"
QHAHN = "QHahn"
QKRAWTCHOUK = "QKrawtchouk"
QMEIXNER = "QMeixner"
QCHARLIER = "QCharlier"
RACAH = "RacahClassical"

FAMILIES_1V = (RACAH, QRACAH, DUAL_QHAHN, DUAL_QHAHN_STAR, QHAHN, QKRAWTCHOUK, QMEIXNER, QCHARLIER)
UNBOUNDED_1V = (QMEIXNER, QCHARLIER)

PARAM_NAMES = {
    RACAH: ("alpha", "beta", "gamma"),
    QRACAH: ("a", "b", "c"),
    DUAL_QHAHN: ("b", "c"),
    DUAL_QHAHN_STAR: ("b", "c"),
    QHAHN: ("a", "b"),
    QKRAWTCHOUK: ("b",),
    QMEIXNER: ("a", "c"),
    QCHARLIER: ("a",),
}


def _binom2(k: int) -> int:
    return k * (k - 1) // 2


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def _nonzero(value, what: str, index=None):
    if value == 0:
        raise ZeroDenominatorError(what, index)
    return value


def _den_poch(a, q, n: int, what: str):
    """(a;q)_n used as a denominator; names the first vanishing factor."""
    result = a * 0 + 1
    t = a
    for k in range(n):
        f = 1 - t
        if f == 0:
            raise ZeroDenominatorError(f"({what};q)_{n}", k)
        result = result * f
        t = t * q
    return result


# --------------------------------------------------------------------------
# polynomials (module-level, parameters as RootParam, q as RootParam)
# --------------------------------------------------------------------------


def qracah_poly(n: int, x: int, a: RootParam, b: RootParam, c: RootParam, N: int, q: RootParam):
    """r_n(x; a, b, c, N; q), the 4phi3 q-Racah polynomial."""
    qv, av, bv, cv = q.value, a.value, b.value, c.value
    upper = [int_pow(qv, -n), av * bv * int_pow(qv, n + 1), int_pow(qv, -x), cv * int_pow(qv, x - N)]
    lower = [av * qv, bv * cv * qv, int_pow(qv, -N)]
    return phi_scaled(upper, lower, qv, qv, n) * half_pow(q ** N / c, n)


def dual_qhahn_poly(n: int, x: int, b: RootParam, c: RootParam, N: int, q: RootParam):
    """d_n(x; b, c, N; q), the a -> 0 limit of r_n."""
    qv, bv, cv = q.value, b.value, c.value
    upper = [int_pow(qv, -n), int_pow(qv, -x), cv * int_pow(qv, x - N)]
    lower = [bv * cv * qv, int_pow(qv, -N)]
    return phi_scaled(upper, lower, qv, qv, n) * half_pow(q ** N / c, n)


def dual_qhahn_star_poly(n: int, x: int, b: RootParam, c: RootParam, N: int, q: RootParam):
    """d*_n(x; b, c, N; q) = lim_{a->oo} (aq)^-n r_n."""
    qv, bv, cv = q.value, b.value, c.value
    upper = [int_pow(qv, -n), int_pow(qv, -x), cv * int_pow(qv, x - N)]
    lower = [bv * cv * qv, int_pow(qv, -N)]
    z = bv * int_pow(qv, n + 1)
    return _sign(n) * int_pow(qv, _binom2(n)) * phi_scaled(upper, lower, qv, z, n) * half_pow(q ** N / c, n)


def qhahn_poly(n: int, x: int, a: RootParam, b: RootParam, N: int, q: RootParam):
    """h_n(x; a, b, N; q) = (aq, q^-N; q)_n 3phi2(...; q, q)."""
    qv, av, bv = q.value, a.value, b.value
    upper = [int_pow(qv, -n), av * bv * int_pow(qv, n + 1), int_pow(qv, -x)]
    lower = [av * qv, int_pow(qv, -N)]
    return phi_scaled(upper, lower, qv, qv, n)


def qkrawtchouk_poly(n: int, x: int, b: RootParam, N: int, q: RootParam):
    """k_n(x; b, N; q) = lim_{a->oo} (aq)^-n h_n."""
    qv, bv = q.value, b.value
    upper = [int_pow(qv, -n), int_pow(qv, -x)]
    lower = [int_pow(qv, -N)]
    return _sign(n) * int_pow(qv, _binom2(n)) * phi_scaled(upper, lower, qv, bv * int_pow(qv, n + 1), n)


def qmeixner_scaled(n: int, x: int, a, c, q: RootParam):
    """(aq;q)_n M_n(q^-x; a, c; q), polynomial in ``a``.

    ``a`` and ``c`` are plain scalars: neither enters a half power.
    """
    qv = q.value
    upper = [int_pow(qv, -n), int_pow(qv, -x)]
    return phi_scaled(upper, [a * qv], qv, -int_pow(qv, n + 1) / c, n)


def qmeixner_poly(n: int, x: int, a, c, q: RootParam):
    """M_n(q^-x; a, c; q) = 2phi1(q^-n, q^-x; aq; q, -q^{n+1}/c)."""
    qv = q.value
    spec = PhiSpec([int_pow(qv, -n), int_pow(qv, -x)], [a * qv], qv, -int_pow(qv, n + 1) / c, n, "q-Meixner 2phi1")
    return phi_terminating(spec, validate=False)


def qcharlier_poly(n: int, x: int, a, q: RootParam):
    """c_n(q^-x; a; q) = 2phi1(q^-n, q^-x; 0; q, -q^{n+1}/a)."""
    qv = q.value
    upper = [int_pow(qv, -n), int_pow(qv, -x)]
    return phi_scaled(upper, [qv * 0], qv, -int_pow(qv, n + 1) / a, n)


def racah_poly(n: int, x: int, alpha, beta, gamma, N):
    """Classical Racah r_n(x; alpha, beta, gamma, N) (the 4F3 form)."""
    upper = [-n + 0 * alpha, n + alpha + beta + 1, -x + 0 * alpha, x + gamma - N]
    lower = [alpha + 1, beta + gamma + 1, -N + 0 * alpha]
    return hyp_scaled(upper, lower, n)


# --------------------------------------------------------------------------
# weights and norms
# --------------------------------------------------------------------------


def qracah_weight(x: int, a, b, c, N: int, q):
    qv, av, bv, cv = q.value, a.value, b.value, c.value
    qmN = int_pow(qv, -N)
    pre = (1 - cv * int_pow(qv, 2 * x - N)) / _nonzero(1 - cv * qmN, "(1 - c q^-N)")
    num = qpoch_multi([cv * qmN, av * qv, bv * cv * qv, qmN], qv, x)
    den = (
        _den_poch(qv, qv, x, "q")
        * _den_poch(cv / av * qmN, qv, x, "c q^-N / a")
        * _den_poch(qmN / bv, qv, x, "q^-N / b")
        * _den_poch(cv * qv, qv, x, "c q")
    )
    return pre * num / den * int_pow(av * bv * qv, -x)


def qracah_norm(n: int, a, b, c, N: int, q):
    qv, av, bv, cv = q.value, a.value, b.value, c.value
    abq = av * bv * qv
    head = qpoch_multi([1 / cv, abq * qv], qv, N) / (
        _den_poch(av * qv / cv, qv, N, "a q / c") * _den_poch(bv * qv, qv, N, "b q")
    )
    body = qpoch_multi([qv, av * qv, bv * qv, av * qv / cv, bv * cv * qv, int_pow(qv, -N)], qv, n)
    tail = (1 - abq) / _nonzero(1 - abq * int_pow(qv, 2 * n), "(1 - ab q^{2n+1})")
    tail = tail * qpoch(abq * int_pow(qv, N + 1), qv, n) / _den_poch(abq, qv, n, "a b q")
    return head * body * tail


def dual_qhahn_weight(x: int, b, c, N: int, q):
    qv, bv, cv = q.value, b.value, c.value
    qmN = int_pow(qv, -N)
    pre = (1 - cv * int_pow(qv, 2 * x - N)) / _nonzero(1 - cv * qmN, "(1 - c q^-N)")
    num = qpoch_multi([cv * qmN, bv * cv * qv, qmN], qv, x)
    den = _den_poch(qv, qv, x, "q") * _den_poch(qmN / bv, qv, x, "q^-N / b") * _den_poch(cv * qv, qv, x, "c q")
    return pre * num / den * int_pow(-bv * cv * qv * qmN, -x) * int_pow(qv, -_binom2(x))


def dual_qhahn_norm(n: int, b, c, N: int, q):
    qv, bv, cv = q.value, b.value, c.value
    head = qpoch(1 / cv, qv, N) / _den_poch(bv * qv, qv, N, "b q")
    return head * qpoch_multi([qv, bv * qv, bv * cv * qv, int_pow(qv, -N)], qv, n)


def dual_qhahn_star_weight(x: int, b, c, N: int, q):
    qv, bv, cv = q.value, b.value, c.value
    qmN = int_pow(qv, -N)
    pre = (1 - cv * int_pow(qv, 2 * x - N)) / _nonzero(1 - cv * qmN, "(1 - c q^-N)")
    num = qpoch_multi([cv * qmN, bv * cv * qv, qmN], qv, x)
    den = _den_poch(qv, qv, x, "q") * _den_poch(qmN / bv, qv, x, "q^-N / b") * _den_poch(cv * qv, qv, x, "c q")
    return pre * num / den * int_pow(-bv, -x) * int_pow(qv, _binom2(x))


def dual_qhahn_star_norm(n: int, b, c, N: int, q):
    qv, bv, cv = q.value, b.value, c.value
    head = qpoch(1 / cv, qv, N) * int_pow(bv * cv * qv, N) / _den_poch(bv * qv, qv, N, "b q")
    body = qpoch_multi([qv, bv * qv, bv * cv * qv, int_pow(qv, -N)], qv, n)
    return head * body * int_pow(cv, -n) * int_pow(qv, n * n + (N - 2) * n)


def qhahn_weight(x: int, a, b, N: int, q):
    qv, av, bv = q.value, a.value, b.value
    qmN = int_pow(qv, -N)
    num = qpoch_multi([av * qv, qmN], qv, x)
    den = _den_poch(qv, qv, x, "q") * _den_poch(qmN / bv, qv, x, "q^-N / b")
    return num / den * int_pow(av * bv * qv, -x)


def qhahn_norm(n: int, a, b, N: int, q):
    qv, av, bv = q.value, a.value, b.value
    abq = av * bv * qv
    head = qpoch(abq * qv, qv, N) / (_den_poch(bv * qv, qv, N, "b q") * int_pow(av * qv, N))
    body = qpoch_multi([qv, abq * int_pow(qv, N + 1), bv * qv, av * qv, int_pow(qv, -N)], qv, n)
    body = body / _den_poch(abq, qv, n, "a b q")
    tail = (1 - abq) / _nonzero(1 - abq * int_pow(qv, 2 * n), "(1 - ab q^{2n+1})")
    return head * body * tail * int_pow(-av * qv, n) * int_pow(qv, _binom2(n) - N * n)


def qkrawtchouk_weight(x: int, b, N: int, q):
    qv, bv = q.value, b.value
    qmN = int_pow(qv, -N)
    den = _den_poch(qv, qv, x, "q") * _den_poch(qmN / bv, qv, x, "q^-N / b")
    return qpoch(qmN, qv, x) / den * int_pow(-bv, -x) * int_pow(qv, _binom2(x))


def qkrawtchouk_norm(n: int, b, N: int, q):
    qv, bv = q.value, b.value
    head = _sign(N) * int_pow(bv * qv, N) * int_pow(qv, _binom2(N)) / _den_poch(bv * qv, qv, N, "b q")
    return head * qpoch_multi([qv, bv * qv, int_pow(qv, -N)], qv, n) * int_pow(qv, n * n - 2 * n)


def qmeixner_weight(x: int, a, c, q):
    qv = q.value
    den = _den_poch(qv, qv, x, "q") * _den_poch(-a * c * qv, qv, x, "-a c q")
    return qpoch(a * qv, qv, x) / den * int_pow(c, x) * int_pow(qv, _binom2(x))


def qmeixner_norm(n: int, a, c, q):
    qv = q.value
    _require_float(qv, "q-Meixner norm")
    head = qpoch_inf(-c, qv) / _nonzero(qpoch_inf(-a * c * qv, qv), "(-a c q; q)_inf")
    body = qpoch_multi([qv, -qv / c], qv, n) / _den_poch(a * qv, qv, n, "a q")
    return head * body * int_pow(qv, -n)


def qcharlier_weight(x: int, a, q):
    qv = q.value
    return int_pow(a, x) * int_pow(qv, _binom2(x)) / _den_poch(qv, qv, x, "q")


def qcharlier_norm(n: int, a, q):
    qv = q.value
    _require_float(qv, "q-Charlier norm")
    return qpoch_inf(-a, qv) * qpoch_multi([qv, -qv / a], qv, n) * int_pow(qv, -n)


def racah_weight(x: int, alpha, beta, gamma, N: int):
    num = poch(gamma - N, x) * poch(alpha + 1, x) * poch(beta + gamma + 1, x) * poch(-N + 0 * alpha, x)
    den = poch(1 + 0 * alpha, x) * poch(gamma - alpha - N, x) * poch(-beta - N, x) * poch(gamma + 1, x)
    _nonzero(den, "x! (gamma-alpha-N)_x (-beta-N)_x (gamma+1)_x", x)
    pre = (gamma - N + 2 * x) / _nonzero(gamma - N, "(gamma - N)")
    return pre * num / den


def racah_norm(n: int, alpha, beta, gamma, N: int):
    head = poch(alpha + beta + 2, N) * poch(-gamma, N)
    head = head / _nonzero(poch(beta + 1, N) * poch(alpha - gamma + 1, N), "(beta+1)_N (alpha-gamma+1)_N")
    body = poch(alpha - gamma + 1, n) * poch(beta + gamma + 1, n) * poch(alpha + beta + 2 + N, n)
    tail = (alpha + beta + 1) * poch(1 + 0 * alpha, n) * poch(alpha + 1, n) * poch(beta + 1, n) * poch(-N + 0 * alpha, n)
    tail = tail / _nonzero((alpha + beta + 1 + 2 * n) * poch(alpha + beta + 1, n), "(alpha+beta+1+2n)(alpha+beta+1)_n")
    return head * body * tail


def _require_float(value, what: str):
    if not isinstance(backend_of(value), FloatBackend):
        raise TypeError(f"{what} involves infinite products and needs the float backend")


# --------------------------------------------------------------------------
# family records
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Family1V:
    """A single-variable family with concrete parameters.

    ``params`` maps the names in :data:`PARAM_NAMES` to :class:`RootParam`
    (q-families) or plain scalars (classical Racah).
    """

    id: str
    params: Dict[str, object]
    N: Optional[int] = None
    q: Optional[RootParam] = None

    def __post_init__(self):
        if self.id not in FAMILIES_1V:
            raise ValueError(f"unknown family {self.id!r}")
        missing = set(PARAM_NAMES[self.id]) - set(self.params)
        if missing:
            raise ValueError(f"{self.id} is missing parameters {sorted(missing)}")
        if self.id not in UNBOUNDED_1V and (self.N is None or self.N < 0):
            raise ValueError(f"{self.id} needs a degree bound N >= 0")
        if self.id != RACAH and self.q is None:
            raise ValueError(f"{self.id} needs q")

    @property
    def bounded(self) -> bool:
        return self.id not in UNBOUNDED_1V

    def _p(self, name):
        return self.params[name]

    def _v(self, name):
        p = self.params[name]
        return p.value if isinstance(p, RootParam) else p


def _check_n(f: Family1V, n: int):
    if n < 0 or (f.bounded and n > f.N):
        raise ValueError(f"{f.id}: degree {n} outside 0..{f.N}")


def eval_poly_1v(f: Family1V, n: int, x: int):
    _check_n(f, n)
    p, q, N = f._p, f.q, f.N
    if f.id == QRACAH:
        return qracah_poly(n, x, p("a"), p("b"), p("c"), N, q)
    if f.id == DUAL_QHAHN:
        return dual_qhahn_poly(n, x, p("b"), p("c"), N, q)
    if f.id == DUAL_QHAHN_STAR:
        return dual_qhahn_star_poly(n, x, p("b"), p("c"), N, q)
    if f.id == QHAHN:
        return qhahn_poly(n, x, p("a"), p("b"), N, q)
    if f.id == QKRAWTCHOUK:
        return qkrawtchouk_poly(n, x, p("b"), N, q)
    if f.id == QMEIXNER:
        return qmeixner_poly(n, x, f._v("a"), f._v("c"), q)
    if f.id == QCHARLIER:
        return qcharlier_poly(n, x, f._v("a"), q)
    return racah_poly(n, x, p("alpha"), p("beta"), p("gamma"), N)


def eval_weight_1v(f: Family1V, x: int):
    if x < 0 or (f.bounded and x > f.N):
        return 0
    p, q, N = f._p, f.q, f.N
    if f.id == QRACAH:
        return qracah_weight(x, p("a"), p("b"), p("c"), N, q)
    if f.id == DUAL_QHAHN:
        return dual_qhahn_weight(x, p("b"), p("c"), N, q)
    if f.id == DUAL_QHAHN_STAR:
        return dual_qhahn_star_weight(x, p("b"), p("c"), N, q)
    if f.id == QHAHN:
        return qhahn_weight(x, p("a"), p("b"), N, q)
    if f.id == QKRAWTCHOUK:
        return qkrawtchouk_weight(x, p("b"), N, q)
    if f.id == QMEIXNER:
        return qmeixner_weight(x, f._v("a"), f._v("c"), q)
    if f.id == QCHARLIER:
        return qcharlier_weight(x, f._v("a"), q)
    return racah_weight(x, p("alpha"), p("beta"), p("gamma"), N)


def eval_norm_1v(f: Family1V, n: int):
    _check_n(f, n)
    p, q, N = f._p, f.q, f.N
    if f.id == QRACAH:
        return qracah_norm(n, p("a"), p("b"), p("c"), N, q)
    if f.id == DUAL_QHAHN:
        return dual_qhahn_norm(n, p("b"), p("c"), N, q)
    if f.id == DUAL_QHAHN_STAR:
        return dual_qhahn_star_norm(n, p("b"), p("c"), N, q)
    if f.id == QHAHN:
        return qhahn_norm(n, p("a"), p("b"), N, q)
    if f.id == QKRAWTCHOUK:
        return qkrawtchouk_norm(n, p("b"), N, q)
    if f.id == QMEIXNER:
        return qmeixner_norm(n, f._v("a"), f._v("c"), q)
    if f.id == QCHARLIER:
        return qcharlier_norm(n, f._v("a"), q)
    return racah_norm(n, p("alpha"), p("beta"), p("gamma"), N)


# --------------------------------------------------------------------------
# parameter validation
# --------------------------------------------------------------------------


def _series_lowers(f: Family1V) -> List[Tuple[str, object]]:
    """Lower parameters of the defining series (x-independent for every family)."""
    p = f._v
    if f.id == RACAH:
        return [("alpha+1", p("alpha") + 1), ("beta+gamma+1", p("beta") + p("gamma") + 1)]
    qv = f.q.value
    if f.id == QRACAH:
        return [("a q", p("a") * qv), ("b c q", p("b") * p("c") * qv), ("q^-N", int_pow(qv, -f.N))]
    if f.id in (DUAL_QHAHN, DUAL_QHAHN_STAR):
        return [("b c q", p("b") * p("c") * qv), ("q^-N", int_pow(qv, -f.N))]
    if f.id == QHAHN:
        return [("a q", p("a") * qv), ("q^-N", int_pow(qv, -f.N))]
    if f.id == QKRAWTCHOUK:
        return [("q^-N", int_pow(qv, -f.N))]
    if f.id == QMEIXNER:
        return [("a q", p("a") * qv)]
    return []


def validate_params(f: Family1V, n_max: Optional[int] = None, x_max: Optional[int] = None) -> List[str]:
    """Scan the denominators of ``f`` for 0 <= n <= n_max, 0 <= x <= x_max.

    Bounded families default to the full range 0..N.  Unbounded families
    default to n_max = 4, x_max = 12.  Returns a list of violations (empty
    when every denominator is nonzero); never raises for bad parameters.
    """
    if f.bounded:
        n_max = f.N if n_max is None else n_max
        x_max = f.N if x_max is None else x_max
    else:
        n_max = 4 if n_max is None else n_max
        x_max = 12 if x_max is None else x_max
    out: List[str] = []
    for name, low in _series_lowers(f):
        for k in range(max(n_max, 0)):
            if f.id == RACAH:
                vanish = low + k == 0
            else:
                vanish = 1 - low * int_pow(f.q.value, k) == 0
            if vanish:
                out.append(f"series lower parameter {name}: factor k={k} vanishes for degrees n > {k}")
                break
    for x in range(x_max + 1):
        try:
            eval_weight_1v(f, x)
        except ZeroDivisionError as exc:
            out.append(f"weight x={x}: {exc}")
    need_float = not f.bounded
    if need_float and not isinstance(backend_of(f.q.value), FloatBackend):
        return out
    for n in range(n_max + 1):
        try:
            lam = eval_norm_1v(f, n)
        except ZeroDivisionError as exc:
            out.append(f"norm n={n}: {exc}")
            continue
        if lam == 0:
            out.append(f"norm n={n}: vanishing norm")
    return out
