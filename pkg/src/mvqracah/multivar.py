"""The ten multivariable systems: polynomials, weights and squared norms.

Each system is a product of single-variable factors with shifted lattice
arguments and composite parameters.  Composite parameters are assembled
from :class:`~mvqracah.scalar.RootParam` objects, so every half-integer
power stays rational in the exact backend.

A handful of printed formulas admit mechanical misprints.  Each such spot is
a *formula variant* with a ``printed`` reading and one or more alternatives;
:data:`VARIANTS` lists them together with the shipped default.  Defaults were
selected by requiring the exact Gram matrix to be diagonal with the stated
norms (see :func:`mvqracah.verify.arbitrate`).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence, Tuple

from . import families as fam
from .qseries import ZeroDenominatorError, poch, qpoch, qpoch_inf, qpoch_multi
from .scalar import Backend, FloatBackend, RootParam, backend_of, gamma, half_pow, int_pow

QRACAH_MV = "QRacahMV"
QRACAH_MV2 = "QRacahMV2"
DUAL_QHAHN_MV = "DualQHahnMV"
DUAL_QHAHN_MV2 = "DualQHahnMV2"
DUAL_QHAHN_STAR_MV = "DualQHahnStarMV"
QHAHN_MV = "QHahnMV"
QKRAWTCHOUK_MV = "QKrawtchoukMV"
QMEIXNER_MV = "QMeixnerMV"
QCHARLIER_MV = "QCharlierMV"
RACAH_MV = "RacahClassicalMV"

FAMILIES_MV = (
    QRACAH_MV,
    QRACAH_MV2,
    DUAL_QHAHN_MV,
    DUAL_QHAHN_MV2,
    DUAL_QHAHN_STAR_MV,
    QHAHN_MV,
    QKRAWTCHOUK_MV,
    QMEIXNER_MV,
    QCHARLIER_MV,
    RACAH_MV,
)
EXACT_FAMILIES = FAMILIES_MV[:7]
INFINITE_FAMILIES = (QMEIXNER_MV, QCHARLIER_MV)
COMPOSITION_FAMILIES = (QHAHN_MV, QKRAWTCHOUK_MV)

@dataclass(frozen=True)
class Variant:
    family: str
    where: str
    options: Tuple[str, ...]
    default: str
    note: str


VARIANTS: Dict[str, Variant] = {
    v.where: v
    for v in [
        Variant(
            QRACAH_MV2,
            "qracah2_tail_sum",
            ("sum", "product"),
            "sum",
            "N*_k read as the tail sum n_k+...+n_s (printed as a product)",
        ),
        Variant(
            QHAHN_MV,
            "qhahn_param",
            ("printed", "shifted"),
            "shifted",
            "first h-parameter A_k q^{2N_k+k-1} (printed) vs A_k q^{2N_{k-1}+k-1}",
        ),
        Variant(
            QHAHN_MV,
            "qhahn_norm_power",
            ("printed", "alt"),
            "printed",
            "norm factor (A_s q^{N_s+s})^{-N}; 'alt' reads (A_s q^{s})^{-N}",
        ),
        Variant(
            QKRAWTCHOUK_MV,
            "qkrawtchouk_weight_sign",
            ("printed", "positive"),
            "positive",
            "weight factor q^{-C(y_1,2)} (printed) vs q^{+C(y_1,2)}",
        ),
        Variant(
            QKRAWTCHOUK_MV,
            "qkrawtchouk_norm_head",
            ("printed", "degree_bound"),
            "degree_bound",
            "norm denominator (q a_s;q)_{N_s} (printed) vs (q a_s;q)_N",
        ),
        Variant(
            DUAL_QHAHN_STAR_MV,
            "dstar_weight_sign",
            ("printed", "positive"),
            "positive",
            "weight factor q^{-C(x_1,2)} (printed) vs q^{+C(x_1,2)}",
        ),
        Variant(
            DUAL_QHAHN_STAR_MV,
            "dstar_norm",
            ("printed", "limit"),
            "limit",
            "norm as printed vs the b->oo limit of the q-Racah norm matching d*_n",
        ),
        Variant(
            RACAH_MV,
            "racah_beta",
            ("printed", "single"),
            "single",
            "second Racah parameter alpha_{k+1}-1 (printed) vs a_{k+1}-1",
        ),
        Variant(
            RACAH_MV,
            "racah_norm_eta",
            ("printed", "with_eta"),
            "with_eta",
            "Gamma(alpha_k-a_1+N_k+N_{k-1}+1) (printed) vs with +eta",
        ),
        Variant(
            RACAH_MV,
            "racah_norm_head",
            ("printed", "next_alpha"),
            "next_alpha",
            "norm factor (alpha_s+N)_{N_s} (printed) vs (alpha_{s+1}+N)_{N_s}",
        ),
    ]
}


def default_variants(family: str) -> Dict[str, str]:
    return {k: v.default for k, v in VARIANTS.items() if v.family == family}


class MultiIndex(tuple):
    """Degree vector (n_1, ..., n_s) with partial and tail sums."""

    def __new__(cls, values):
        values = tuple(int(v) for v in values)
        if any(v < 0 for v in values):
            raise ValueError(f"negative degree in {values}")
        return super().__new__(cls, values)

    @property
    def s(self) -> int:
        return len(self)

    def partial(self, k: int) -> int:
        """N_k = n_1 + ... + n_k (N_0 = 0)."""
        return sum(self[:k])

    def tail(self, k: int) -> int:
        """N*_k = n_k + ... + n_s (N*_{s+1} = 0)."""
        return sum(self[k - 1 :])

    @property
    def total(self) -> int:
        return sum(self)


@dataclass(frozen=True)
class ParamSetMV:
    """Parameter environment of a multivariable system.

    ``a`` holds a_1, a_2, ... (s+1 entries for the q-Racah, dual and Hahn
    systems, s entries for Krawtchouk, Meixner and Charlier).  For the
    classical Racah system ``a`` and ``eta`` are plain scalars.
    """

    s: int
    a: Tuple
    q: Optional[RootParam] = None
    b: Optional[RootParam] = None
    N: Optional[int] = None
    beta: Optional[RootParam] = None
    eta: object = None

    def ak(self, k: int):
        """a_k, 1-based."""
        return self.a[k - 1]

    def A(self, k: int) -> RootParam:
        """A_k = a_1 ... a_k (A_0 = 1), as a RootParam."""
        one = self.q / self.q
        result = one
        for j in range(1, k + 1):
            result = result * self.a[j - 1]
        return result

    def alpha(self, k: int):
        """alpha_k = a_1 + ... + a_k for the classical system."""
        return sum(self.a[:k], 0 * self.a[0])

    def qp(self, k: int) -> RootParam:
        return self.q ** k


@dataclass(frozen=True)
class FamilyMV:
    id: str
    params: ParamSetMV
    variants: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.id not in FAMILIES_MV:
            raise ValueError(f"unknown multivariable family {self.id!r}")
        merged = default_variants(self.id)
        for key, val in self.variants.items():
            if key not in VARIANTS or VARIANTS[key].family != self.id:
                raise ValueError(f"{key!r} is not a formula variant of {self.id}")
            if val not in VARIANTS[key].options:
                raise ValueError(f"{key}: unknown option {val!r}")
            merged[key] = val
        object.__setattr__(self, "variants", merged)
        p = self.params
        need = p.s if self.id in (QKRAWTCHOUK_MV, QMEIXNER_MV, QCHARLIER_MV) else p.s + 1
        if len(p.a) != need:
            raise ValueError(f"{self.id} with s={p.s} needs {need} a-parameters, got {len(p.a)}")
        if self.id in (QRACAH_MV, QRACAH_MV2) and p.b is None:
            raise ValueError(f"{self.id} needs b")
        if self.id == QMEIXNER_MV and p.beta is None:
            raise ValueError("QMeixnerMV needs beta")
        if self.id not in INFINITE_FAMILIES and p.N is None:
            raise ValueError(f"{self.id} needs N")
        if self.id == RACAH_MV and p.eta is None:
            raise ValueError("RacahClassicalMV needs eta")
        if self.id != RACAH_MV and p.q is None:
            raise ValueError(f"{self.id} needs q")

    @property
    def s(self) -> int:
        return self.params.s

    @property
    def bounded(self) -> bool:
        return self.id not in INFINITE_FAMILIES

    @property
    def exact_capable(self) -> bool:
        return self.id in EXACT_FAMILIES

    def variant(self, key: str) -> str:
        return self.variants[key]

    def with_params(self, params: ParamSetMV) -> "FamilyMV":
        return replace(self, params=params)


def _binom2(k: int) -> int:
    return k * (k - 1) // 2


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def _nz(value, what):
    if value == 0:
        raise ZeroDenominatorError(what)
    return value


def _dpoch(a, q, n, what):
    return fam._den_poch(a, q, n, what)


def in_region(F: FamilyMV, x: Sequence[int]) -> bool:
    """Membership in the orthogonality lattice of ``F``.

    Chain families use 0 <= x_1 <= ... <= x_s (<= N when bounded);
    q-Hahn and q-Krawtchouk use composition coordinates y >= 0, sum <= N.
    """
    if len(x) != F.s or any(v < 0 for v in x):
        return False
    if F.id in COMPOSITION_FAMILIES:
        return sum(x) <= F.params.N
    if any(x[i] > x[i + 1] for i in range(len(x) - 1)):
        return False
    return not F.bounded or x[-1] <= F.params.N


def _xs(F: FamilyMV, x) -> Tuple[int, ...]:
    """x_1..x_s followed by x_{s+1} = N (chain families)."""
    return tuple(x) + ((F.params.N,) if F.params.N is not None else ())


def _ys(F: FamilyMV, y) -> Tuple[int, ...]:
    """Partial sums Y_1..Y_s followed by Y_{s+1} = N."""
    out, acc = [], 0
    for v in y:
        acc += v
        out.append(acc)
    return tuple(out) + (F.params.N,)


# --------------------------------------------------------------------------
# polynomials
# --------------------------------------------------------------------------


def _poly_qracah(F: FamilyMV, n: MultiIndex, x):
    P = F.params
    q, b, a1 = P.q, P.b, P.ak(1)
    X = _xs(F, x)
    result = 1
    for k in range(1, P.s + 1):
        Nk1 = n.partial(k - 1)
        xk, xk1 = X[k - 1], X[k]
        pa = b * P.A(k) * q ** (2 * Nk1) / a1
        pb = P.ak(k + 1) / q
        pc = P.A(k) * q ** (xk1 + Nk1)
        result = result * fam.qracah_poly(n[k - 1], xk - Nk1, pa, pb, pc, xk1 - Nk1, q)
    return result


def _tails(F: FamilyMV, n: MultiIndex):
    if F.variants.get("qracah2_tail_sum", "sum") == "product":
        def tail(k):
            prod = 1
            for v in n[k - 1 :]:
                prod *= v
            return prod if k <= len(n) else 0
        return tail
    return n.tail


def _second_family_rest(F: FamilyMV, n: MultiIndex, x, tail):
    """Factors k = 2..s shared by the two second-family systems."""
    P = F.params
    q, N = P.q, P.N
    As1 = P.A(P.s + 1)
    result = 1
    for k in range(2, P.s + 1):
        T = tail(k + 1)
        xk, xkm1 = x[k - 1], x[k - 2]
        pa = As1 * q ** (2 * T - 1) / P.A(k)
        pb = P.ak(k) / q
        pc = q ** (T - N - xkm1) / P.A(k)
        result = result * fam.qracah_poly(n[k - 1], N - T - xk, pa, pb, pc, N - T - xkm1, q)
    return result


def _poly_qracah2(F: FamilyMV, n: MultiIndex, x):
    P = F.params
    q, N, a1 = P.q, P.N, P.ak(1)
    tail = _tails(F, n)
    T2 = tail(2)
    first = fam.qracah_poly(
        n[0], N - T2 - x[0], P.A(P.s + 1) * q ** (2 * T2 - 1) / a1, P.b, q ** (T2 - N) / a1, N - T2, q
    )
    return first * _second_family_rest(F, n, x, tail)


def _poly_dual(F: FamilyMV, n: MultiIndex, x, star: bool = False):
    P = F.params
    q = P.q
    X = _xs(F, x)
    one_v = fam.dual_qhahn_star_poly if star else fam.dual_qhahn_poly
    result = 1
    for k in range(1, P.s + 1):
        Nk1 = n.partial(k - 1)
        xk, xk1 = X[k - 1], X[k]
        result = result * one_v(n[k - 1], xk - Nk1, P.ak(k + 1) / q, P.A(k) * q ** (xk1 + Nk1), xk1 - Nk1, q)
    return result


def _poly_dual2(F: FamilyMV, n: MultiIndex, x):
    P = F.params
    q, N, a1 = P.q, P.N, P.ak(1)
    T2 = n.tail(2)
    first = fam.dual_qhahn_poly(n[0], N - T2 - x[0], P.A(P.s + 1) * q ** (N + T2 - 1), q ** (T2 - N) / a1, N - T2, q)
    return first * _second_family_rest(F, n, x, n.tail)


def _poly_qhahn(F: FamilyMV, n: MultiIndex, y):
    P = F.params
    q = P.q
    Y = _ys(F, y)
    shifted = F.variant("qhahn_param") == "shifted"
    result = 1
    for k in range(1, P.s + 1):
        Nk1 = n.partial(k - 1)
        e = 2 * Nk1 + k - 1 if shifted else 2 * n.partial(k) + k - 1
        result = result * fam.qhahn_poly(n[k - 1], Y[k - 1] - Nk1, P.A(k) * q ** e, P.ak(k + 1), Y[k] - Nk1, q)
    return result


def _poly_qkrawtchouk(F: FamilyMV, n: MultiIndex, y):
    P = F.params
    Y = _ys(F, y)
    result = 1
    for j in range(1, P.s + 1):
        Nj1 = n.partial(j - 1)
        result = result * fam.qkrawtchouk_poly(n[j - 1], Y[j - 1] - Nj1, P.ak(j), Y[j] - Nj1, P.q)
    return result


def _meixner_head(F: FamilyMV, n: MultiIndex):
    """The x-independent scalar prod_k (-1)^{n_k} q^{C(n_k,2)+n_k N_{k-1}} A_{k-1}^{n_k/2}."""
    P = F.params
    qv = P.q.value
    result = 1
    for k in range(1, P.s + 1):
        nk, Nk1 = n[k - 1], n.partial(k - 1)
        result = result * _sign(nk) * int_pow(qv, _binom2(nk) + nk * Nk1) * half_pow(P.A(k - 1), nk)
    return result


def _poly_meixner(F: FamilyMV, n: MultiIndex, x, charlier: bool = False):
    P = F.params
    q = P.q
    qv = q.value
    s = P.s
    result = _meixner_head(F, n)
    for k in range(1, s):
        Nk1 = n.partial(k - 1)
        a = int_pow(qv, Nk1 - x[k] - 1)
        c = -qv / P.ak(k).value
        result = result * fam.qmeixner_scaled(n[k - 1], x[k - 1] - Nk1, a, c, q)
    Ns1 = n.partial(s - 1)
    c = -qv / P.ak(s).value
    if charlier:
        last = fam.qcharlier_poly(n[s - 1], x[s - 1] - Ns1, c, q)
    else:
        a = P.beta.value * int_pow(qv, Ns1 - 1)
        last = fam.qmeixner_scaled(n[s - 1], x[s - 1] - Ns1, a, c, q)
    return result * last


def _poly_racah(F: FamilyMV, n: MultiIndex, x):
    P = F.params
    X = _xs(F, x)
    single = F.variant("racah_beta") == "single"
    a1, eta = P.ak(1), P.eta
    result = 1
    for k in range(1, P.s + 1):
        Nk1 = n.partial(k - 1)
        xk, xk1 = X[k - 1], X[k]
        al = 2 * Nk1 + eta + P.alpha(k) - a1
        be = (P.ak(k + 1) if single else P.alpha(k + 1)) - 1
        ga = Nk1 + P.alpha(k) + xk1
        result = result * fam.racah_poly(n[k - 1], xk - Nk1, al, be, ga, xk1 - Nk1)
    return result


def eval_poly_mv(F: FamilyMV, n, x):
    n = MultiIndex(n)
    if len(n) != F.s or len(x) != F.s:
        raise ValueError(f"{F.id}: index {tuple(n)} / point {tuple(x)} do not have s = {F.s} components")
    if F.bounded and n.total > F.params.N:
        raise ValueError(f"{F.id}: total degree {n.total} exceeds N = {F.params.N}")
    try:
        return _POLY[F.id](F, n, tuple(x))
    except ZeroDenominatorError as exc:
        raise ZeroDenominatorError(exc.what, exc.index, f"{F.id} polynomial n={tuple(n)} x={tuple(x)}") from exc


_POLY = {
    QRACAH_MV: _poly_qracah,
    QRACAH_MV2: _poly_qracah2,
    DUAL_QHAHN_MV: _poly_dual,
    DUAL_QHAHN_MV2: _poly_dual2,
    DUAL_QHAHN_STAR_MV: lambda F, n, x: _poly_dual(F, n, x, star=True),
    QHAHN_MV: _poly_qhahn,
    QKRAWTCHOUK_MV: _poly_qkrawtchouk,
    QMEIXNER_MV: _poly_meixner,
    QCHARLIER_MV: lambda F, n, x: _poly_meixner(F, n, x, charlier=True),
    RACAH_MV: _poly_racah,
}


# --------------------------------------------------------------------------
# weights
# --------------------------------------------------------------------------


def _chain(F: FamilyMV, X):
    """prod_k (a_{k+1})_{x_{k+1}-x_k} (A_{k+1})_{x_{k+1}+x_k} (1-A_k q^{2x_k})
    / [(q)_{x_{k+1}-x_k} (qA_k)_{x_{k+1}+x_k} (1-A_k)] a_k^{-x_k}."""
    P = F.params
    qv = P.q.value
    result = 1
    for k in range(1, P.s + 1):
        xk, xk1 = X[k - 1], X[k]
        Ak, Ak1 = P.A(k).value, P.A(k + 1).value
        num = qpoch(P.ak(k + 1).value, qv, xk1 - xk) * qpoch(Ak1, qv, xk1 + xk) * (1 - Ak * int_pow(qv, 2 * xk))
        den = _dpoch(qv, qv, xk1 - xk, "q") * _dpoch(qv * Ak, qv, xk1 + xk, f"q A_{k}") * _nz(1 - Ak, f"(1 - A_{k})")
        result = result * num / den * int_pow(P.ak(k).value, -xk)
    return result


def _chain_prefactor(F: FamilyMV):
    P = F.params
    qv, N, s = P.q.value, P.N, P.s
    num = qpoch_multi([qv, qv * P.A(s).value], qv, N)
    den = _dpoch(P.ak(s + 1).value, qv, N, "a_{s+1}") * _dpoch(P.A(s + 1).value, qv, N, "A_{s+1}")
    return num / den


def _weight_qracah(F: FamilyMV, x):
    P = F.params
    qv, a1, bv = P.q.value, P.ak(1).value, P.b.value
    X = _xs(F, x)
    x1 = X[0]
    first = qpoch_multi([a1, bv * qv], qv, x1) / (_dpoch(qv, qv, x1, "q") * _dpoch(a1 / bv, qv, x1, "a_1/b"))
    return _chain_prefactor(F) * first * int_pow(a1 / (bv * qv), x1) * _chain(F, X)


def _weight_dual(F: FamilyMV, x):
    P = F.params
    qv, a1 = P.q.value, P.ak(1).value
    X = _xs(F, x)
    x1 = X[0]
    first = qpoch(a1, qv, x1) / _dpoch(qv, qv, x1, "q") * int_pow(-qv, -x1) * int_pow(qv, -_binom2(x1))
    return _chain_prefactor(F) * first * _chain(F, X)


def _weight_dstar(F: FamilyMV, x):
    P = F.params
    qv, a1 = P.q.value, P.ak(1).value
    X = _xs(F, x)
    x1 = X[0]
    e = _binom2(x1) if F.variant("dstar_weight_sign") == "positive" else -_binom2(x1)
    first = qpoch(a1, qv, x1) / _dpoch(qv, qv, x1, "q") * int_pow(-a1, x1) * int_pow(qv, e)
    return _chain_prefactor(F) * first * _chain(F, X)


def _weight_qhahn(F: FamilyMV, y):
    P = F.params
    qv, N, s = P.q.value, P.N, P.s
    Y = _ys(F, y)
    Ys = Y[s - 1]
    as1 = P.ak(s + 1).value
    qmN = int_pow(qv, -N)
    result = qpoch(qmN, qv, Ys) / _dpoch(qmN / as1, qv, Ys, "q^-N/a_{s+1}") * int_pow(as1, -Ys)
    for k in range(1, s + 1):
        qak = qv * P.ak(k).value
        result = result * qpoch(qak, qv, y[k - 1]) / _dpoch(qv, qv, y[k - 1], "q") * int_pow(qak, -Y[k - 1])
    return result


def _weight_qkrawtchouk(F: FamilyMV, y):
    P = F.params
    qv, N, s = P.q.value, P.N, P.s
    Y = _ys(F, y)
    Ys, y1 = Y[s - 1], y[0]
    as_ = P.ak(s).value
    qmN = int_pow(qv, -N)
    e = _binom2(y1) if F.variant("qkrawtchouk_weight_sign") == "positive" else -_binom2(y1)
    result = qpoch(qmN, qv, Ys) / (_dpoch(qv, qv, y1, "q") * _dpoch(qmN / as_, qv, Ys, "q^-N/a_s"))
    result = result * _sign(y1) * int_pow(qv, e) * int_pow(as_, -Ys)
    for j in range(2, s + 1):
        qa = qv * P.ak(j - 1).value
        result = result * qpoch(qa, qv, y[j - 1]) / _dpoch(qv, qv, y[j - 1], "q") * int_pow(qa, -Y[j - 1])
    return result


def _weight_meixner(F: FamilyMV, x, charlier: bool = False):
    P = F.params
    qv, s = P.q.value, P.s
    xs = x[s - 1]
    a_s = P.ak(s).value
    a_sm1 = P.ak(s - 1).value if s >= 2 else qv / qv
    result = int_pow(qv / (a_sm1 * a_s), xs)
    if not charlier:
        bv = P.beta.value
        result = result * qpoch(bv, qv, xs) / _dpoch(qv * bv / a_s, qv, xs, "q beta/a_s")
    x1 = x[0]
    result = result * _sign(x1) * int_pow(qv, _binom2(x1)) / _dpoch(qv, qv, x1, "q")
    for k in range(1, s):
        d = x[k] - x[k - 1]
        akm1 = P.ak(k - 1).value if k >= 2 else qv / qv
        result = result * qpoch(P.ak(k).value, qv, d) / _dpoch(qv, qv, d, "q") * int_pow(akm1, -x[k - 1])
    return result


def _gamma_shift(z, m: int, backend):
    """Gamma(z + m) from Gamma(z) and a Pochhammer factor."""
    g = gamma(z, backend)
    if m >= 0:
        return g * poch(z, m)
    return g / poch(z + m, -m)


def _weight_racah(F: FamilyMV, x):
    P = F.params
    backend = _float_backend_for(P)
    X = _xs(F, x)
    N, s, a1, eta = P.N, P.s, P.ak(1), P.eta
    G = lambda z: gamma(z, backend)
    result = poch(backend(1), N) * G(P.alpha(s) + N + 1) / (G(P.ak(s + 1) + N) * G(P.alpha(s + 1) + N))
    x1 = X[0]
    result = result * poch(a1, x1) * poch(eta + 1, x1) / _nz(poch(backend(1), x1) * poch(a1 - eta, x1), "(a_1-eta)_x1")
    for k in range(1, s + 1):
        xk, xk1 = X[k - 1], X[k]
        ak1, alk, alk1 = P.ak(k + 1), P.alpha(k), P.alpha(k + 1)
        num = _gamma_shift(ak1, xk1 - xk, backend) * _gamma_shift(alk1, xk1 + xk, backend)
        den = poch(backend(1), xk1 - xk) * _gamma_shift(alk + 1, xk1 + xk, backend)
        result = result * num / den * (alk + 2 * xk) / alk
    return result


def _float_backend_for(P: ParamSetMV) -> FloatBackend:
    b = backend_of(P.a[0])
    if not isinstance(b, FloatBackend):
        raise TypeError("the classical Racah system evaluates in the float backend only")
    return b


def eval_weight_mv(F: FamilyMV, x):
    x = tuple(x)
    if not in_region(F, x):
        return 0
    try:
        return _WEIGHT[F.id](F, x)
    except ZeroDenominatorError as exc:
        raise ZeroDenominatorError(exc.what, exc.index, f"{F.id} weight x={x}") from exc


_WEIGHT = {
    QRACAH_MV: _weight_qracah,
    QRACAH_MV2: _weight_qracah,
    DUAL_QHAHN_MV: _weight_dual,
    DUAL_QHAHN_MV2: _weight_dual,
    DUAL_QHAHN_STAR_MV: _weight_dstar,
    QHAHN_MV: _weight_qhahn,
    QKRAWTCHOUK_MV: _weight_qkrawtchouk,
    QMEIXNER_MV: _weight_meixner,
    QCHARLIER_MV: lambda F, x: _weight_meixner(F, x, charlier=True),
    RACAH_MV: _weight_racah,
}


# --------------------------------------------------------------------------
# norms
# --------------------------------------------------------------------------


def _norm_qracah(F: FamilyMV, n: MultiIndex):
    P = F.params
    qv, N, s = P.q.value, P.N, P.s
    a1, bv = P.ak(1).value, P.b.value
    As, As1 = P.A(s).value, P.A(s + 1).value
    Ns = n.total
    head = qpoch_multi([qv * As, qv * bv * As1 / a1], qv, N)
    head = head / (_dpoch(P.ak(s + 1).value, qv, N, "a_{s+1}") * _dpoch(a1 / bv, qv, N, "a_1/b"))
    head = head * int_pow(a1 / (qv * bv * As), N)
    mid = qpoch_multi(
        [bv * As1 * int_pow(qv, N + 1) / a1, As1 * int_pow(qv, N), bv * int_pow(qv, 1 - N) / a1, int_pow(qv, -N)], qv, Ns
    )
    prod = 1
    for k in range(1, s + 1):
        Nk, Nk1 = n.partial(k), n.partial(k - 1)
        Ak, Ak1 = P.A(k).value, P.A(k + 1).value
        u = bv * Ak1 / a1
        num = qpoch_multi([qv, P.ak(k + 1).value], qv, n[k - 1]) * qpoch(qv * bv * Ak / a1, qv, Nk + Nk1) * (1 - u)
        den = _dpoch(u, qv, Nk + Nk1, "b A_{k+1}/a_1") * _nz(1 - u * int_pow(qv, 2 * Nk), "(1 - b A_{k+1} q^{2N_k}/a_1)")
        prod = prod * num / den
    return head * mid * prod


def _second_family_norm_tail(F: FamilyMV, n: MultiIndex, tail):
    P = F.params
    qv, s = P.q.value, P.s
    As1 = P.A(s + 1).value
    prod = 1
    for k in range(1, s):
        L = tail(k + 1) + tail(k + 2)
        u = As1 / (qv * P.A(k).value)
        num = qpoch_multi([qv, P.ak(k + 1).value], qv, n[k]) * qpoch(As1 / P.A(k + 1).value, qv, L) * (1 - u)
        den = _dpoch(u, qv, L, "A_{s+1}/(q A_k)") * _nz(1 - u * int_pow(qv, 2 * tail(k + 1)), "(1 - A_{s+1} q^{2N*_{k+1}}/(q A_k))")
        prod = prod * num / den
    return prod


def _norm_qracah2(F: FamilyMV, n: MultiIndex):
    P = F.params
    qv, N, s = P.q.value, P.N, P.s
    a1, bv = P.ak(1).value, P.b.value
    As, As1 = P.A(s).value, P.A(s + 1).value
    tail = _tails(F, n)
    T1, T2 = tail(1), tail(2)
    head = qpoch_multi([qv * As, qv * bv * As1 / a1], qv, N)
    head = head / (_dpoch(a1 / bv, qv, N, "a_1/b") * _dpoch(P.ak(s + 1).value, qv, N, "a_{s+1}"))
    head = head * int_pow(a1 / (qv * bv * As), N)
    mid = qpoch_multi(
        [bv * As1 * int_pow(qv, N + 1) / a1, bv * int_pow(qv, 1 - N) / a1, As1 * int_pow(qv, N), int_pow(qv, -N)], qv, T1
    )
    u = bv * As1 / a1
    first = qpoch_multi([qv, qv * bv], qv, n[0]) * qpoch(As1 / a1, qv, T1 + T2) * (1 - u)
    first = first / (_dpoch(u, qv, T1 + T2, "b A_{s+1}/a_1") * _nz(1 - u * int_pow(qv, 2 * T1), "(1 - b A_{s+1} q^{2N*_1}/a_1)"))
    return head * mid * first * _second_family_norm_tail(F, n, tail)


def _norm_dual(F: FamilyMV, n: MultiIndex):
    P = F.params
    qv, N, s = P.q.value, P.N, P.s
    As, As1 = P.A(s).value, P.A(s + 1).value
    head = qpoch(qv * As, qv, N) / _dpoch(P.ak(s + 1).value, qv, N, "a_{s+1}")
    head = head * int_pow(-qv * As, -N) * int_pow(qv, -_binom2(N))
    mid = qpoch_multi([As1 * int_pow(qv, N), int_pow(qv, -N)], qv, n.total)
    prod = 1
    for k in range(1, s + 1):
        prod = prod * qpoch_multi([qv, P.ak(k + 1).value], qv, n[k - 1])
    return head * mid * prod


def _norm_dual2(F: FamilyMV, n: MultiIndex):
    P = F.params
    qv, N, s = P.q.value, P.N, P.s
    As, As1, a1 = P.A(s).value, P.A(s + 1).value, P.ak(1).value
    T1, T2 = n.tail(1), n.tail(2)
    head = qpoch(qv * As, qv, N) / _dpoch(P.ak(s + 1).value, qv, N, "a_{s+1}")
    head = head * int_pow(-qv * As, -N) * int_pow(qv, -_binom2(N))
    mid = qpoch_multi([As1 * int_pow(qv, N), int_pow(qv, -N)], qv, T1) * qpoch(qv, qv, n[0]) * qpoch(As1 / a1, qv, T1 + T2)
    return head * mid * _second_family_norm_tail(F, n, n.tail)


def _norm_dstar(F: FamilyMV, n: MultiIndex):
    P = F.params
    qv, N, s = P.q.value, P.N, P.s
    As, As1 = P.A(s).value, P.A(s + 1).value
    as1 = P.ak(s + 1).value
    Ns = n.total
    limit = F.variant("dstar_norm") == "limit"
    head = qpoch(qv * As, qv, N) / _dpoch(as1, qv, N, "a_{s+1}")
    head = head * int_pow(-as1, N) * int_pow(qv, _binom2(N)) * int_pow(As1, Ns) * int_pow(qv, Ns * (Ns + 1))
    if limit:
        head = head * qpoch_multi([As1 * int_pow(qv, N), int_pow(qv, -N)], qv, Ns)
    prod = 1
    for k in range(1, s + 1):
        Nk, Nk1, nk = n.partial(k), n.partial(k - 1), n[k - 1]
        shift = 2 * Nk1 + 1 if limit else Nk1 + 1
        f = qpoch_multi([qv, P.ak(k + 1).value], qv, nk)
        f = f * int_pow(P.A(k).value * int_pow(qv, shift), -2 * nk) * int_pow(qv, Nk1 - Nk)
        prod = prod * f * int_pow(P.ak(k + 1).value, -Nk - Nk1)
    return head * prod


def _norm_qhahn(F: FamilyMV, n: MultiIndex):
    P = F.params
    qv, N, s = P.q.value, P.N, P.s
    As, As1 = P.A(s).value, P.A(s + 1).value
    Ns = n.total
    head = qpoch(As1 * int_pow(qv, s + 1), qv, N + Ns) * qpoch(int_pow(qv, -N), qv, Ns)
    head = head / _dpoch(qv * P.ak(s + 1).value, qv, N, "q a_{s+1}")
    power = Ns + s if F.variant("qhahn_norm_power") == "printed" else s
    head = head * int_pow(As * int_pow(qv, power), -N) * _sign(Ns) * int_pow(qv, _binom2(Ns))
    prod = 1
    for k in range(1, s + 1):
        Nk, Nk1, nk = n.partial(k), n.partial(k - 1), n[k - 1]
        Ak, Ak1 = P.A(k).value, P.A(k + 1).value
        num = qpoch_multi([qv, qv * P.ak(k + 1).value], qv, nk) * qpoch(Ak * int_pow(qv, k), qv, Nk + Nk1)
        num = num * (1 - Ak1 * int_pow(qv, k))
        den = _dpoch(Ak1 * int_pow(qv, k), qv, Nk + Nk1, "A_{k+1} q^k")
        den = den * _nz(1 - Ak1 * int_pow(qv, k + 2 * Nk), "(1 - A_{k+1} q^{k+2N_k})")
        prod = prod * num / den * int_pow(Ak * int_pow(qv, k + 2 * Nk1), nk)
    return head * prod


def _norm_qkrawtchouk(F: FamilyMV, n: MultiIndex):
    P = F.params
    qv, N, s = P.q.value, P.N, P.s
    Ns = n.total
    As, Asm1 = P.A(s).value, P.A(s - 1).value
    as_ = P.ak(s).value
    hl = N if F.variant("qkrawtchouk_norm_head") == "degree_bound" else Ns
    head = qpoch(int_pow(qv, -N), qv, Ns) / _dpoch(qv * as_, qv, hl, "q a_s")
    head = head * int_pow(Asm1 * int_pow(qv, s + Ns), -N) * int_pow(As * int_pow(qv, s + 1), N + Ns)
    head = head * _sign(N) * int_pow(qv, _binom2(Ns) + _binom2(N + Ns))
    prod = 1
    for j in range(1, s + 1):
        Nj, Nj1, nj = n.partial(j), n.partial(j - 1), n[j - 1]
        f = qpoch_multi([qv, qv * P.ak(j).value], qv, nj)
        f = f * int_pow(P.A(j - 1).value * int_pow(qv, j + 2 * Nj1), -nj)
        prod = prod * f * int_pow(P.ak(j).value, -Nj - Nj1) * int_pow(qv, -2 * Nj)
    return head * prod


def _norm_meixner(F: FamilyMV, n: MultiIndex, charlier: bool = False):
    P = F.params
    qv, s = P.q.value, P.s
    fam._require_float(qv, f"{F.id} norm")
    Ns = n.total
    a_s = P.ak(s).value
    head = qpoch_inf(qv / a_s, qv)
    if not charlier:
        bv = P.beta.value
        head = head / _nz(qpoch_inf(qv * bv / a_s, qv), "(q beta/a_s;q)_inf") * qpoch(bv, qv, Ns)
    head = head * int_pow(qv, Ns * (Ns - 1)) * int_pow(P.A(s).value, Ns)
    prod = 1
    for k in range(1, s + 1):
        Nk, Nk1, nk = n.partial(k), n.partial(k - 1), n[k - 1]
        ak = P.ak(k).value
        prod = prod * qpoch_multi([qv, ak], qv, nk) * int_pow(ak, -Nk - Nk1) * int_pow(qv, Nk1 - Nk)
    return head * prod


def _norm_racah(F: FamilyMV, n: MultiIndex):
    P = F.params
    backend = _float_backend_for(P)
    G = lambda z: gamma(z, backend)
    N, s, a1, eta = P.N, P.s, P.ak(1), P.eta
    Ns = n.total
    al_s, al_s1 = P.alpha(s), P.alpha(s + 1)
    head = al_s1 if F.variant("racah_norm_head") == "next_alpha" else al_s
    result = poch(head + N, Ns) * poch(eta + 1 - a1 - N, Ns) * poch(backend(-N), Ns)
    result = result * G(a1 - eta) * G(al_s + N + 1) * G(al_s1 - a1 + eta + Ns + N + 1)
    result = result / (G(a1) * G(eta + 1) * G(P.ak(s + 1) + N) * G(a1 - eta + N))
    with_eta = F.variant("racah_norm_eta") == "with_eta"
    for k in range(1, s + 1):
        Nk, Nk1, nk = n.partial(k), n.partial(k - 1), n[k - 1]
        alk, alk1 = P.alpha(k), P.alpha(k + 1)
        f = poch(backend(1), nk) * poch(alk1 - a1 + eta + Nk + Nk1, nk) / alk
        g_arg = alk - a1 + Nk + Nk1 + 1 + (eta if with_eta else 0)
        f = f * G(P.ak(k + 1) + nk) * G(g_arg) / G(alk1 - a1 + eta + 2 * Nk + 1)
        result = result * f
    return result


def eval_norm_mv(F: FamilyMV, n):
    n = MultiIndex(n)
    if len(n) != F.s:
        raise ValueError(f"{F.id}: index {tuple(n)} does not have s = {F.s} components")
    try:
        return _NORM[F.id](F, n)
    except ZeroDenominatorError as exc:
        raise ZeroDenominatorError(exc.what, exc.index, f"{F.id} norm n={tuple(n)}") from exc


_NORM = {
    QRACAH_MV: _norm_qracah,
    QRACAH_MV2: _norm_qracah2,
    DUAL_QHAHN_MV: _norm_dual,
    DUAL_QHAHN_MV2: _norm_dual2,
    DUAL_QHAHN_STAR_MV: _norm_dstar,
    QHAHN_MV: _norm_qhahn,
    QKRAWTCHOUK_MV: _norm_qkrawtchouk,
    QMEIXNER_MV: _norm_meixner,
    QCHARLIER_MV: lambda F, n: _norm_meixner(F, n, charlier=True),
    RACAH_MV: _norm_racah,
}


# --------------------------------------------------------------------------
# parameter permutation and validation
# --------------------------------------------------------------------------


def permuted_params(P: ParamSetMV) -> ParamSetMV:
    """Apply a_1 <-> (A_s q^{2N})^-1, a_{k+1} <-> a_{s-k+1}, a_{s+1} <-> bq.

    The map is an involution.  Everything is formed at the root level.
    """
    s, q, N = P.s, P.q, P.N
    a = list(P.a)
    new_a1 = (P.A(s) * q ** (2 * N)).inverse()
    middle = a[1:s][::-1]
    new_as1 = P.b * q
    new_b = a[s] / q
    return replace(P, a=tuple([new_a1] + middle + [new_as1]), b=new_b)


def reflect_point(x: Sequence[int], N: int) -> Tuple[int, ...]:
    """x_k -> N - x_{s-k+1}."""
    return tuple(N - v for v in reversed(tuple(x)))


def chain_points(s: int, top: int):
    """0 <= x_1 <= ... <= x_s <= top, with x_s varying slowest."""
    if s == 0:
        yield ()
        return

    def rec(k, upper, tail):
        if k == 0:
            yield tail
            return
        for v in range(upper + 1):
            yield from rec(k - 1, v, (v,) + tail)

    for xs in range(top + 1):
        yield from rec(s - 1, xs, (xs,))


def composition_points(s: int, total: int):
    """y >= 0 with y_1 + ... + y_s <= total, with y_s varying slowest."""

    def rec(k, budget, tail):
        if k == 0:
            yield tail
            return
        for v in range(budget + 1):
            yield from rec(k - 1, budget - v, (v,) + tail)

    for ys in range(total + 1):
        yield from rec(s - 1, total - ys, (ys,))


def multi_indices(s: int, bound: int):
    """All n in N^s with n_1 + ... + n_s <= bound, lexicographic."""
    out = []

    def rec(prefix, budget):
        if len(prefix) == s:
            out.append(MultiIndex(prefix))
            return
        for v in range(budget + 1):
            rec(prefix + (v,), budget - v)

    rec((), bound)
    return out


def lattice_points(F: FamilyMV, top: Optional[int] = None):
    """The orthogonality lattice of ``F``; ``top`` caps x_s for unbounded families."""
    if F.bounded:
        top = F.params.N
    elif top is None:
        raise ValueError(f"{F.id} has infinite support: a cutoff for x_s is required")
    if F.id in COMPOSITION_FAMILIES:
        return composition_points(F.s, top)
    return chain_points(F.s, top)


def validate_params_mv(F: FamilyMV, degree_bound: Optional[int] = None, top: Optional[int] = None) -> list:
    """Scan every denominator met by ``F`` over its lattice and index range.

    Returns human-readable violations; an empty list means the parameters
    are usable.  Unbounded families need ``degree_bound`` and ``top``
    (defaults 4 and 12).
    """
    if F.bounded:
        degree_bound = F.params.N if degree_bound is None else degree_bound
    else:
        degree_bound = 4 if degree_bound is None else degree_bound
        top = 12 if top is None else top
    indices = multi_indices(F.s, degree_bound)
    points = list(lattice_points(F, top))
    seen = set()
    out = []

    def note(kind, where, exc):
        key = (kind, getattr(exc, "what", str(exc)))
        if key in seen:
            return
        seen.add(key)
        out.append(f"{kind} {where}: {exc}")

    for x in points:
        try:
            eval_weight_mv(F, x)
        except ZeroDivisionError as exc:
            note("weight", f"x={x}", exc)
    for n in indices:
        try:
            lam = eval_norm_mv(F, n)
        except ZeroDivisionError as exc:
            note("norm", f"n={tuple(n)}", exc)
            continue
        if lam == 0:
            note("norm", f"n={tuple(n)}", "squared norm vanishes")
    for n in indices:
        for x in points:
            try:
                eval_poly_mv(F, n, x)
            except ZeroDivisionError as exc:
                note("polynomial", f"n={tuple(n)} x={x}", exc)
    return out
