"""q-Pochhammer symbols and terminating basic hypergeometric series."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .scalar import FloatBackend, Scalar, backend_of, int_pow


class ZeroDenominatorError(ZeroDivisionError):
    """A denominator factor vanished during evaluation.

    ``what`` names the offending factor, ``index`` the summation index (or
    Pochhammer length) at which it vanished.
    """

    def __init__(self, what: str, index=None, context: str = ""):
        self.what = what
        self.index = index
        self.context = context
        msg = f"vanishing denominator {what}"
        if index is not None:
            msg += f" at index {index}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


def qpoch(a: Scalar, q: Scalar, n: int) -> Scalar:
    """(a;q)_n = prod_{k<n} (1 - a q^k); equals 1 for n == 0."""
    if n < 0:
        raise ValueError(f"qpoch needs n >= 0, got {n}")
    result = a * 0 + 1
    t = a
    for _ in range(n):
        result = result * (1 - t)
        t = t * q
    return result


def qpoch_multi(params: Sequence[Scalar], q: Scalar, n: int) -> Scalar:
    result = 1
    for a in params:
        result = result * qpoch(a, q, n)
    return result


def qpoch_inf(a, q, tol=None):
    """(a;q)_infinity in the float backend.

    Factors are multiplied until ``|a q^k| < tol*(1-|q|)``; the neglected
    tail then changes the product by a relative amount of at most about
    ``tol``.  ``tol`` defaults to ``2**-(P+8)``.
    """
    if isinstance(q, FloatBackend):
        raise TypeError("pass scalars, not a backend")
    try:
        backend = backend_of(q)
    except TypeError:
        backend = backend_of(a)
    if not isinstance(backend, FloatBackend):
        raise TypeError("qpoch_inf is only available in the float backend")
    ctx = backend.ctx
    a = backend.convert(a)
    q = backend.convert(q)
    if abs(q) >= 1:
        raise ValueError(f"qpoch_inf needs |q| < 1, got {q}")
    if tol is None:
        tol = ctx.mpf(2) ** -(backend.precision + 8)
    else:
        tol = backend.convert(tol)
    bound = tol * (1 - abs(q))
    result = ctx.mpf(1)
    t = a
    while abs(t) >= bound:
        result *= 1 - t
        t *= q
    return result


def _binom2(k: int) -> int:
    return k * (k - 1) // 2


@dataclass
class PhiSpec:
    """A terminating series  r+1 phi r (upper; lower; q, z)  with n+1 terms."""

    upper: list
    lower: list
    q: Scalar
    z: Scalar
    n: int
    label: str = field(default="phi", compare=False)

    def validate(self) -> None:
        q = self.q
        target = int_pow(q, -self.n)
        if not any(_close(u, target) for u in self.upper):
            raise ValueError(f"{self.label}: no upper parameter equals q^-{self.n}")
        for j, low in enumerate(self.lower):
            t = low
            for k in range(self.n):
                if t == 1:
                    raise ZeroDenominatorError(f"lower parameter #{j} ({low})", k, self.label)
                t = t * q


def _close(u, v) -> bool:
    if u == v:
        return True
    try:
        backend = backend_of(v)
    except TypeError:
        return False
    if isinstance(backend, FloatBackend):
        scale = max(abs(u), abs(v), 1)
        return abs(u - v) <= scale * backend.ctx.mpf(2) ** -(backend.precision // 2)
    return False


def _extra_factor(k: int, q, r: int, s: int):
    # ((-1)^k q^{k(k-1)/2})^{1+s-r} for an r phi s series
    e = 1 + s - r
    if e == 0:
        return 1
    sign = -1 if (k * e) % 2 else 1
    return sign * int_pow(q, _binom2(k) * e)


def phi_terminating(spec: PhiSpec, validate: bool = True) -> Scalar:
    """Sum a terminating basic hypergeometric series by its term ratio."""
    if validate:
        spec.validate()
    q, z, n = spec.q, spec.z, spec.n
    r, s = len(spec.upper), len(spec.lower)
    uppers = list(spec.upper)
    lowers = list(spec.lower)
    qk = q * 0 + 1
    term = qk
    total = term
    for k in range(n):
        num = 1
        for u in uppers:
            num = num * (1 - u * qk)
        if num == 0:
            break
        den = 1 - q * qk
        for j, low in enumerate(lowers):
            f = 1 - low * qk
            if f == 0:
                raise ZeroDenominatorError(f"lower parameter #{j} ({low})", k, spec.label)
            den = den * f
        term = term * num * z / den
        if r != s + 1:
            # ratio of the extra factor between k+1 and k
            e = 1 + s - r
            term = term * int_pow(-int_pow(q, k), e)
        qk = qk * q
        total = total + term
    return total


def phi_naive(spec: PhiSpec) -> Scalar:
    """Reference summation computing every term from Pochhammer symbols."""
    q, z, n = spec.q, spec.z, spec.n
    r, s = len(spec.upper), len(spec.lower)
    total = 0
    for k in range(n + 1):
        num = qpoch_multi(spec.upper, q, k)
        den = qpoch_multi(list(spec.lower) + [q], q, k)
        if den == 0:
            raise ZeroDenominatorError("lower Pochhammer product", k, spec.label)
        total = total + num / den * int_pow(z, k) * _extra_factor(k, q, r, s)
    return total


def phi_scaled(upper: Sequence, lower: Sequence, q, z, n: int) -> Scalar:
    """(lower_1, ..., lower_s; q)_n times a terminating r+1 phi r series.

    The lower Pochhammers are absorbed into the terms,

        sum_k (upper;q)_k / (q;q)_k z^k  prod_j (lower_j q^k; q)_{n-k},

    so the result is a polynomial in every parameter and never divides by a
    lower-parameter factor.  This is the form in which all the polynomial
    families of the package are evaluated; it agrees with
    ``qpoch_multi(lower, q, n) * phi_terminating(...)`` whenever the latter
    is defined.  ``len(upper) == len(lower) + 1`` is assumed.
    """
    one = q * 0 + 1
    # backward products B_k = prod_j (lower_j q^k; q)_{n-k}, built from k = n down
    qn = int_pow(q, n)
    back = [one] * (n + 1)
    qk = qn
    acc = one
    for k in range(n - 1, -1, -1):
        qk = qk / q
        acc_factor = one
        for low in lower:
            acc_factor = acc_factor * (1 - low * qk)
        acc = acc * acc_factor
        back[k] = acc
    total = back[0]
    term = one
    qk = one
    for k in range(n):
        num = one
        for u in upper:
            num = num * (1 - u * qk)
        if num == 0:
            break
        term = term * num * z / (1 - q * qk)
        qk = qk * q
        total = total + term * back[k + 1]
    return total


def poch(a, n: int):
    """Rising factorial (a)_n."""
    result = a * 0 + 1
    for k in range(n):
        result = result * (a + k)
    return result


def hyp_scaled(upper: Sequence, lower: Sequence, n: int):
    """(lower_1, ..., lower_s)_n times a terminating r+1 F r series at 1.

    Ordinary (q = 1) counterpart of :func:`phi_scaled`.
    """
    one = upper[0] * 0 + 1
    back = [one] * (n + 1)
    acc = one
    for k in range(n - 1, -1, -1):
        f = one
        for low in lower:
            f = f * (low + k)
        acc = acc * f
        back[k] = acc
    total = back[0]
    term = one
    for k in range(n):
        num = one
        for u in upper:
            num = num * (u + k)
        if num == 0:
            break
        term = term * num / (k + 1)
        total = total + term * back[k + 1]
    return total
