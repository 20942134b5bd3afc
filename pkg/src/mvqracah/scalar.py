"""Numeric backends and square-root parameters.

Two interchangeable backends are provided:

* :data:`EXACT` evaluates with :class:`fractions.Fraction` (gcd-reduced,
  positive denominator, exact).
* :func:`float_backend` returns a backend over an isolated mpmath context at
  a fixed binary precision (default 256 bits).  Contexts are private to the
  backend, so no global precision is ever mutated.

All formula code in the package is written once against the arithmetic
operators and works unchanged under either backend.

Every parameter that enters a half-integer power is stored through its
square root (:class:`RootParam`).  Products and quotients of such
parameters are formed at the root level, so expressions like
``(q**N / c) ** (n/2)`` stay rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Union

import mpmath

Scalar = Any  # Fraction for the exact backend, mpmath mpf for the float backend

DEFAULT_PRECISION = 256
MIN_PRECISION = 64


class BackendMismatchError(TypeError):
    """Raised when scalars from different backends are combined."""


class ZeroPowerError(ZeroDivisionError):
    """Raised for zero raised to a negative power."""


class Backend:
    name: str = "abstract"
    exact: bool = False
    precision: Union[int, None] = None

    def __call__(self, value) -> Scalar:
        return self.convert(value)

    def convert(self, value) -> Scalar:
        raise NotImplementedError

    def parse(self, text: str) -> Scalar:
        raise NotImplementedError

    def format(self, value: Scalar) -> str:
        raise NotImplementedError

    def owns(self, value) -> bool:
        raise NotImplementedError

    @property
    def zero(self) -> Scalar:
        return self.convert(0)

    @property
    def one(self) -> Scalar:
        return self.convert(1)


class ExactBackend(Backend):
    name = "exact"
    exact = True

    def convert(self, value) -> Fraction:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, str)):
            return Fraction(value)
        if is_float_scalar(value) or isinstance(value, float):
            raise BackendMismatchError(f"cannot convert inexact value {value!r} to the exact backend")
        return Fraction(value)

    def parse(self, text: str) -> Fraction:
        text = text.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            den_i = int(den)
            if den_i == 0:
                raise ZeroDivisionError(f"zero denominator in rational {text!r}")
            return Fraction(int(num), den_i)
        return Fraction(text)

    def format(self, value: Fraction) -> str:
        return str(value)

    def owns(self, value) -> bool:
        return isinstance(value, (Fraction, int)) and not isinstance(value, bool)

    def __repr__(self):
        return "ExactBackend()"


class FloatBackend(Backend):
    name = "float"
    exact = False

    def __init__(self, precision: int = DEFAULT_PRECISION):
        if precision < MIN_PRECISION:
            raise ValueError(f"float precision must be >= {MIN_PRECISION} bits, got {precision}")
        self.precision = int(precision)
        self.ctx = mpmath.MPContext()
        self.ctx.prec = self.precision

    def convert(self, value):
        ctx = self.ctx
        if isinstance(value, Fraction):
            return ctx.mpf(value.numerator) / value.denominator
        if isinstance(value, str):
            if "/" in value:
                return self.convert(ExactBackend().parse(value))
            return ctx.mpf(value)
        if is_float_scalar(value):
            return ctx.mpf(value)
        return ctx.mpf(value)

    def parse(self, text: str):
        return self.convert(text.strip())

    @property
    def digits(self) -> int:
        return int(self.precision * math.log10(2))

    def format(self, value) -> str:
        return mpmath.nstr(value, self.digits, min_fixed=-4, max_fixed=8, strip_zeros=False)

    def owns(self, value) -> bool:
        return (is_float_scalar(value) or isinstance(value, int)) and not isinstance(value, bool)

    def log_gamma(self, x):
        return log_gamma(x, self)

    def __repr__(self):
        return f"FloatBackend(precision={self.precision})"


EXACT = ExactBackend()


@lru_cache(maxsize=None)
def float_backend(precision: int = DEFAULT_PRECISION) -> FloatBackend:
    return FloatBackend(precision)


def get_backend(name: str, precision: int = DEFAULT_PRECISION) -> Backend:
    if name == "exact":
        return EXACT
    if name == "float":
        return float_backend(precision)
    raise ValueError(f"unknown backend {name!r}")


def backend_of(value) -> Backend:
    if isinstance(value, Fraction):
        return EXACT
    if is_float_scalar(value):
        return float_backend(value.context.prec)
    raise BackendMismatchError(f"{value!r} does not belong to a numeric backend")


def is_float_scalar(value) -> bool:
    return hasattr(value, "_mpf_")


def _same_kind(x, y) -> bool:
    if isinstance(x, int) or isinstance(y, int):
        return True
    return isinstance(x, Fraction) == isinstance(y, Fraction)


def arith(x: Scalar, y: Scalar, op: str) -> Scalar:
    """Checked binary operation, ``op`` in {add, sub, mul, div}."""
    if not _same_kind(x, y):
        raise BackendMismatchError(f"cannot combine {type(x).__name__} with {type(y).__name__}")
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        if y == 0:
            raise ZeroDivisionError("division by zero")
        return x / y
    raise ValueError(f"unknown operation {op!r}")


def int_pow(x: Scalar, k: int) -> Scalar:
    """``x**k`` by binary exponentiation.

    ``0**0`` is 1 (empty product); zero to a negative power raises
    :class:`ZeroPowerError`.
    """
    if k < 0:
        if x == 0:
            raise ZeroPowerError(f"zero raised to negative power {k}")
        return 1 / int_pow(x, -k)
    result = x * 0 + 1
    base = x
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


@dataclass(frozen=True)
class RootParam:
    """A parameter stored as its square root.

    ``root`` may be ``None`` for parameters that never enter a half power
    (for example negative products such as ``-q/a``); such parameters carry
    their ``value`` only, and an odd :meth:`half_pow` on them is an error.
    """

    root: Scalar = None
    _value: Scalar = None

    def __post_init__(self):
        if self.root is None and self._value is None:
            raise ValueError("RootParam needs a root or a value")

    @classmethod
    def of_value(cls, value) -> "RootParam":
        return cls(None, value)

    @property
    def value(self) -> Scalar:
        if self._value is not None:
            return self._value
        return self.root * self.root

    @property
    def has_root(self) -> bool:
        return self.root is not None

    def half_pow(self, k: int) -> Scalar:
        return half_pow(self, k)

    def __mul__(self, other):
        if isinstance(other, RootParam):
            if self.has_root and other.has_root:
                return RootParam(self.root * other.root)
            return RootParam.of_value(self.value * other.value)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, RootParam):
            if self.has_root and other.has_root:
                return RootParam(self.root / other.root)
            return RootParam.of_value(self.value / other.value)
        return NotImplemented

    def __pow__(self, k: int):
        if self.has_root:
            return RootParam(int_pow(self.root, k))
        return RootParam.of_value(int_pow(self.value, k))

    def inverse(self) -> "RootParam":
        return self ** -1

    def negated(self) -> "RootParam":
        return RootParam.of_value(-self.value)

    def __repr__(self):
        if self.has_root:
            return f"RootParam(root={self.root})"
        return f"RootParam(value={self.value})"


def half_pow(p: RootParam, k: int) -> Scalar:
    """``value(p) ** (k/2)``, computed as ``root ** k``."""
    if k % 2 == 0:
        if p.has_root:
            return int_pow(p.root, k)
        return int_pow(p.value, k // 2)
    if not p.has_root:
        raise ValueError(f"odd half power {k}/2 of a parameter with no stored root ({p!r})")
    return int_pow(p.root, k)


def log_gamma(x, backend: FloatBackend):
    """``ln|Gamma(x)|`` at the backend precision (mpmath ``loggamma``).

    For ``x > 0`` this is ``ln Gamma(x)``.  Poles raise ``ValueError``.
    """
    if not isinstance(backend, FloatBackend):
        raise BackendMismatchError("log_gamma needs the float backend")
    ctx = backend.ctx
    x = backend.convert(x)
    if x <= 0 and x == ctx.floor(x):
        raise ValueError(f"Gamma has a pole at {x}")
    return ctx.re(ctx.loggamma(x))


def gamma_sign(x, backend: FloatBackend) -> int:
    x = backend.convert(x)
    if x > 0:
        return 1
    ctx = backend.ctx
    return -1 if int(ctx.floor(-x)) % 2 == 0 else 1


def gamma(x, backend: FloatBackend):
    """Signed Gamma function assembled from :func:`log_gamma`."""
    return gamma_sign(x, backend) * backend.ctx.exp(log_gamma(x, backend))
