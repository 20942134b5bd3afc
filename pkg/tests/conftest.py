from fractions import Fraction

import pytest

from mvqracah import multivar as mv
from mvqracah.scalar import EXACT, RootParam, float_backend


def rp(text, backend=EXACT):
    """RootParam whose root is the rational ``text``."""
    return RootParam(backend.convert(Fraction(text)))


def qracah_params(roots=("1/3", "1/5", "1/7"), b="1/11", q="1/2", N=3, backend=EXACT):
    return mv.ParamSetMV(
        s=len(roots) - 1, a=tuple(rp(r, backend) for r in roots), q=rp(q, backend), b=rp(b, backend), N=N
    )


def meixner_params(backend, a_roots=("9/2", "11/3"), beta="1/3", q="1/2"):
    """q given by value (its root is irrational), so float only."""
    qroot = RootParam(backend.ctx.sqrt(backend.convert(Fraction(q))))
    return mv.ParamSetMV(s=len(a_roots), a=tuple(rp(r, backend) for r in a_roots), q=qroot, beta=rp(beta, backend))


@pytest.fixture(scope="session")
def fb():
    return float_backend(256)
