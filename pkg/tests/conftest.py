"""Shared fixtures."""
from __future__ import annotations

import pytest

from dioapprox.additive import builtin
from dioapprox.const import BUILTIN_SIGMA_LOG, BUILTIN_TOTIENT_LOG, CONF_SEED
from dioapprox.pyarith import Arithmetic


@pytest.fixture
def arith():
    return Arithmetic({CONF_SEED: 7})


@pytest.fixture
def totient_log():
    return builtin(BUILTIN_TOTIENT_LOG)


@pytest.fixture
def sigma_log():
    return builtin(BUILTIN_SIGMA_LOG)


def brute_factor(n: int) -> list:
    """(p, v) pairs by plain trial division."""
    factors = []
    p = 2
    while p * p <= n:
        v = 0
        while n % p == 0:
            n //= p
            v += 1
        if v:
            factors.append((p, v))
        p += 1
    if n > 1:
        factors.append((n, 1))
    return factors
