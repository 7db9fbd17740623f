import itertools
import sys

import mpmath
import pytest

from efxchores.instances import (
    build_coverage_20_19,
    build_cs24,
    build_four_level_compressed,
    build_four_level_ordinal,
    build_warmup_compressed,
)


@pytest.fixture(scope="session")
def ordinal():
    return build_four_level_ordinal()


@pytest.fixture(scope="session")
def compressed():
    return build_four_level_compressed()


@pytest.fixture(scope="session")
def coverage():
    return build_coverage_20_19()


@pytest.fixture(scope="session")
def warmup():
    return build_warmup_compressed()


@pytest.fixture(scope="session")
def cs24():
    return build_cs24(3)


def to_mpf(value):
    """High-precision float image of an ExactValue; test oracle only."""
    m, e = value.mantissa, value.exponent
    return mpmath.mpf(m.numerator) / m.denominator * mpmath.power(2, mpmath.mpf(e.numerator) / e.denominator)


def brute_critical(profile, word):
    """Direct scan of every (i, e, j) triple, evaluated in 300-bit floats."""
    n, m = profile.n, profile.m
    X = [sum(1 << k for k in range(m) if word[k] == a) for a in range(n)]
    best = mpmath.mpf(1)
    with mpmath.workprec(300):
        for i, f in enumerate(profile.agents):
            for e in range(m):
                if not X[i] >> e & 1:
                    continue
                for j in range(n):
                    if j == i:
                        continue
                    r, v = to_mpf(f.table[X[i] ^ (1 << e)]), to_mpf(f.table[X[j]])
                    ratio = (mpmath.inf if r > 0 else mpmath.mpf(1)) if v == 0 else r / v
                    best = max(best, ratio)
    return best


def all_words(n, m):
    return itertools.product(range(n), repeat=m)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title = results[number]
        terminalreporter.write_line(f"{status} criterion {number:2d}: {title}")
