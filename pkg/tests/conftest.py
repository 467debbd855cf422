from fractions import Fraction

import pytest

from halfosc.euler import EulerSpec
from halfosc.model import validate_spec

EX31 = {
    "r1": {"kind": "powerlaw", "coef": 1.0, "exp": 4.0},
    "r2": {"kind": "powerlaw", "coef": 1.0, "exp": 3.0},
    "q": {"kind": "powerlaw", "coef": 1.0, "exp": 6.0},
    "sigma": {"kind": "proportional", "delta": 2.0},
    "alpha": "5/3", "beta": "1/7", "gamma": "9/5", "t0": 1.0,
}


def one_third(m=2.0, n=1.0, delta=2.0, q0=1.0):
    """r1 = t^m, r2 = t^n, alpha = 1, beta = gamma = 1/3, q = q0 t^(m/3 + n - 5/3)."""
    return EulerSpec.one_third_family(m, n, delta, q0)


def random_euler(rng, exact=True):
    """Random noncanonical Euler spec.  With ``exact`` the reciprocals of alpha
    and beta are integers, so every kernel has a finite closed form."""
    if exact:
        a, b = rng.choice(["1", "1/3", "1/5"]), rng.choice(["1", "1/3", "1/5", "1/7"])
    else:
        a, b = rng.choice(["5/3", "3", "7/5"]), rng.choice(["3/5", "7/5", "3"])
    g = rng.choice(["1/3", "1", "5/3"])
    fa, fb = float(Fraction(a)), float(Fraction(b))
    return EulerSpec(m=fa * rng.uniform(1.2, 3.5), n=fb * rng.uniform(1.2, 3.5), p=rng.uniform(-0.9, 3.0),
                     q0=rng.uniform(0.3, 3.0), delta=rng.uniform(1.1, 3.0), alpha=a, beta=b, gamma=g)


@pytest.fixture
def ex31_raw():
    return dict(EX31)


@pytest.fixture
def ex31():
    return validate_spec(EX31)


@pytest.fixture
def ex32():
    return one_third().to_spec()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(k for k in lines if k.isdigit()):
        terminalreporter.write_line(lines[key])
