"""Theta, delta and their quasi-periodicity/truncation guarantees."""

import cmath
import math
from random import Random

import pytest

from ellink.theta import (
    ModularParams,
    PoleProximity,
    delta,
    theta,
    theta_normalized,
    theta_prime_zero,
)

P = ModularParams()


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def draw(rng):
    return complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))


def test_theta_vanishes_at_zero():
    assert theta(0.0, P) == 0


def test_quasi_periodicity_at_spec_point():
    x = 0.31 + 0.07j
    assert rel(theta(x + 1, P), -theta(x, P)) < 1e-10
    factor = -cmath.exp(-1j * math.pi * P.tau) * cmath.exp(-2j * math.pi * x)
    assert rel(theta(x + P.tau, P), factor * theta(x, P)) < 1e-10


def test_quasi_periodicity_random():
    rng = Random(11)
    for _ in range(100):
        x = draw(rng)
        assert rel(theta(x + 1, P), -theta(x, P)) < 1e-10
        factor = -cmath.exp(-1j * math.pi * P.tau) * cmath.exp(-2j * math.pi * x)
        assert rel(theta(x + P.tau, P), factor * theta(x, P)) < 1e-10


@pytest.mark.parametrize("tau", [1j, 2j])
def test_theta_prime_zero_vs_finite_difference(tau):
    p = ModularParams(tau=tau)
    step = 1e-5
    fd = (theta(step, p) - theta(-step, p)) / (2 * step)
    assert rel(theta_prime_zero(p), fd) < 1e-6


def test_theta_prime_zero_nonzero():
    assert abs(theta_prime_zero(P)) > 0.1


def test_delta_symmetry_and_antisymmetry():
    rng = Random(12)
    for _ in range(100):
        a, b = draw(rng), draw(rng)
        assert rel(delta(a, b, P), delta(b, a, P)) < 1e-10
        assert rel(delta(-a, -b, P), -delta(a, b, P)) < 1e-10


def test_delta_quasi_periodicity():
    """Shifting the first argument by 1 is invisible; shifting by tau
    multiplies by e^{-2 pi i b}."""
    rng = Random(16)
    for _ in range(50):
        a, b = draw(rng), draw(rng)
        assert rel(delta(a + 1, b, P), delta(a, b, P)) < 1e-10
        factor = cmath.exp(-2j * math.pi * b)
        assert rel(delta(a + P.tau, b, P), factor * delta(a, b, P)) < 1e-10


def test_delta_q0_limit():
    """At Im tau = 6 the q-corrections sit below machine precision, so
    delta must agree with the leading rational coefficient of its
    q-expansion."""
    p6 = ModularParams(tau=6j)
    rng = Random(13)
    for _ in range(25):
        a, b = draw(rng), draw(rng)
        X = cmath.exp(2j * math.pi * a)
        Y = cmath.exp(2j * math.pi * b)
        rational = (1 - 1 / (X * Y)) / ((1 - 1 / X) * (1 - 1 / Y))
        assert rel(delta(a, b, p6), rational) < 1e-10


def test_truncation_stability():
    p80 = ModularParams(n_terms=80)
    rng = Random(14)
    for _ in range(50):
        x = draw(rng)
        assert rel(theta(x, P), theta(x, p80)) < 1e-14
        a, b = draw(rng), draw(rng)
        assert rel(delta(a, b, P), delta(a, b, p80)) < 1e-14
    # still stable across the strip |Im x| <= 2 Im tau
    for im in (-1.9, -1.0, 1.0, 1.9):
        x = complex(rng.uniform(-0.4, 0.4), im)
        assert rel(theta(x, P), theta(x, p80)) < 1e-14


def test_normalized_theta_expansion_of_delta():
    rng = Random(15)
    for _ in range(20):
        a, b = draw(rng), draw(rng)
        expanded = theta_normalized(a + b, P) / (
            theta_normalized(a, P) * theta_normalized(b, P)
        )
        assert rel(delta(a, b, P), expanded) < 1e-13


def test_pole_guard():
    with pytest.raises(PoleProximity):
        delta(1e-9, 0.2 + 0.1j, P)
    with pytest.raises(PoleProximity):
        delta(0.2 + 0.1j, 1.0 + 1e-10, P)


def test_params_validation():
    with pytest.raises(ValueError):
        ModularParams(tau=1.0 + 0j)
    with pytest.raises(ValueError):
        ModularParams(tau=-0.5j)
    with pytest.raises(ValueError):
        ModularParams(n_terms=0)
    # truncation guard: |q|^n_terms must be negligible
    with pytest.raises(ValueError):
        ModularParams(tau=0.05j, n_terms=40)
