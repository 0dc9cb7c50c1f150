"""Numerical Jacobi theta machinery in additive coordinates.

All arguments are additive complex numbers: where the multiplicative
variable would be z = e^{2 pi i x}, we pass x itself, and "multiplying
arguments" means adding them.  The basic objects are

    theta(x)            2 q^{1/8} sin(pi x) prod_{n>=1} (1-q^n)(1-q^n z)(1-q^n/z)
    theta_prime_zero    d/dx theta at x = 0
    delta(a, b)         theta'(0)/(2 pi i) * theta(a+b) / (theta(a) theta(b))

with q = e^{2 pi i tau}.  The infinite product is truncated after
``n_terms`` factors, which is safe as long as |q|^n_terms stays below
machine precision (enforced at construction).

The 2 pi i in delta's normalisation converts the additive derivative at 0
into the derivative with respect to the multiplicative variable at 1, so
that delta admits the q-expansion with leading rational term
(1 - 1/XY) / ((1 - 1/X)(1 - 1/Y)).  Equivalently, delta(a, b) =
thn(a+b) / (thn(a) thn(b)) for the rescaled theta ``theta_normalized``
whose multiplicative derivative at 1 is exactly 1; products of elliptic
classes are assembled from ``theta_normalized`` so that expansions like
delta(a, b) -> thn(a+b)/(thn(a) thn(b)) can be cancelled factor by factor.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

TWO_PI = 2.0 * math.pi
_TRUNCATION_FLOOR = 1e-16


class PoleProximity(ArithmeticError):
    """An argument landed too close to a zero of theta for safe division.

    Callers are expected to resample the offending point rather than try
    to recover a value.
    """


@dataclass(frozen=True)
class ModularParams:
    """Modular parameter tau together with the q-product truncation order.

    ``pole_guard`` is the relative threshold below which |theta(x)| is
    treated as a pole of 1/theta: the cutoff is pole_guard * |theta'(0)|.
    """

    tau: complex = 1j
    n_terms: int = 40
    pole_guard: float = 1e-6

    def __post_init__(self):
        if self.tau.imag <= 0:
            raise ValueError(f"tau must satisfy Im(tau) > 0, got {self.tau}")
        if self.n_terms < 1:
            raise ValueError("n_terms must be a positive integer")
        qabs = abs(cmath.exp(2j * math.pi * self.tau))
        if qabs ** self.n_terms >= _TRUNCATION_FLOOR:
            raise ValueError(
                f"|q|^n_terms = {qabs ** self.n_terms:.3e} is not below "
                f"{_TRUNCATION_FLOOR:.0e}; increase n_terms or Im(tau)"
            )

    @cached_property
    def q(self) -> complex:
        return cmath.exp(2j * math.pi * self.tau)

    @cached_property
    def q_eighth(self) -> complex:
        return cmath.exp(2j * math.pi * self.tau / 8.0)

    @cached_property
    def q_powers(self) -> tuple[complex, ...]:
        q = self.q
        out = []
        p = 1.0 + 0j
        for _ in range(self.n_terms):
            p *= q
            out.append(p)
        return tuple(out)

    @cached_property
    def euler_product(self) -> complex:
        """prod_{n=1}^{n_terms} (1 - q^n)."""
        p = 1.0 + 0j
        for qn in self.q_powers:
            p *= 1.0 - qn
        return p

    @cached_property
    def theta_prime_zero(self) -> complex:
        """d theta / dx at x = 0: the sine prefactor carries the only zero."""
        return TWO_PI * self.q_eighth * self.euler_product ** 3

    @cached_property
    def mult_norm(self) -> complex:
        """Derivative of theta with respect to z = e^{2 pi i x} at z = 1."""
        return self.theta_prime_zero / (2j * math.pi)

    @cached_property
    def pole_threshold(self) -> float:
        return self.pole_guard * abs(self.theta_prime_zero)


def theta(x: complex, p: ModularParams) -> complex:
    """Truncated Jacobi theta product at the additive argument x."""
    z = cmath.exp(2j * math.pi * x)
    zinv = 1.0 / z
    prod = 1.0 + 0j
    for qn in p.q_powers:
        prod *= (1.0 - qn) * (1.0 - qn * z) * (1.0 - qn * zinv)
    return 2.0 * p.q_eighth * cmath.sin(math.pi * x) * prod


def theta_prime_zero(p: ModularParams) -> complex:
    """Analytic derivative of the truncated product at 0."""
    return p.theta_prime_zero


def theta_normalized(x: complex, p: ModularParams) -> complex:
    """theta rescaled so its multiplicative derivative at 1 equals 1."""
    return theta(x, p) / p.mult_norm


def delta(a: complex, b: complex, p: ModularParams) -> complex:
    """The two-argument building block of all elliptic classes.

    Raises PoleProximity when a or b sits within the pole guard of a zero
    of theta; the caller must resample.
    """
    ta = theta(a, p)
    tb = theta(b, p)
    floor = p.pole_threshold
    if abs(ta) < floor or abs(tb) < floor:
        raise PoleProximity(
            f"delta argument too close to a theta zero: |theta| = "
            f"{min(abs(ta), abs(tb)):.3e} at ({a}, {b})"
        )
    return p.mult_norm * theta(a + b, p) / (ta * tb)
