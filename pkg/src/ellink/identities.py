"""Numerical verification of the delta-function and operator identities.

Every check draws its own seeded sample stream, evaluates both sides of an
identity at random points (resampling whole points that land on poles), and
reports the maximal relative residual |LHS - RHS| / max(|LHS|, |RHS|, 1e-30)
against a tolerance.  Checks are independent and deterministic for a fixed
seed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from random import Random
from typing import Callable

from .efun import (
    EFun,
    demazure,
    demazure_diamond,
    ell_class,
    ell_class_from_presentation,
    ell_min,
    evaluate,
    mu_permuted,
    random_point,
    sample_agreement,
)
from .linkpattern import (
    act_nodes,
    all_minimal_presentations,
    minimal_pattern,
    nu_list,
    orbit_lattice,
    transposition,
)
from .theta import ModularParams, PoleProximity, delta, theta
from .typecalc import VarSpace

RESIDUAL_FLOOR = 1e-30
RESAMPLE_CAP = 100


@dataclass(frozen=True)
class IdentityReport:
    name: str
    samples: int
    max_relative_residual: float
    tolerance: float
    passed: bool
    resamples: int = 0

    @staticmethod
    def make(name, samples, residual, tol, resamples=0) -> "IdentityReport":
        return IdentityReport(
            name=name,
            samples=samples,
            max_relative_residual=residual,
            tolerance=tol,
            passed=residual < tol,
            resamples=resamples,
        )

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "max_relative_residual": self.max_relative_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "resamples": self.resamples,
        }


def _rel(lhs: complex, rhs: complex) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), RESIDUAL_FLOOR)


def _draw(rng: Random) -> complex:
    return complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))


def _max_residual_over_samples(
    fn: Callable[[Random], float], samples: int, seed: int
) -> tuple[float, int]:
    """Run fn per sample, resampling on PoleProximity, and track the worst."""
    rng = Random(seed)
    worst = 0.0
    resamples = 0
    for _ in range(samples):
        for _ in range(RESAMPLE_CAP + 1):
            try:
                worst = max(worst, fn(rng))
                break
            except PoleProximity:
                resamples += 1
        else:
            raise PoleProximity(f"no pole-free sample found in {RESAMPLE_CAP} draws")
    return worst, resamples


# --------------------------------------------------------------------------
# direct delta-level identities


def check_fourterm(
    samples: int = 100,
    tol: float = 1e-8,
    params: ModularParams = ModularParams(),
    seed: int = 0,
) -> IdentityReport:
    """The four-term delta identity underlying the braid relation."""

    def one(rng: Random) -> float:
        x1, x2, x3, m1, m2, m3, h = (_draw(rng) for _ in range(7))
        d = lambda a, b: delta(a, b, params)
        lhs = d(x1 - x2, h) * d(x2 - x1, h) * d(x3 - x1, m3 - m1) + d(
            x2 - x1, m2 - m1
        ) * d(x2 - x1, m3 - m2) * d(x3 - x2, m3 - m1)
        rhs = d(x2 - x3, h) * d(x3 - x2, h) * d(x3 - x1, m3 - m1) + d(
            x2 - x1, m3 - m1
        ) * d(x3 - x2, m2 - m1) * d(x3 - x2, m3 - m2)
        return _rel(lhs, rhs)

    worst, resamples = _max_residual_over_samples(one, samples, seed)
    return IdentityReport.make("fourterm", samples, worst, tol, resamples)


def check_braid_coefficients(
    samples: int = 100,
    tol: float = 1e-8,
    params: ModularParams = ModularParams(),
    seed: int = 0,
) -> IdentityReport:
    """The two three-term coefficient identities from the braid proof,
    plus the antisymmetry-driven coefficient of the quadratic proof."""

    def one(rng: Random) -> float:
        x1, x2, x3, m1, m2, m3, h, mu = (_draw(rng) for _ in range(8))
        d = lambda a, b: delta(a, b, params)
        # coefficient of f(x1, x3, x2)
        a = d(x2 - x1, m3 - m2) * d(x3 - x1, m2 - m1)
        b = d(x2 - x3, m3 - m2) * d(x3 - x1, m3 - m1)
        c = d(x2 - x1, m3 - m1) * d(x3 - x2, m2 - m1)
        r1 = abs(a - b - c) / max(abs(a), abs(b), abs(c), RESIDUAL_FLOOR)
        # coefficient of f(x2, x1, x3)
        e = d(x1 - x2, m2 - m1) * d(x3 - x1, m3 - m1)
        f = d(x2 - x1, m3 - m2) * d(x3 - x2, m3 - m1)
        g = d(x3 - x1, m3 - m2) * d(x3 - x2, m2 - m1)
        r2 = abs(e + f - g) / max(abs(e), abs(f), abs(g), RESIDUAL_FLOOR)
        # coefficient of f(x2, x1) in the quadratic proof: antisymmetry
        a1 = d(x1 - x2, mu)
        a2 = d(x2 - x1, -mu)
        r3 = abs(a1 + a2) / max(abs(a1), abs(a2), RESIDUAL_FLOOR)
        return max(r1, r2, r3)

    worst, resamples = _max_residual_over_samples(one, samples, seed)
    return IdentityReport.make("braid_coefficients", samples, worst, tol, resamples)


def monstrous_sides(
    x1, x2, y1, y2, m1, m2, h, params: ModularParams
) -> tuple[complex, complex]:
    """Both sides of the twelve-theta-factor relation, straight from theta."""
    t = lambda a: theta(a, params)
    lhs = t(y2 - y1) * (
        t(h) * t(m2 + x2 - m1 - x1) * t(x2 - y1) * t(h + x1 - y2)
        * t(m1 + x2 - y2) * t(m2 + x1 - y1)
        - t(m2 - m1) * t(h + x1 - x2) * t(x1 - y1) * t(h + x2 - y2)
        * t(m1 + x1 - y2) * t(m2 + x2 - y1)
    )
    rhs = t(x2 - x1) * (
        t(h) * t(x2 - y1) * t(m2 + y2 - m1 - y1) * t(h + x1 - y2)
        * t(m1 + x1 - y1) * t(m2 + x2 - y2)
        - t(m2 - m1) * t(h + y1 - y2) * t(x2 - y2) * t(h + x1 - y1)
        * t(m1 + x1 - y2) * t(m2 + x2 - y1)
    )
    return lhs, rhs


def check_monstrous(
    samples: int = 100,
    tol: float = 1e-8,
    params: ModularParams = ModularParams(),
    seed: int = 0,
) -> IdentityReport:
    """The denominator-cleared form of the basic flip identity."""

    def one(rng: Random) -> float:
        args = [_draw(rng) for _ in range(7)]
        lhs, rhs = monstrous_sides(*args, params)
        return _rel(lhs, rhs)

    worst, resamples = _max_residual_over_samples(one, samples, seed)
    return IdentityReport.make("monstrous", samples, worst, tol, resamples)


# --------------------------------------------------------------------------
# operator-level identities (closure-based; parameters need not be admissible)


def _num_demazure(i: int, mu: complex, h: complex, params: ModularParams, f):
    """Numeric operator on functions of an x-tuple; i is 1-based."""

    def g(xs):
        ys = list(xs)
        ys[i - 1], ys[i] = ys[i], ys[i - 1]
        return delta(xs[i] - xs[i - 1], mu, params) * f(xs) + delta(
            xs[i - 1] - xs[i], h, params
        ) * f(tuple(ys))

    return g


def check_braid_operator(
    samples: int = 100,
    tol: float = 1e-8,
    params: ModularParams = ModularParams(),
    seed: int = 0,
) -> IdentityReport:
    """Twisted braid relation as an operator statement on a generic pure
    three-variable test function, with random characters."""

    def one(rng: Random) -> float:
        mu, nu, h, c1, c2, c3 = (_draw(rng) for _ in range(6))

        def f(xs):
            return (
                delta(xs[0] - xs[1], c1, params)
                * delta(xs[1] - xs[2], c2, params)
                * theta(xs[0] + 2 * xs[1] + 3 * xs[2] + c3, params)
            )

        op = lambda i, m, g: _num_demazure(i, m, h, params, g)
        lhs = op(1, nu, op(2, mu + nu, op(1, mu, f)))
        rhs = op(2, mu, op(1, mu + nu, op(2, nu, f)))
        xs = (_draw(rng), _draw(rng), _draw(rng))
        return _rel(lhs(xs), rhs(xs))

    worst, resamples = _max_residual_over_samples(one, samples, seed)
    return IdentityReport.make("braid_operator", samples, worst, tol, resamples)


def check_quadratic_operator(
    samples: int = 100,
    tol: float = 1e-8,
    params: ModularParams = ModularParams(),
    seed: int = 0,
) -> IdentityReport:
    """c_i^mu c_i^{1/mu} = delta(h, mu) delta(h, 1/mu) id, m = 2."""

    def one(rng: Random) -> float:
        mu, h, c1, c2 = (_draw(rng) for _ in range(4))

        def f(xs):
            return delta(xs[0] - xs[1], c1, params) * theta(
                xs[0] + 2 * xs[1] + c2, params
            )

        op = lambda m, g: _num_demazure(1, m, h, params, g)
        lhs = op(mu, op(-mu, f))
        xs = (_draw(rng), _draw(rng))
        rv = delta(h, mu, params) * delta(h, -mu, params) * f(xs)
        return _rel(lhs(xs), rv)

    worst, resamples = _max_residual_over_samples(one, samples, seed)
    return IdentityReport.make("quadratic_operator", samples, worst, tol, resamples)


# --------------------------------------------------------------------------
# class-level identities


def flip_sides(m: int, r: int, k: int, space: VarSpace | None = None) -> tuple[EFun, EFun]:
    """Both sides of the flip relation on the minimal class.

    LHS applies the operator at the target block, RHS at the source block
    with the labels of the result exchanged; purity forces the parameters
    mu_k/mu_{k+1} on the left and mu_{k+1}/mu_k inside the right.
    """
    if not 1 <= k < r:
        raise ValueError(f"flip index k={k} outside 1..{r - 1}")
    if space is None:
        space = VarSpace(m, r)
    ell = ell_min(m, r, space)
    lhs = demazure(k, space.mu(k) - space.mu(k + 1), ell)
    rhs = mu_permuted(
        transposition(r, k),
        demazure(m - r + k, space.mu(k + 1) - space.mu(k), ell),
    )
    return lhs, rhs


def check_flip(
    m: int,
    r: int,
    k: int,
    samples: int = 50,
    tol: float = 1e-8,
    params: ModularParams = ModularParams(),
    seed: int = 0,
) -> IdentityReport:
    lhs, rhs = flip_sides(m, r, k)
    if lhs.qtype != rhs.qtype:
        raise AssertionError("flip sides carry different types")
    worst, resamples = sample_agreement([lhs, rhs], params, Random(seed), samples)
    return IdentityReport.make(f"flip_{m}_{r}_{k}", samples, worst, tol, resamples)


_NUMERIC_PRESENTATION_CAP = 12


def check_word_independence(
    m: int,
    r: int,
    tol: float = 1e-8,
    samples: int = 50,
    params: ModularParams = ModularParams(),
    seed: int = 0,
) -> IdentityReport:
    """All patterns of one lattice: every minimal presentation must give the
    same parameter multiset exactly and the same class numerically."""
    lattice = orbit_lattice(m, r)
    space = VarSpace(m, r)
    rng = Random(seed)
    worst = 0.0
    resamples = 0
    total_points = 0
    for pattern in lattice.patterns():
        presentations = all_minimal_presentations(pattern)
        multisets = {
            tuple(sorted(str(nu) for nu in nu_list(pres))) for pres in presentations
        }
        if len(multisets) != 1:
            return IdentityReport.make(
                f"word_independence_{m}_{r}", total_points, math.inf, tol, resamples
            )
        if len(presentations) == 1:
            continue
        chosen = presentations[:_NUMERIC_PRESENTATION_CAP]
        classes = [ell_class_from_presentation(pres, space) for pres in chosen]
        if any(c.qtype != classes[0].qtype for c in classes):
            return IdentityReport.make(
                f"word_independence_{m}_{r}", total_points, math.inf, tol, resamples
            )
        w, rs = sample_agreement(classes, params, rng, samples)
        worst = max(worst, w)
        resamples += rs
        total_points += samples
    return IdentityReport.make(
        f"word_independence_{m}_{r}", total_points, worst, tol, resamples
    )


# --------------------------------------------------------------------------
# theta-law plumbing (exposed through the verify CLI)


def check_theta_laws(
    samples: int = 100,
    tol: float = 1e-10,
    params: ModularParams = ModularParams(),
    seed: int = 0,
) -> IdentityReport:
    """Quasi-periodicity in both lattice directions plus delta symmetry
    and antisymmetry."""
    qhalf = cmath.exp(1j * math.pi * params.tau)

    def one(rng: Random) -> float:
        x = _draw(rng)
        a, b = _draw(rng), _draw(rng)
        tx = theta(x, params)
        r1 = _rel(theta(x + 1, params), -tx)
        r2 = _rel(
            theta(x + params.tau, params),
            -cmath.exp(-2j * math.pi * x) / qhalf * tx,
        )
        r3 = _rel(delta(a, b, params), delta(b, a, params))
        r4 = _rel(delta(-a, -b, params), -delta(a, b, params))
        return max(r1, r2, r3, r4)

    worst, resamples = _max_residual_over_samples(one, samples, seed)
    return IdentityReport.make("theta_laws", samples, worst, tol, resamples)


def check_vanishing(
    samples: int = 20,
    tol: float = 1e-10,
    params: ModularParams = ModularParams(),
    seed: int = 0,
) -> IdentityReport:
    """The loose-loose operator annihilates the minimal (8, 2) class, and
    the conjugated version annihilates the permuted pattern."""
    space = VarSpace(8, 2)
    zero1 = demazure_diamond(3, ell_min(8, 2, space))
    w = (3, 6, 1, 2, 5, 8, 4, 7)
    permuted = act_nodes(w, minimal_pattern(8, 2))
    zero2 = demazure_diamond(1, ell_class(permuted, space))

    rng = Random(seed)
    worst = 0.0
    resamples = 0
    for zero in (zero1, zero2):
        # scale the residual by the first summand of the cancelling pair
        term = EFun(zero.node.children[0], zero.qtype)
        for _ in range(samples):
            for _ in range(RESAMPLE_CAP + 1):
                pt = random_point(space, rng, params)
                try:
                    tv = evaluate(term, pt)
                    zv = evaluate(zero, pt)
                except PoleProximity:
                    resamples += 1
                    continue
                worst = max(worst, abs(zv) / max(abs(tv), RESIDUAL_FLOOR))
                break
            else:
                raise PoleProximity("no pole-free point found")
    return IdentityReport.make("vanishing", 2 * samples, worst, tol, resamples)


# --------------------------------------------------------------------------
# suite registry for the CLI


def run_suite(
    name: str,
    samples: int = 100,
    tol: float = 1e-8,
    params: ModularParams = ModularParams(),
    seed: int = 0,
) -> list[IdentityReport]:
    if name not in SUITES:
        raise KeyError(
            f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}, all"
        )
    return SUITES[name](samples, tol, params, seed)


def run_all(samples=100, tol=1e-8, params=ModularParams(), seed=0) -> list[IdentityReport]:
    out = []
    for name in SUITE_ORDER:
        out.extend(SUITES[name](samples, tol, params, seed))
    return out


def _suite_theta(samples, tol, params, seed):
    return [check_theta_laws(samples, min(tol, 1e-10), params, seed)]


def _suite_fourterm(samples, tol, params, seed):
    return [check_fourterm(samples, tol, params, seed)]


def _suite_braid(samples, tol, params, seed):
    return [check_braid_coefficients(samples, tol, params, seed)]


def _suite_operators(samples, tol, params, seed):
    return [
        check_braid_operator(samples, tol, params, seed),
        check_quadratic_operator(samples, tol, params, seed),
    ]


def _suite_monstrous(samples, tol, params, seed):
    return [check_monstrous(samples, tol, params, seed)]


def _suite_flip(samples, tol, params, seed):
    n = max(10, samples // 2)
    return [
        check_flip(4, 2, 1, n, tol, params, seed),
        check_flip(6, 3, 1, n, tol, params, seed),
        check_flip(6, 3, 2, n, tol, params, seed),
    ]


def _suite_independence(samples, tol, params, seed):
    n = max(10, samples // 2)
    return [
        check_word_independence(2, 1, tol, n, params, seed),
        check_word_independence(3, 1, tol, n, params, seed),
        check_word_independence(4, 2, tol, n, params, seed),
    ]


def _suite_vanishing(samples, tol, params, seed):
    return [check_vanishing(max(10, samples // 5), min(tol, 1e-10), params, seed)]


SUITES = {
    "theta": _suite_theta,
    "fourterm": _suite_fourterm,
    "braid": _suite_braid,
    "operators": _suite_operators,
    "monstrous": _suite_monstrous,
    "flip": _suite_flip,
    "independence": _suite_independence,
    "vanishing": _suite_vanishing,
}

SUITE_ORDER = [
    "theta",
    "fourterm",
    "braid",
    "operators",
    "monstrous",
    "flip",
    "independence",
    "vanishing",
]
