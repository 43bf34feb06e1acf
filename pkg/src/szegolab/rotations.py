"""Continued fractions and sufficient conditions for (B) in rotation codings.

All verdicts are finite-depth: a float cannot certify irrationality or
bounded partial quotients, so every result carries the depth it inspected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import cycle, islice
from typing import Optional, Sequence

from .errors import DepthUnreliable

MAX_DEPTH = 40


@dataclass(frozen=True)
class ContinuedFraction:
    partial_quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.partial_quotients:
            raise ValueError("need at least one partial quotient")
        if any(int(a) != a or a < 1 for a in self.partial_quotients):
            raise ValueError("partial quotients must be positive integers")
        object.__setattr__(self, "partial_quotients", tuple(int(a) for a in self.partial_quotients))
        object.__setattr__(self, "convergents", _convergents(self.partial_quotients))

    @classmethod
    def from_quotients(cls, quotients: Sequence[int], depth: Optional[int] = None) -> "ContinuedFraction":
        """Build ``[0; a_1, a_2, ...]``, cycling ``quotients`` out to ``depth``."""
        quotients = list(quotients)
        if depth is None:
            depth = len(quotients)
        if depth < 1:
            raise ValueError("depth must be positive")
        return cls(tuple(islice(cycle(quotients), depth)))

    @property
    def depth(self) -> int:
        return len(self.partial_quotients)

    @property
    def denominators(self) -> list[int]:
        return [q for _, q in self.convergents]

    def value(self) -> Fraction:
        p, q = self.convergents[-1]
        return Fraction(p, q)

    def __float__(self) -> float:
        return float(self.value())


def _convergents(quotients):
    # p_{-1}=1, p_0=0, q_{-1}=0, q_0=1 for [0; a_1, ...]
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    out = []
    for a in quotients:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        out.append((p, q))
    return tuple(out)


def _gauss_quotients(alpha: float, depth: int):
    """Yield Gauss-map quotients of ``alpha``; raise DepthUnreliable once unresolved.

    Tracks a running bound on the float error of the remainder; once the
    remainder is no larger than that bound the next quotient is meaningless.
    """
    x = float(alpha)
    err = 2.0 ** -53 * x
    for k in range(depth):
        if x <= 4.0 * err or x == 0.0:
            raise DepthUnreliable(f"remainder underflowed at depth {k + 1}")
        inv = 1.0 / x
        a = math.floor(inv)
        inv_err = err / (x * x) + 2.0 ** -53 * inv
        # 1/x within its error bar of an integer: the quotient is not determined
        if min(inv - a, a + 1 - inv) < 2.0 * inv_err:
            raise DepthUnreliable(f"quotient {k + 1} not resolved in double precision")
        yield int(a)
        err = inv_err + 2.0 ** -53 * (inv - a)
        x = inv - a


def _check_alpha(alpha, depth):
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if not 1 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be in [1, {MAX_DEPTH}]")


def continued_fraction(alpha: float, depth: int) -> ContinuedFraction:
    """Gauss-map expansion of ``alpha`` in (0, 1) to exactly ``depth`` quotients."""
    _check_alpha(alpha, depth)
    return ContinuedFraction(tuple(_gauss_quotients(alpha, depth)))


def reliable_continued_fraction(alpha: float, max_depth: int = MAX_DEPTH) -> ContinuedFraction:
    """The longest expansion (up to ``max_depth``) that double precision resolves."""
    _check_alpha(alpha, max_depth)
    quotients = []
    try:
        for a in _gauss_quotients(alpha, max_depth):
            quotients.append(a)
    except DepthUnreliable:
        if not quotients:
            raise
    return ContinuedFraction(tuple(quotients))


def has_bounded_quotients(cf: ContinuedFraction, bound: int) -> bool:
    """All inspected partial quotients are at most ``bound`` (depth ``cf.depth``)."""
    return max(cf.partial_quotients) <= bound


@dataclass(frozen=True)
class BetaClassification:
    alpha: float
    beta: float
    depth: int
    search_bound: int
    tol: float
    case_a: bool
    case_a_witness: Optional[tuple[int, int]]
    case_b: bool
    max_quotient: int
    quotient_bound: int
    rational_beta: bool
    rational_witness: Optional[tuple[int, int]]
    verdict: str

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "depth": self.depth,
            "search_bound": self.search_bound,
            "tol": self.tol,
            "case_a": self.case_a,
            "case_a_witness": list(self.case_a_witness) if self.case_a_witness else None,
            "case_b": self.case_b,
            "max_quotient": self.max_quotient,
            "quotient_bound": self.quotient_bound,
            "rational_beta": self.rational_beta,
            "rational_witness": list(self.rational_witness) if self.rational_witness else None,
            "verdict": self.verdict,
            "note": (
                "finite-depth verdicts; no per-beta test exists for the almost-every-beta "
                "case with unbounded quotients"
            ),
        }


def _signed_range(bound):
    yield 0
    for m in range(1, bound + 1):
        yield m
        yield -m


def classify_beta(
    alpha_cf: ContinuedFraction,
    beta: float,
    search_bound: int = 50,
    tol: float = 1e-9,
    quotient_bound: int = 50,
) -> BetaClassification:
    """Check the sufficient conditions for (B) of a two-interval rotation coding.

    case (a): beta = m*alpha + n with |m|, |n| <= search_bound;
    case (b): all inspected partial quotients <= quotient_bound;
    rational: beta within tol of p/q with q <= search_bound.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    alpha = float(alpha_cf)

    witness_a = None
    for m in _signed_range(search_bound):
        n = round(beta - m * alpha)
        if abs(n) <= search_bound and abs(beta - (m * alpha + n)) <= tol:
            witness_a = (m, n)
            break

    witness_q = None
    for q in range(1, search_bound + 1):
        p = round(beta * q)
        if 0 < p < q and abs(beta - p / q) <= tol:
            witness_q = (p, q)
            break

    case_b = has_bounded_quotients(alpha_cf, quotient_bound)
    holds = witness_a is not None or case_b or witness_q is not None
    return BetaClassification(
        alpha=alpha,
        beta=beta,
        depth=alpha_cf.depth,
        search_bound=search_bound,
        tol=tol,
        case_a=witness_a is not None,
        case_a_witness=witness_a,
        case_b=case_b,
        max_quotient=max(alpha_cf.partial_quotients),
        quotient_bound=quotient_bound,
        rational_beta=witness_q is not None,
        rational_witness=witness_q,
        verdict="sufficient" if holds else "inconclusive",
    )
