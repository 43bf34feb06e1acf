"""Finite-sample diagnostic for Boshernitzan's condition.

``eta(n) = n * min_w freq(w)`` over the observed length-n words.  Condition
(B) asks for ``eta(l_k) >= C > 0`` along some ``l_k -> infinity``; a scan can
only report how ``eta`` behaves on the tested lengths.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

from .symbolic import RotationCoding, SymbolSequence, cylinder_frequencies

SUPPORTS_B = "SupportsB"
WEAK = "Weak"
INCONCLUSIVE = "Inconclusive"

DEFAULT_THRESHOLD = 0.1


def eta(seq: SymbolSequence, n: int, sample_length: int) -> float:
    table = cylinder_frequencies(seq, n, sample_length)
    return n * table.min_frequency()


@dataclass(frozen=True)
class BoshReport:
    lengths: tuple[int, ...]
    eta: tuple[float, ...]
    threshold: float
    verdict: str
    constant_estimate: float
    sample_length: int
    length_rule: str = "user-supplied"
    factor_counts: tuple[int, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "lengths": list(self.lengths),
            "eta": list(self.eta),
            "factor_counts": list(self.factor_counts),
            "threshold": self.threshold,
            "verdict": self.verdict,
            "constant_estimate": self.constant_estimate,
            "sample_length": self.sample_length,
            "length_rule": self.length_rule,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def to_csv(self, header_lines=()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "eta"])
        for n, e in zip(self.lengths, self.eta):
            w.writerow([n, format(e, ".17g")])
        return buf.getvalue()


def verdict_for(etas: Sequence[float], threshold: float) -> str:
    good = [e >= threshold for e in etas]
    if good[-1] and 2 * sum(good) >= len(good):
        return SUPPORTS_B
    if any(good):
        return WEAK
    return INCONCLUSIVE


def bosh_scan(
    seq: SymbolSequence,
    lengths: Sequence[int],
    sample_length: int,
    threshold: float = DEFAULT_THRESHOLD,
    length_rule: str = "user-supplied",
) -> BoshReport:
    """eta at each length plus a verdict.

    SupportsB: eta >= threshold on at least half the lengths, the largest
    included.  Weak: on some but fewer.  Inconclusive: on none.
    ``constant_estimate`` is the smallest qualifying eta (0 if none).
    """
    lengths = [int(n) for n in lengths]
    if not lengths:
        raise ValueError("need at least one length")
    if any(b <= a for a, b in zip(lengths, lengths[1:])):
        raise ValueError("lengths must be strictly increasing")
    etas, counts = [], []
    for n in lengths:
        table = cylinder_frequencies(seq, n, sample_length)
        etas.append(n * table.min_frequency())
        counts.append(len(table.entries))
    verdict = verdict_for(etas, threshold)
    qualifying = [e for e in etas if e >= threshold]
    return BoshReport(
        lengths=tuple(lengths),
        eta=tuple(etas),
        threshold=threshold,
        verdict=verdict,
        constant_estimate=min(qualifying) if qualifying else 0.0,
        sample_length=sample_length,
        length_rule=length_rule,
        factor_counts=tuple(counts),
    )


def convergent_lengths(spec: RotationCoding, sample_length: int, depth: int | None = None) -> list[int]:
    """Distinct convergent denominators usable at this sample length (n <= L/100)."""
    cf = spec.continued_fraction
    out = []
    for q in cf.denominators[: depth or cf.depth]:
        if q > sample_length // 100:
            break
        if not out or q > out[-1]:
            out.append(q)
    return out


def near_convergent_lengths(spec: RotationCoding, sample_length: int) -> list[int]:
    """Convergent denominators and their successors ``q_k + 1``.

    Just past ``q_k`` the coding acquires words of frequency about
    ``||q_k alpha||``, so a large next quotient shows up as a dip in eta.
    """
    out = set()
    for q in convergent_lengths(spec, sample_length):
        out.add(q)
        if q + 1 <= sample_length // 100:
            out.add(q + 1)
    return sorted(out)
