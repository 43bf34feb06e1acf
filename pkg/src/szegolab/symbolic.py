"""Subshift generators, factor sets and empirical cylinder frequencies.

A subshift is never materialized.  A :class:`SymbolSequence` is one point
``omega`` of it, evaluated on demand inside ``[-horizon, horizon)``; by
minimality one long orbit (plus a few phases) stands in for all of Omega.

Symbols are single characters so words are plain strings.
"""
from __future__ import annotations

import csv
import io
import json
import string
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .errors import ConfigError, HorizonExceeded
from .rotations import ContinuedFraction

DEFAULT_HORIZON = 1 << 22
DEFAULT_DEPTH = 40


def _default_alphabet(k):
    return tuple(string.ascii_lowercase[:k])


def _check_alphabet(alphabet, where="alphabet"):
    if not alphabet:
        raise ConfigError(where, "alphabet must be nonempty")
    if len(set(alphabet)) != len(alphabet):
        raise ConfigError(where, "alphabet has duplicate symbols")
    for s in alphabet:
        if not isinstance(s, str) or len(s) != 1:
            raise ConfigError(where, f"symbols must be single characters, got {s!r}")


@dataclass(frozen=True)
class RotationCoding:
    """Coding of ``theta + n*alpha mod 1`` by the partition ``0 < betas < 1``.

    ``alpha`` is the convergent of ``[0; quotients...]`` (quotients cycled to
    ``depth`` terms).  Symbol ``alphabet[k]`` marks ``[beta_{k-1}, beta_k)``.
    """

    quotients: tuple[int, ...]
    betas: tuple[float, ...]
    theta: float = 0.0
    depth: int = DEFAULT_DEPTH
    alphabet: tuple[str, ...] = ()

    kind = "rotation"

    def __post_init__(self):
        object.__setattr__(self, "quotients", tuple(self.quotients))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if not self.alphabet:
            object.__setattr__(self, "alphabet", _default_alphabet(len(self.betas) + 1))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        if not self.quotients or any(int(a) != a or a < 1 for a in self.quotients):
            raise ConfigError("quotients", "partial quotients must be positive integers")
        if int(self.depth) != self.depth or self.depth < 1:
            raise ConfigError("depth", "depth must be a positive integer")
        if not self.betas:
            raise ConfigError("betas", "need at least one partition point")
        prev = 0.0
        for i, b in enumerate(self.betas):
            if not prev < b < 1.0:
                raise ConfigError(f"betas[{i}]", f"partition points must satisfy 0 < b_1 < ... < 1, got {b!r}")
            prev = b
        if not 0.0 <= self.theta < 1.0:
            raise ConfigError("theta", "phase must lie in [0, 1)")
        _check_alphabet(self.alphabet)
        if len(self.alphabet) != len(self.betas) + 1:
            raise ConfigError("alphabet", "need exactly one symbol per partition interval")

    @property
    def continued_fraction(self) -> ContinuedFraction:
        return ContinuedFraction.from_quotients(self.quotients, self.depth)

    @property
    def alpha_fraction(self) -> Fraction:
        return self.continued_fraction.value()

    @property
    def alpha(self) -> float:
        return float(self.alpha_fraction)

    def with_phase(self, theta: float) -> "RotationCoding":
        return replace(self, theta=float(theta) % 1.0)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "quotients": list(self.quotients),
            "depth": self.depth,
            "betas": list(self.betas),
            "theta": self.theta,
            "alphabet": "".join(self.alphabet),
        }


@dataclass(frozen=True)
class Substitution:
    """Primitive substitution; the point is a two-sided fixed point of a power."""

    rules: tuple[tuple[str, str], ...]
    alphabet: tuple[str, ...] = ()

    kind = "substitution"

    def __post_init__(self):
        rules = self.rules
        if isinstance(rules, dict):
            rules = tuple(rules.items())
        object.__setattr__(self, "rules", tuple((str(k), str(v)) for k, v in rules))
        if not self.alphabet:
            object.__setattr__(self, "alphabet", tuple(k for k, _ in self.rules))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        _check_alphabet(self.alphabet)
        rule_map = dict(self.rules)
        if set(rule_map) != set(self.alphabet) or len(rule_map) != len(self.rules):
            raise ConfigError("rules", "need exactly one rule per alphabet symbol")
        for k, v in self.rules:
            if not v:
                raise ConfigError(f"rules.{k}", "images must be nonempty")
            bad = set(v) - set(self.alphabet)
            if bad:
                raise ConfigError(f"rules.{k}", f"image uses unknown symbols {sorted(bad)}")
        if not self.is_primitive():
            raise ConfigError("rules", "substitution is not primitive")

    def rule_map(self) -> dict[str, str]:
        return dict(self.rules)

    def matrix(self) -> np.ndarray:
        idx = {s: i for i, s in enumerate(self.alphabet)}
        d = len(self.alphabet)
        m = np.zeros((d, d), dtype=np.int64)
        for k, v in self.rules:
            for s in v:
                m[idx[s], idx[k]] += 1
        return m

    def is_primitive(self) -> bool:
        d = len(self.alphabet)
        if d == 1:
            return len(self.rules[0][1]) >= 2
        m = (self.matrix() > 0).astype(np.int64)
        p = m.copy()
        # Wielandt: a primitive d x d matrix has M^k > 0 for some k <= (d-1)^2 + 1
        for _ in range((d - 1) ** 2 + 1):
            if np.all(p > 0):
                return True
            p = ((p @ m) > 0).astype(np.int64)
        return False

    def to_dict(self) -> dict:
        return {"kind": self.kind, "rules": dict(self.rules), "alphabet": "".join(self.alphabet)}


@dataclass(frozen=True)
class Periodic:
    word: str
    alphabet: tuple[str, ...] = ()

    kind = "periodic"

    def __post_init__(self):
        if not isinstance(self.word, str) or not self.word:
            raise ConfigError("word", "period word must be a nonempty string")
        if not self.alphabet:
            object.__setattr__(self, "alphabet", tuple(sorted(set(self.word))))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        _check_alphabet(self.alphabet)
        bad = set(self.word) - set(self.alphabet)
        if bad:
            raise ConfigError("word", f"word uses unknown symbols {sorted(bad)}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "word": self.word, "alphabet": "".join(self.alphabet)}


SubshiftSpec = Union[RotationCoding, Substitution, Periodic]

_SPEC_KEYS = {
    "rotation": {"kind", "quotients", "depth", "betas", "theta", "alphabet"},
    "substitution": {"kind", "rules", "alphabet"},
    "periodic": {"kind", "word", "alphabet"},
}


def spec_from_dict(doc: dict, where: str = "subshift") -> SubshiftSpec:
    if not isinstance(doc, dict):
        raise ConfigError(where, "expected a JSON object")
    kind = doc.get("kind")
    if kind not in _SPEC_KEYS:
        raise ConfigError(f"{where}.kind", f"unknown subshift kind {kind!r}")
    unknown = set(doc) - _SPEC_KEYS[kind]
    if unknown:
        raise ConfigError(f"{where}.{sorted(unknown)[0]}", "unknown key")
    alphabet = tuple(doc.get("alphabet", ""))
    try:
        if kind == "rotation":
            if "quotients" not in doc or "betas" not in doc:
                raise ConfigError(where, "rotation coding needs 'quotients' and 'betas'")
            return RotationCoding(
                quotients=tuple(doc["quotients"]),
                betas=tuple(doc["betas"]),
                theta=float(doc.get("theta", 0.0)),
                depth=int(doc.get("depth", DEFAULT_DEPTH)),
                alphabet=alphabet,
            )
        if kind == "substitution":
            if not isinstance(doc.get("rules"), dict):
                raise ConfigError(f"{where}.rules", "expected an object of symbol -> image")
            return Substitution(rules=tuple(doc["rules"].items()), alphabet=alphabet)
        return Periodic(word=doc.get("word", ""), alphabet=alphabet)
    except ConfigError as exc:
        if exc.field.startswith(where):
            raise
        raise ConfigError(f"{where}.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, str(exc)) from None


def spec_to_json(spec: SubshiftSpec) -> str:
    return json.dumps(spec.to_dict(), sort_keys=True)


def spec_from_json(text: str) -> SubshiftSpec:
    return spec_from_dict(json.loads(text))


def sturmian(quotients=(1,), depth: int = DEFAULT_DEPTH, theta: float = 0.0, alphabet="ab") -> RotationCoding:
    """Two-interval coding with ``beta_1 = 1 - alpha`` (golden mean by default)."""
    alpha = float(ContinuedFraction.from_quotients(quotients, depth))
    return RotationCoding(tuple(quotients), (1.0 - alpha,), theta, depth, tuple(alphabet))


def rotation_approximant(spec: RotationCoding, order: int, search: int = 5, tol: float = 1e-12) -> RotationCoding:
    """Periodic approximant with ``alpha`` replaced by its order-``order`` convergent.

    Partition points tied to the rotation, ``beta = m*alpha + n`` with
    ``|m|, |n| <= search``, move to ``m*alpha_k + n``; the others stay put.
    For a Sturmian coding this gives the periodic Sturmian word of slope
    ``p_k/q_k``.
    """
    if not 1 <= order <= spec.depth:
        raise ConfigError("approximant_order", f"must lie in [1, {spec.depth}]")
    alpha = spec.alpha
    alpha_k = float(ContinuedFraction.from_quotients(spec.quotients, order))
    betas = []
    for b in spec.betas:
        moved = b
        for m in range(-search, search + 1):
            n = round(b - m * alpha)
            if m and abs(n) <= search and abs(b - (m * alpha + n)) <= tol:
                moved = m * alpha_k + n
                break
        betas.append(moved)
    return RotationCoding(spec.quotients, tuple(betas), spec.theta, order, spec.alphabet)


# --- sequences -------------------------------------------------------------


def _apply_substitution(word, images, lengths):
    lens = lengths[word]
    starts = np.cumsum(lens) - lens
    owner = np.repeat(np.arange(word.size), lens)
    pos = np.arange(int(lens.sum())) - np.repeat(starts, lens)
    return images[word[owner], pos]


class SymbolSequence:
    """The point ``T^offset omega`` of a subshift, readable on ``[-horizon, horizon)``.

    Values are cached internally; the object is otherwise immutable.
    """

    def __init__(self, spec: SubshiftSpec, horizon: int = DEFAULT_HORIZON, offset: int = 0):
        self.spec = spec
        self.horizon = int(horizon)
        self.offset = int(offset)
        self._cache = None if isinstance(spec, Substitution) else False

    @property
    def alphabet(self) -> tuple[str, ...]:
        return self.spec.alphabet

    def shift(self, m: int) -> "SymbolSequence":
        """``T^m`` applied to this point."""
        out = SymbolSequence(self.spec, self.horizon, self.offset + m)
        out._cache = self._cache
        return out

    def _check(self, start, length):
        lo = start + self.offset
        hi = lo + length
        if lo < -self.horizon or hi > self.horizon:
            raise HorizonExceeded(
                f"positions [{start}, {start + length}) (absolute [{lo}, {hi})) outside horizon {self.horizon}"
            )
        return lo

    def codes(self, start: int, length: int) -> np.ndarray:
        """Alphabet indices of positions ``start .. start+length-1`` (int64)."""
        if length < 0:
            raise ValueError("length must be nonnegative")
        lo = self._check(start, length)
        spec = self.spec
        n = np.arange(lo, lo + length, dtype=np.int64)
        if isinstance(spec, Periodic):
            idx = {s: i for i, s in enumerate(spec.alphabet)}
            base = np.array([idx[s] for s in spec.word], dtype=np.int64)
            return base[n % base.size]
        if isinstance(spec, RotationCoding):
            return _rotation_codes(spec, n)
        return self._substitution_codes(lo, length)

    def __getitem__(self, n: int) -> str:
        return self.alphabet[int(self.codes(n, 1)[0])]

    def _substitution_codes(self, lo, length):
        need = max(-lo, lo + length, 1)
        cache = self._cache
        if cache is None or cache["left"].size < need or cache["right"].size < need:
            cache = _substitution_fixed_point(self.spec, max(need, 1024))
            self._cache = cache
        left, right = cache["left"], cache["right"]
        out = np.empty(length, dtype=np.int64)
        n = np.arange(lo, lo + length)
        neg = n < 0
        out[neg] = left[-n[neg] - 1]
        out[~neg] = right[n[~neg]]
        return out


def _rotation_codes(spec: RotationCoding, n: np.ndarray) -> np.ndarray:
    frac = spec.alpha_fraction
    p, q = frac.numerator, frac.denominator
    if q < (1 << 31):
        # exact residues keep rational approximants exactly periodic; phase and
        # partition points within rounding of a multiple of 1/q are compared exactly
        r = ((n % q) * p) % q
        slack = 64 * np.finfo(float).eps * q + 1e-12
        t = spec.theta * q
        if abs(t - round(t)) <= slack:
            r = (r + round(t)) % q
            cuts = np.array([b * q for b in spec.betas])
            snapped = np.round(cuts)
            exact = np.abs(cuts - snapped) <= slack
            cuts = np.where(exact, snapped, cuts)
            return np.searchsorted(cuts, r.astype(float), side="right").astype(np.int64)
        x = np.mod(spec.theta + r / q, 1.0)
    else:
        x = np.mod(spec.theta + n * float(frac), 1.0)
    return np.searchsorted(np.asarray(spec.betas), x, side="right").astype(np.int64)


def _substitution_fixed_point(spec: Substitution, need: int):
    alphabet = spec.alphabet
    idx = {s: i for i, s in enumerate(alphabet)}
    rules = spec.rule_map()
    imgs = [[idx[c] for c in rules[s]] for s in alphabet]
    width = max(len(v) for v in imgs)
    images = np.zeros((len(alphabet), width), dtype=np.int64)
    rimages = np.zeros_like(images)
    for i, v in enumerate(imgs):
        images[i, : len(v)] = v
        rimages[i, : len(v)] = v[::-1]
    lengths = np.array([len(v) for v in imgs], dtype=np.int64)

    # Legal pairs xy; the map xy -> (last sigma(x), first sigma(y)) ends in a cycle.
    # A pair on the cycle of length p seeds a two-sided fixed point of sigma^p.
    word = np.array([0], dtype=np.int64)
    while word.size < 4 * len(alphabet) ** 2 + 8:
        word = _apply_substitution(word, images, lengths)
    legal = sorted({(int(a), int(b)) for a, b in zip(word[:-1], word[1:])})
    seen = {}
    pair = legal[0]
    while pair not in seen:
        seen[pair] = len(seen)
        pair = (imgs[pair[0]][-1], imgs[pair[1]][0])
    start = seen[pair]
    cycle_pairs = [pp for pp, i in seen.items() if i >= start]
    period = len(cycle_pairs)
    cycle_pairs.sort(key=lambda pp: (pp[1] != 0, pp))
    x, y = cycle_pairs[0]

    left = np.array([x], dtype=np.int64)  # reversed: left[0] is position -1
    right = np.array([y], dtype=np.int64)
    while left.size < need or right.size < need:
        for _ in range(period):
            left = _apply_substitution(left, rimages, lengths)
            right = _apply_substitution(right, images, lengths)
        if left.size == 1 and right.size == 1:
            raise ConfigError("rules", "substitution does not grow")
    return {"left": left, "right": right}


def segment(seq: SymbolSequence, start: int, length: int) -> str:
    if length < 1:
        raise ValueError("length must be positive")
    alphabet = seq.alphabet
    return "".join(alphabet[i] for i in seq.codes(start, length))


# --- window statistics -----------------------------------------------------

_P1, _B1 = 2147483647, 1000003
_P2, _B2 = 2147483629, 911382323


def _window_hash(codes, n, base, mod):
    """Hash of every length-n window, built by doubling in O(L log n)."""
    codes = codes.astype(np.int64) + 1
    result, rlen = None, 0
    block, blen = codes % mod, 1
    k = n
    while True:
        if k & 1:
            if result is None:
                result, rlen = block, blen
            else:
                w = min(result.size - blen, block.size - rlen)
                shift = pow(base, blen, mod)
                result = (result[:w] * shift + block[rlen : rlen + w]) % mod
                rlen += blen
        k >>= 1
        if not k:
            break
        shift = pow(base, blen, mod)
        block = (block[:-blen] * shift + block[blen:]) % mod
        blen *= 2
    return result[: codes.size - n + 1]


def _window_stats(seq: SymbolSequence, n: int, sample_length: int):
    """Distinct length-n windows starting in ``[0, sample_length)``: first starts and counts."""
    codes = seq.codes(0, sample_length + n - 1)
    k = len(seq.alphabet)
    if n * np.log2(max(k, 2)) < 62:
        key = np.zeros(sample_length, dtype=np.int64)
        for t in range(n):
            key = key * k + codes[t : t + sample_length]
    else:
        # double polynomial hash; collisions among the few (~n+1) distinct
        # words of a low-complexity subshift are negligible at 62 bits
        key = _window_hash(codes, n, _B1, _P1) * (1 << 31) + _window_hash(codes, n, _B2, _P2)
    _, first, counts = np.unique(key, return_index=True, return_counts=True)
    return codes, first, counts


@dataclass(frozen=True)
class FrequencyTable:
    word_length: int
    entries: dict = field(default_factory=dict)
    sample_length: int = 0

    def min_frequency(self) -> float:
        return min(self.entries.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["word", "frequency"])
        for word, f in self.entries.items():
            w.writerow([word, format(f, ".17g")])
        return buf.getvalue()


def _words(seq, codes, first, n):
    alphabet = seq.alphabet
    return ["".join(alphabet[c] for c in codes[i : i + n]) for i in first]


def factors(seq: SymbolSequence, n: int, sample_length: int) -> set[str]:
    if n < 1:
        raise ValueError("n must be positive")
    if sample_length < 10 * n:
        raise ValueError("sample_length must be at least 10*n")
    codes, first, _ = _window_stats(seq, n, sample_length)
    return set(_words(seq, codes, first, n))


def cylinder_frequencies(seq: SymbolSequence, n: int, sample_length: int) -> FrequencyTable:
    if n < 1:
        raise ValueError("n must be positive")
    if sample_length < 100 * n:
        raise ValueError("sample_length must be at least 100*n")
    codes, first, counts = _window_stats(seq, n, sample_length)
    total = int(counts.sum())
    words = _words(seq, codes, first, n)
    entries = {w: int(c) / total for w, c in sorted(zip(words, counts))}
    return FrequencyTable(n, entries, sample_length)


def words_to_csv(words) -> str:
    return "word\n" + "".join(f"{w}\n" for w in sorted(words))


def detect_period(seq: SymbolSequence, max_period: int, sample_length: int) -> Optional[int]:
    """Smallest shift ``q <= max_period`` fixing the sampled window, or None."""
    if max_period < 1:
        raise ValueError("max_period must be positive")
    if sample_length < 4 * max_period:
        raise ValueError("sample_length must be at least 4*max_period")
    codes = seq.codes(0, sample_length)
    for q in range(1, max_period + 1):
        if np.array_equal(codes[:-q], codes[q:]):
            return q
    return None
