"""Locally constant Verblunsky maps ``alpha_n = f(T^n omega)``."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .errors import ConfigError, UnmappedWord
from .symbolic import SymbolSequence

DISK_MARGIN = 1e-6


@dataclass(frozen=True)
class VerblunskyMap:
    """Lookup table from length ``2*window+1`` words to points of the open disk.

    The word read at position n is ``omega(n-window) ... omega(n+window)``.
    """

    window: int
    table: tuple[tuple[str, complex], ...]
    default: Optional[complex] = None

    def __post_init__(self):
        table = self.table
        if isinstance(table, Mapping):
            table = tuple(table.items())
        table = tuple(sorted((str(w), complex(v)) for w, v in table))
        object.__setattr__(self, "table", table)
        if int(self.window) != self.window or self.window < 0:
            raise ConfigError("window", "window must be a nonnegative integer")
        width = 2 * self.window + 1
        seen = set()
        for w, v in table:
            if len(w) != width:
                raise ConfigError(f"entries.{w}", f"word length must be {width}")
            if w in seen:
                raise ConfigError(f"entries.{w}", "duplicate word")
            seen.add(w)
            if not abs(v) <= 1.0 - DISK_MARGIN:
                raise ConfigError(f"entries.{w}", f"|alpha| = {abs(v)!r} exceeds 1 - {DISK_MARGIN}")
        if self.default is not None:
            object.__setattr__(self, "default", complex(self.default))
            if not abs(self.default) <= 1.0 - DISK_MARGIN:
                raise ConfigError("default", f"|alpha| = {abs(self.default)!r} exceeds 1 - {DISK_MARGIN}")
        if not table and self.default is None:
            raise ConfigError("entries", "empty table without default")

    @classmethod
    def constant(cls, value: complex, alphabet) -> "VerblunskyMap":
        return cls(0, {s: value for s in alphabet})

    @classmethod
    def symbol_values(cls, values: Mapping[str, complex]) -> "VerblunskyMap":
        """``f(omega) = value of omega(0)``, i.e. window 0 with a per-letter table."""
        return cls(0, dict(values))

    def lookup(self) -> dict[str, complex]:
        return dict(self.table)

    def __call__(self, word: str) -> complex:
        for w, v in self.table:
            if w == word:
                return v
        if self.default is None:
            raise UnmappedWord(word)
        return self.default

    def to_dict(self) -> dict:
        doc = {"window": self.window, "entries": [[w, v.real, v.imag] for w, v in self.table]}
        if self.default is not None:
            doc["default"] = [self.default.real, self.default.imag]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def map_from_dict(doc, where: str = "map") -> VerblunskyMap:
    if not isinstance(doc, dict):
        raise ConfigError(where, "expected a JSON object")
    unknown = set(doc) - {"window", "entries", "default"}
    if unknown:
        raise ConfigError(f"{where}.{sorted(unknown)[0]}", "unknown key")
    try:
        entries = doc.get("entries", [])
        table = []
        for i, e in enumerate(entries):
            if not (isinstance(e, (list, tuple)) and len(e) == 3):
                raise ConfigError(f"{where}.entries[{i}]", "expected [word, re, im]")
            table.append((e[0], complex(float(e[1]), float(e[2]))))
        default = doc.get("default")
        if default is not None:
            if not (isinstance(default, (list, tuple)) and len(default) == 2):
                raise ConfigError(f"{where}.default", "expected [re, im]")
            default = complex(float(default[0]), float(default[1]))
        return VerblunskyMap(int(doc.get("window", 0)), tuple(table), default)
    except ConfigError as exc:
        if exc.field.startswith(where):
            raise
        raise ConfigError(f"{where}.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, str(exc)) from None


def map_from_json(text: str) -> VerblunskyMap:
    return map_from_dict(json.loads(text))


@dataclass(frozen=True)
class CoefficientSequence:
    """``alpha_n`` and ``rho_n = sqrt(1 - |alpha_n|^2)`` for ``n`` in ``[lo, hi]``."""

    lo: int
    values: np.ndarray

    @property
    def hi(self) -> int:
        return self.lo + self.values.size - 1

    @property
    def rho(self) -> np.ndarray:
        return np.sqrt(1.0 - np.abs(self.values) ** 2)

    def __len__(self):
        return self.values.size

    def __getitem__(self, n: int) -> complex:
        if not self.lo <= n <= self.hi:
            raise IndexError(n)
        return complex(self.values[n - self.lo])

    def window(self, lo: int, hi: int) -> np.ndarray:
        if lo < self.lo or hi > self.hi:
            raise IndexError(f"[{lo}, {hi}] not within [{self.lo}, {self.hi}]")
        return self.values[lo - self.lo : hi - self.lo + 1]

    @classmethod
    def constant(cls, value: complex, lo: int, hi: int) -> "CoefficientSequence":
        return cls(lo, np.full(hi - lo + 1, complex(value)))


def value_index(f: VerblunskyMap, seq: SymbolSequence, lo: int, count: int):
    """Distinct values of ``f`` and, per position ``lo .. lo+count-1``, an index into them.

    Values are the table entries in table order, then the default if set.
    """
    N = f.window
    width = 2 * N + 1
    codes = seq.codes(lo - N, count + 2 * N)
    k = len(seq.alphabet)
    if width * np.log2(max(k, 2)) >= 62:
        raise ValueError(f"window {N} too wide for a {k}-letter alphabet")
    key = np.zeros(count, dtype=np.int64)
    for t in range(width):
        key = key * k + codes[t : t + count]
    idx = {s: i for i, s in enumerate(seq.alphabet)}
    values = [v for _, v in f.table]
    missing = len(values)
    if f.default is not None:
        values.append(f.default)
    known = {}
    for i, (w, _) in enumerate(f.table):
        if all(c in idx for c in w):
            code = 0
            for c in w:
                code = code * k + idx[c]
            known[code] = i
    if k**width <= 1 << 22:
        lut = np.full(k**width, missing, dtype=np.int64)
        for code, i in known.items():
            lut[code] = i
        index = lut[key]
    else:
        uniq, inverse = np.unique(key, return_inverse=True)
        index = np.array([known.get(c, missing) for c in uniq.tolist()], dtype=np.int64)[inverse.reshape(-1)]
    if f.default is None and count and int(index.max()) == missing:
        code = int(key[np.argmax(index == missing)])
        digits = []
        for _ in range(width):
            code, r = divmod(code, k)
            digits.append(seq.alphabet[r])
        raise UnmappedWord("".join(reversed(digits)))
    return np.array(values, dtype=complex), index


def _alphas(f: VerblunskyMap, seq: SymbolSequence, lo: int, count: int) -> np.ndarray:
    values, index = value_index(f, seq, lo, count)
    return values[index]


def evaluate(f: VerblunskyMap, seq: SymbolSequence, n: int) -> complex:
    return complex(_alphas(f, seq, n, 1)[0])


def coefficient_sequence(f: VerblunskyMap, seq: SymbolSequence, lo: int, hi: int) -> CoefficientSequence:
    if lo > hi:
        raise ValueError("need lo <= hi")
    return CoefficientSequence(lo, _alphas(f, seq, lo, hi - lo + 1))
