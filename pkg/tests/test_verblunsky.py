import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from szegolab.errors import ConfigError, UnmappedWord
from szegolab.symbolic import Periodic, SymbolSequence, detect_period, segment, sturmian
from szegolab.verblunsky import (
    CoefficientSequence,
    VerblunskyMap,
    coefficient_sequence,
    evaluate,
    map_from_dict,
    map_from_json,
)

from .strategies import disk

AB = SymbolSequence(Periodic("ab"))


def test_symbol_lookup():
    f = VerblunskyMap.symbol_values({"a": 0.5, "b": -0.5})
    assert evaluate(f, AB, 0) == 0.5
    assert evaluate(f, AB, 1) == -0.5
    assert evaluate(f, AB, -1) == -0.5


def test_zero_map():
    f = VerblunskyMap.symbol_values({"a": 0, "b": 0})
    c = coefficient_sequence(f, AB, -10, 10)
    assert np.all(c.values == 0)
    assert np.all(c.rho == 1)


def test_constant_rho():
    f = VerblunskyMap.constant(0.5, "ab")
    c = coefficient_sequence(f, AB, 0, 20)
    assert np.allclose(c.rho, math.sqrt(0.75), atol=1e-15)
    assert c.rho[0] == pytest.approx(0.8660254, abs=1e-7)


def sliding_map(alphabet="ab"):
    words = [x + y + z for x in alphabet for y in alphabet for z in alphabet]
    return VerblunskyMap(1, {w: 0.1 * (i + 1) * (1 if i % 2 else -1) for i, w in enumerate(words)})


def test_window_map_depends_on_window_only():
    seq = SymbolSequence(sturmian())
    f = sliding_map()
    text = segment(seq, -1, 2002)
    vals = coefficient_sequence(f, seq, 0, 1999).values
    first = {}
    for n in range(2000):
        w = text[n : n + 3]
        assert vals[n] == f(w)
        first.setdefault(w, n)
    # positions with the same 3-window agree
    for n in range(2000):
        assert vals[n] == vals[first[text[n : n + 3]]]


def test_two_valued_map_is_aperiodic():
    seq = SymbolSequence(sturmian())
    f = VerblunskyMap.symbol_values({"a": 0.5, "b": -0.5})
    vals = coefficient_sequence(f, seq, 0, 10**5 - 1).values
    shifts = [q for q in range(1, 501) if np.array_equal(vals[:-q], vals[q:])]
    assert shifts == []
    assert detect_period(seq, 500, 10**5) is None


def test_unmapped_word():
    f = VerblunskyMap(1, {"aba": 0.1})
    with pytest.raises(UnmappedWord) as exc:
        coefficient_sequence(f, AB, 0, 3)
    assert exc.value.args[0] == "bab"
    g = VerblunskyMap(1, {"aba": 0.1}, default=0.2)
    assert list(coefficient_sequence(g, AB, 0, 3).values) == [0.2, 0.1, 0.2, 0.1]


def test_disk_margin():
    with pytest.raises(ConfigError, match="entries.a"):
        VerblunskyMap(0, {"a": 1.0})
    with pytest.raises(ConfigError):
        VerblunskyMap(0, {"a": 0.9999999 + 0j})
    VerblunskyMap(0, {"a": 0.999})


def test_map_validation():
    with pytest.raises(ConfigError, match="word length"):
        VerblunskyMap(1, {"a": 0.1})
    with pytest.raises(ConfigError, match=r"^map\.entries\[0\]"):
        map_from_dict({"window": 0, "entries": [["a", 0.1]]})
    with pytest.raises(ConfigError, match=r"^map\.weights"):
        map_from_dict({"window": 0, "entries": [], "weights": 1})


@given(st.lists(disk(0.99), min_size=1, max_size=4), st.booleans())
def test_map_json_roundtrip(values, with_default):
    table = {"abcd"[i]: v for i, v in enumerate(values)}
    f = VerblunskyMap(0, table, default=0.25j if with_default else None)
    assert map_from_json(f.to_json()) == f


def test_coefficient_window():
    c = CoefficientSequence.constant(0.3, -5, 5)
    assert c.hi == 5 and len(c) == 11
    assert c[-5] == 0.3
    assert c.window(0, 2).size == 3
    with pytest.raises(IndexError):
        c.window(-6, 0)
    with pytest.raises(IndexError):
        c[6]
