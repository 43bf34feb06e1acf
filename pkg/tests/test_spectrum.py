import math

import numpy as np
import pytest

from szegolab.cmv import TWO_PI, BandSpectrum, discriminant_bands
from szegolab.spectrum import (
    RESOLVENT,
    SPECTRUM,
    UNDECIDED,
    classify,
    classify_point,
    compare_with_bands,
    default_gamma_floor,
    scan,
)
from szegolab.symbolic import Periodic, SymbolSequence, rotation_approximant, sturmian
from szegolab.verblunsky import CoefficientSequence, VerblunskyMap, coefficient_sequence

HALF = VerblunskyMap.constant(0.5, "a")
ZERO = VerblunskyMap.constant(0.0, "a")
ONE = Periodic("a")
FIB = VerblunskyMap.symbol_values({"a": 0.5, "b": -0.5})


def test_classify_rule():
    assert classify(0.5, 0.0, 0.01, 0.5) == RESOLVENT
    assert classify(0.005, 0.0, 0.01, 0.5) == SPECTRUM
    assert classify(0.5, 0.3, 0.01, 0.5) == UNDECIDED
    with pytest.raises(ValueError):
        classify(0.5, 0.0, 0.0, 0.5)


def test_classify_point_examples():
    assert classify_point(HALF, ONE, 1.0, 10**4) == RESOLVENT
    assert classify_point(HALF, ONE, -1.0, 10**4) == SPECTRUM
    assert classify_point(ZERO, ONE, np.exp(1.3j), 10**4) == SPECTRUM
    assert default_gamma_floor(1000) == 0.01


def test_free_scan_is_everything():
    r = scan(ZERO, ONE, 256, 1000)
    assert r.measure_estimate == pytest.approx(TWO_PI, abs=1e-15)
    assert r.counts() == {RESOLVENT: 0, SPECTRUM: 256, UNDECIDED: 0}
    band = discriminant_bands(CoefficientSequence.constant(0.0, 0, 1), 1)
    assert compare_with_bands(r, band).agreement == 1.0


def test_constant_scan_matches_band():
    r = scan(HALF, ONE, 1024, 10**4)
    assert abs(r.measure_estimate - 4 * math.pi / 3) <= 0.1
    band = discriminant_bands(CoefficientSequence.constant(0.5, 0, 1), 1)
    cmp = compare_with_bands(r, band)
    assert cmp.agreement >= 0.98
    assert cmp.matches == round(cmp.agreement * 1024)


def fib_bands(order):
    ap = rotation_approximant(sturmian(), order)
    q = ap.continued_fraction.denominators[-1]
    return discriminant_bands(coefficient_sequence(FIB, SymbolSequence(ap), 0, q - 1), q)


def test_fibonacci_trend_and_agreement():
    coarse = scan(FIB, sturmian(), 1024, 10**3)
    fine = scan(FIB, sturmian(), 1024, 10**4)
    assert fine.measure_estimate < coarse.measure_estimate
    assert fine.fraction(UNDECIDED) < 0.02
    # frozen from the first run (grid 1024, 8 phases)
    assert coarse.measure_estimate == pytest.approx(1.41740, abs=1e-4)
    assert fine.measure_estimate == pytest.approx(0.70563, abs=1e-4)
    assert compare_with_bands(coarse, fib_bands(8)).agreement >= 0.9


def test_reclassify_is_pure_threshold_change():
    r = scan(FIB, sturmian(), 128, 2000)
    looser = r.reclassify(1e-6)
    assert looser.measure_estimate <= r.measure_estimate
    assert [x.gamma for x in looser.rows] == [x.gamma for x in r.rows]
    assert r.reclassify(r.gamma_floor).rows == r.rows


def test_report_formats():
    r = scan(HALF, ONE, 64, 100)
    d = r.to_dict()
    assert d["grid_size"] == 64 and len(d["rows"]) == 64
    assert d["parameters"]["n"] == 100
    csv = r.to_csv(["config: x"]).splitlines()
    assert csv[0] == "# config: x" and csv[1] == "theta,gamma,defect,class"
    assert csv[2].split(",")[3] == RESOLVENT
    assert len(r.plot_data().splitlines()) == 64
    assert r.to_json() == r.to_json()


def test_scan_needs_grid():
    with pytest.raises(ValueError):
        scan(HALF, ONE, 32, 100)


def test_disagreement_arcs():
    r = scan(HALF, ONE, 64, 1000)
    wrong = BandSpectrum(2, ((0.0, 1.0),))
    cmp = compare_with_bands(r, wrong)
    assert cmp.agreement < 0.5
    for lo, hi in cmp.disagreement_arcs:
        assert hi > lo
