import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from szegolab.cocycle import (
    LYAPUNOV_CSV_HEADER,
    SzegoCocycle,
    dichotomy_directions,
    estimates_to_csv,
    lyapunov,
    lyapunov_grid,
    one_step,
    projective_distance,
    sample_sequences,
    szego_inverse,
    szego_matrix,
    transfer,
    uniformity_profile,
)
from szegolab.errors import DegenerateSplit
from szegolab.mat2 import Mat2C, mul
from szegolab.symbolic import Periodic, SymbolSequence, sturmian
from szegolab.verblunsky import VerblunskyMap

from .conftest import LN_SQRT3
from .strategies import disk, unit

# a gap and a band centre of the order-10 (period 89) approximant bands of the
# golden-mean family with values +-0.5, located with discriminant_bands
GAP_THETA = 2.286445269027361
BAND_THETA = 5.855683550272602


def const_cocycle(value, z):
    f = VerblunskyMap.constant(value, "a")
    return SzegoCocycle(f, SymbolSequence(Periodic("a")), z)


def fib_cocycle(theta):
    f = VerblunskyMap.symbol_values({"a": 0.5, "b": -0.5})
    return SzegoCocycle.at_angle(f, SymbolSequence(sturmian()), theta)


def dense(p):
    return p.mat.to_array(), p.log_scale


def test_one_step_examples():
    z = cmath.exp(0.3j)
    m = one_step(const_cocycle(0.0, z), 5)
    assert np.allclose(m.to_array(), [[z, 0], [0, 1]], atol=0)
    r = 1 / math.sqrt(0.75)
    assert np.allclose(one_step(const_cocycle(0.5, 1), 0).to_array(), r * np.array([[1, -0.5], [-0.5, 1]]), atol=1e-15)


@given(disk(), unit)
def test_det_and_inverse(f, z):
    m = szego_matrix(f, z)
    assert abs(m.det() - z) <= 1e-12
    assert np.allclose(mul(szego_inverse(f, z), m).to_array(), np.eye(2), atol=1e-9 * m.norm() ** 2)


def test_transfer_zero_steps():
    p = transfer(fib_cocycle(1.0), 0)
    assert p.log_scale == 0.0 and p.mat == Mat2C.identity()


def test_free_transfer_long():
    p = transfer(const_cocycle(0.0, cmath.exp(0.77j)), 10**6)
    assert abs(p.log_norm() / 10**6) <= 1e-12


@pytest.mark.parametrize("theta", [0.0, GAP_THETA, BAND_THETA])
def test_inverse_transfer_reconstructs_identity(theta):
    c = fib_cocycle(theta)
    n = 100
    fwd = transfer(c, n)
    back = transfer(c.shift(n), -n)
    prod = back.mat.to_array() @ fwd.mat.to_array()
    scale = math.exp(fwd.log_scale + back.log_scale)
    # error measured against ||A(-n)|| ||A(n)||
    assert np.max(np.abs(prod - np.eye(2) / scale)) <= 1e-6


@pytest.mark.parametrize("n,m", [(1, 1), (17, 40), (300, 700), (999, 1)])
def test_cocycle_law(n, m):
    c = fib_cocycle(GAP_THETA)
    whole = transfer(c, n + m)
    parts = mul(transfer(c.shift(n), m).mat, transfer(c, n).mat)
    logs = transfer(c.shift(n), m).log_scale + transfer(c, n).log_scale
    a = whole.mat.to_array() * math.exp(whole.log_scale - logs)
    rel = np.linalg.norm(a - parts.to_array()) / np.linalg.norm(parts.to_array())
    assert rel <= 1e-6


def test_raw_and_normalized_products_agree():
    f = VerblunskyMap.symbol_values({"a": 0.5, "b": -0.5})
    spec = sturmian()
    n = 1000
    for theta in (0.4, GAP_THETA, BAND_THETA):
        est = lyapunov(f, spec, cmath.exp(1j * theta), n, samples=4)
        for k, seq in enumerate(sample_sequences(spec, 4, n)):
            raw = transfer(SzegoCocycle(f, seq, cmath.exp(1j * theta)), n).log_norm() / n
            assert raw == pytest.approx(est.per_sample[k], abs=2e-9)


def test_conjugation_symmetry():
    f = VerblunskyMap.symbol_values({"a": 0.5, "b": -0.5})
    thetas = np.array([0.3, 1.2, 2.0, GAP_THETA])
    up = lyapunov_grid(f, sturmian(), np.exp(1j * thetas), 5000, 8)
    down = lyapunov_grid(f, sturmian(), np.exp(-1j * thetas), 5000, 8)
    for a, b in zip(up, down):
        assert a.gamma == pytest.approx(b.gamma, abs=1e-6 + a.defect)


def test_constant_exponents():
    f, spec = VerblunskyMap.constant(0.5, "a"), Periodic("a")
    e = lyapunov(f, spec, 1.0, 10**5)
    assert e.gamma == pytest.approx(LN_SQRT3, abs=1e-4)
    assert e.defect == 0.0
    assert abs(lyapunov(f, spec, -1.0, 10**5).gamma) <= 1e-4
    free = lyapunov(VerblunskyMap.constant(0.0, "a"), spec, cmath.exp(2j), 10**4)
    assert abs(free.gamma) <= 1e-12 and free.defect == 0.0


def test_constant_profile_has_no_defect():
    f = VerblunskyMap.constant(0.5, "ab")
    prof = uniformity_profile(f, sturmian(), cmath.exp(0.4j), [100, 1000, 10000])
    assert [e.defect for e in prof] == [0.0, 0.0, 0.0]


def test_gap_profile_uniform():
    f = VerblunskyMap.symbol_values({"a": 0.5, "b": -0.5})
    prof = uniformity_profile(f, sturmian(), cmath.exp(1j * GAP_THETA), [10**3, 10**4, 10**5])
    defects = [e.defect for e in prof]
    assert defects[0] > defects[1] > defects[2]
    assert abs(prof[2].gamma - prof[1].gamma) < 1e-3
    # frozen from the n = 1e5 run
    assert prof[2].gamma == pytest.approx(0.378149, abs=1e-5)


def test_band_centre_profile():
    f = VerblunskyMap.symbol_values({"a": 0.5, "b": -0.5})
    prof = uniformity_profile(f, sturmian(), cmath.exp(1j * BAND_THETA), [10**3, 10**4, 10**5])
    for e in prof:
        assert e.gamma <= 10 * e.defect


def test_profile_needs_increasing_n():
    with pytest.raises(ValueError):
        uniformity_profile(VerblunskyMap.constant(0.5, "a"), Periodic("a"), 1.0, [100, 100])


def test_estimates_csv():
    f, spec = VerblunskyMap.constant(0.5, "a"), Periodic("a")
    text = estimates_to_csv(lyapunov_grid(f, spec, [1.0, -1.0], 100, 2), ["config: {}"])
    lines = text.splitlines()
    assert lines[0] == "# config: {}"
    assert lines[1] == ",".join(LYAPUNOV_CSV_HEADER)
    assert lines[2].startswith("0,0.549")
    assert lines[3].startswith("3.1415926535897931,")


def test_dichotomy_constant():
    d = dichotomy_directions(const_cocycle(0.5, 1.0), 1000)
    s = 1 / math.sqrt(2)
    assert np.allclose(d.stable, [s, s], atol=1e-6)
    assert np.allclose(d.unstable, [s, -s], atol=1e-6)
    assert d.decay_rate == pytest.approx(LN_SQRT3, abs=1e-9)


def test_dichotomy_degenerate():
    with pytest.raises(DegenerateSplit):
        dichotomy_directions(const_cocycle(0.5, -1.0), 100)
    with pytest.raises(DegenerateSplit):
        dichotomy_directions(const_cocycle(0.0, 1.0), 100)


def test_dichotomy_equivariance_constant():
    c = const_cocycle(0.5, 1.0)
    d = dichotomy_directions(c, 200)
    # A(m) v_s shrinks like 3^{-m} against ||A(m)||; past m ~ 15 rounding owns the direction
    for m in (1, 5, 10):
        moved = transfer(c, m).mat.to_array() @ d.stable
        assert projective_distance(moved, dichotomy_directions(c.shift(m), 200).stable) <= 1e-4


def test_dichotomy_equivariance_in_gap():
    c = fib_cocycle(GAP_THETA)
    d = dichotomy_directions(c, 400)
    for m in (1, 2, 7):
        moved = transfer(c, m).mat.to_array() @ d.stable
        assert projective_distance(moved, dichotomy_directions(c.shift(m), 400).stable) <= 1e-4
        back = transfer(c.shift(m), -m).mat.to_array() @ dichotomy_directions(c.shift(m), 400).unstable
        assert projective_distance(back, d.unstable) <= 1e-4


def test_projective_distance():
    assert projective_distance(np.array([1, 1j]), np.array([1j, -1])) == pytest.approx(0.0, abs=1e-12)
    assert projective_distance(np.array([1, 0]), np.array([0, 1])) == 1.0
