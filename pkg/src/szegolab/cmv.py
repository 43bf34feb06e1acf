"""Finite CMV matrices, eigenphases and band spectra of periodic approximants.

The CMV matrix factors as ``C = L M`` with ``L = Theta_0 + Theta_2 + ...``
and ``M = 1 + Theta_1 + Theta_3 + ...`` (direct sums), where
``Theta_j = [[conj(a_j), rho_j], [rho_j, -a_j]]`` acts on ``(e_j, e_{j+1})``.

``HALF_LINE`` cuts the half-line matrix to its top-left ``size x size``
block, with no boundary correction.  ``EXTENDED`` takes a window of the
two-sided matrix and closes it periodically (the last odd block couples the
last and first sites), which keeps it exactly unitary.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .cocycle import szego_matrix
from .errors import EigensolveFailure, InsufficientCoefficients, NonRealDiscriminant
from .mat2 import Mat2C, mul
from .verblunsky import CoefficientSequence

HALF_LINE = "half-line"
EXTENDED = "extended"
MAX_EIG_SIZE = 4096
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CmvOperator:
    size: int
    variant: str
    start: int
    matrix: sp.csr_matrix

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def interior_columns(self) -> range:
        """Columns whose full support lies inside the truncation."""
        if self.variant == EXTENDED:
            return range(self.size)
        return range(max(self.size - 2, 0))

    def to_triplets(self) -> str:
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        lines = ["row,col,re,im"]
        for k in order:
            v = coo.data[k]
            lines.append(f"{coo.row[k]},{coo.col[k]},{v.real:.17g},{v.imag:.17g}")
        return "\n".join(lines) + "\n"


def _theta_blocks(alpha, rho, firsts, size, wrap=False):
    rows, cols, vals = [], [], []
    for j, a, r in zip(firsts, alpha, rho):
        k = (j + 1) % size if wrap else j + 1
        entries = [(j, j, np.conj(a)), (j, k, r), (k, j, r), (k, k, -a)]
        for i, c, v in entries:
            if i < size and c < size:
                rows.append(i)
                cols.append(c)
                vals.append(v)
    return rows, cols, vals


def build_cmv(coeffs: CoefficientSequence, size: int, variant: str = HALF_LINE, start: int | None = None) -> CmvOperator:
    """Truncated CMV matrix.

    HALF_LINE uses ``alpha_0 .. alpha_{size-1}``.  EXTENDED uses
    ``alpha_start .. alpha_{start+size-1}`` with ``start`` even and ``size``
    even; ``start`` defaults to the even index nearest ``-size/2``.
    """
    if size < 1:
        raise ValueError("size must be positive")
    if variant == HALF_LINE:
        start = 0
    elif variant == EXTENDED:
        if size % 2:
            raise ValueError("extended truncation needs an even size")
        if start is None:
            start = 2 * math.floor(-size / 4)
        if start % 2:
            raise ValueError("extended truncation must start at an even index")
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if coeffs.lo > start or coeffs.hi < start + size - 1:
        raise InsufficientCoefficients(
            f"need alpha_{start}..alpha_{start + size - 1}, have alpha_{coeffs.lo}..alpha_{coeffs.hi}"
        )
    alpha = coeffs.window(start, start + size - 1)
    rho = np.sqrt(1.0 - np.abs(alpha) ** 2)
    idx = np.arange(size)
    even, odd = idx[0::2], idx[1::2]
    wrap = variant == EXTENDED
    lr, lc, lv = _theta_blocks(alpha[even], rho[even], even, size)
    mr, mc, mv = _theta_blocks(alpha[odd], rho[odd], odd, size, wrap=wrap)
    if variant == HALF_LINE:
        mr.append(0)
        mc.append(0)
        mv.append(1.0)
    L = sp.csr_matrix((np.array(lv, dtype=complex), (lr, lc)), shape=(size, size))
    M = sp.csr_matrix((np.array(mv, dtype=complex), (mr, mc)), shape=(size, size))
    C = (L @ M).tocsr()
    C.sum_duplicates()
    C.eliminate_zeros()
    return CmvOperator(size, variant, start, C)


def eigenphases(op: CmvOperator):
    """Eigenvalue arguments in [0, 2pi), sorted, with the matching moduli."""
    if op.size > MAX_EIG_SIZE:
        raise ValueError(f"size {op.size} exceeds the dense eigensolve bound {MAX_EIG_SIZE}")
    try:
        ev = np.linalg.eigvals(op.dense())
    except np.linalg.LinAlgError as exc:
        raise EigensolveFailure(str(exc)) from exc
    if not np.all(np.isfinite(ev)):
        raise EigensolveFailure("non-finite eigenvalues")
    phases = np.mod(np.angle(ev), TWO_PI)
    order = np.argsort(phases, kind="stable")
    return phases[order], np.abs(ev)[order]


# --- periodic approximants ------------------------------------------------------


@dataclass(frozen=True)
class BandSpectrum:
    period: int
    bands: tuple[tuple[float, float], ...]

    @property
    def total_measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.bands))

    def contains(self, theta, pad: float = 0.0) -> np.ndarray:
        theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        inside = np.zeros(theta.shape, dtype=bool)
        for lo, hi in self.bands:
            inside |= (theta >= lo - pad) & (theta <= hi + pad)
            if pad:
                # arcs near 0 / 2pi also reach across the seam
                inside |= (theta - TWO_PI >= lo - pad) & (theta - TWO_PI <= hi + pad)
                inside |= (theta + TWO_PI >= lo - pad) & (theta + TWO_PI <= hi + pad)
        return inside

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "bands": [[lo, hi] for lo, hi in self.bands],
            "total_measure": self.total_measure,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self, header_lines=()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta_lo", "theta_hi"])
        for lo, hi in self.bands:
            w.writerow([format(lo, ".17g"), format(hi, ".17g")])
        return buf.getvalue()


def _period_values(coeffs: CoefficientSequence, period: int) -> np.ndarray:
    if period < 1:
        raise ValueError("period must be positive")
    if len(coeffs) < period:
        raise InsufficientCoefficients(f"need {period} coefficients, have {len(coeffs)}")
    vals = coeffs.values[:period]
    if period % 2:
        vals = np.concatenate([vals, vals])
    return vals


def period_transfer(coeffs: CoefficientSequence, period: int, z: complex) -> Mat2C:
    """Raw product ``A_z(alpha_{p-1}) ... A_z(alpha_0)`` over one (even) period."""
    p = Mat2C.identity()
    for a in _period_values(coeffs, period).tolist():
        p = mul(szego_matrix(a, z), p)
    return p


def discriminant(values: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """``tr(z^{-p/2} A_z(alpha_{p-1}) ... A_z(alpha_0))`` at ``z = e^{i theta}``; p even."""
    theta = np.asarray(theta, dtype=float)
    z = np.exp(1j * theta)
    a, b, c, d = (np.ones_like(z), np.zeros_like(z), np.zeros_like(z), np.ones_like(z))
    for f in values.tolist():
        r = 1.0 / math.sqrt(1.0 - abs(f) ** 2)
        ma, mb, mc, md = r * z, -r * f.conjugate(), -r * f * z, r
        a, b, c, d = ma * a + mb * c, ma * b + mb * d, mc * a + md * c, mc * b + md * d
    return (a + d) * np.exp(-0.5j * values.size * theta)


def _bisect(values, lo, hi, level, iters=60, tol=1e-13):
    flo = discriminant(values, lo).real - level
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = discriminant(values, mid).real - level
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
        if np.all(hi - lo < tol):
            break
    return 0.5 * (lo + hi)


def discriminant_bands(
    coeffs: CoefficientSequence,
    period: int,
    grid_size: int = 16384,
    real_tol: float = 1e-8,
    touch_tol: float = 1e-9,
) -> BandSpectrum:
    """Arcs of ``{theta : |Delta(theta)| <= 2}`` for coefficients of the given period.

    Odd periods are doubled.  Edges are the crossings of Delta through +-2
    located on the grid and refined by bisection; each piece between
    consecutive edges is then classified at its midpoint.
    """
    if grid_size < 8:
        raise ValueError("grid_size too small")
    values = _period_values(coeffs, period)
    theta = np.linspace(0.0, TWO_PI, grid_size + 1)
    delta = discriminant(values, theta)
    scale = np.maximum(1.0, np.abs(delta))
    bad = np.count_nonzero(np.abs(delta.imag) > real_tol * scale)
    if bad > 0.001 * grid_size:
        raise NonRealDiscriminant(f"{bad} of {grid_size} grid points have a non-real discriminant")
    D = delta.real
    D[-1] = D[0]
    edges = []
    for level in (2.0, -2.0):
        s = D - level
        exact = np.flatnonzero(s[:-1] == 0.0)
        edges.extend(theta[exact].tolist())
        cross = np.flatnonzero(s[:-1] * s[1:] < 0)
        if cross.size:
            edges.extend(_bisect(values, theta[cross], theta[cross + 1], level).tolist())
    cuts = np.unique(np.concatenate([[0.0, TWO_PI], np.clip(edges, 0.0, TWO_PI)]))
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    # slack absorbs rounding where Delta only touches +-2 (closed gaps)
    inside = np.abs(discriminant(values, mids).real) <= 2.0 + touch_tol
    bands = []
    for lo, hi, ok in zip(cuts[:-1], cuts[1:], inside):
        if not ok or hi <= lo:
            continue
        if bands and bands[-1][1] == lo:
            bands[-1] = (bands[-1][0], float(hi))
        else:
            bands.append((float(lo), float(hi)))
    return BandSpectrum(values.size, tuple(bands))
