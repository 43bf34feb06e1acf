"""Szego cocycles, transfer products, Lyapunov exponents and dichotomy directions.

Two routes compute transfer products:

* ``transfer`` multiplies raw one-step matrices ``A_z`` one at a time into a
  :class:`~szegolab.mat2.LogScaledProduct`.  It is exact to the letter of
  the cocycle definition and handles negative times.
* ``log_norm_grid`` is the bulk route behind ``lyapunov`` and the spectrum
  scan.  Each one-step matrix is scaled to determinant one and conjugated
  into SL(2,R); norms are unchanged because the scalar is unimodular and
  the conjugation unitary.  Products are then formed as real arrays, in
  chunks reduced pairwise, for many base points and many ``z`` at once.
"""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import mat2
from .errors import DegenerateSplit
from .mat2 import LogScaledProduct, Mat2C, absorb
from .symbolic import RotationCoding, SubshiftSpec, SymbolSequence
from .verblunsky import VerblunskyMap, coefficient_sequence, evaluate, value_index

_CHUNK_ELEMS = 1 << 17


def szego_matrix(alpha: complex, z: complex) -> Mat2C:
    """``(1 - |alpha|^2)^{-1/2} [[z, -conj(alpha)], [-alpha z, 1]]``; det = z."""
    r = 1.0 / math.sqrt(1.0 - abs(alpha) ** 2)
    return Mat2C(r * z, -r * alpha.conjugate(), -r * alpha * z, r + 0j)


def szego_inverse(alpha: complex, z: complex) -> Mat2C:
    r = 1.0 / math.sqrt(1.0 - abs(alpha) ** 2)
    return Mat2C(r / z, r * alpha.conjugate() / z, r * alpha, r + 0j)


@dataclass(frozen=True)
class SzegoCocycle:
    f: VerblunskyMap
    seq: SymbolSequence
    z: complex

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        if abs(abs(self.z) - 1.0) > 1e-12:
            raise ValueError("z must lie on the unit circle")

    @classmethod
    def at_angle(cls, f, seq, theta: float) -> "SzegoCocycle":
        return cls(f, seq, cmath.exp(1j * theta))

    def shift(self, m: int) -> "SzegoCocycle":
        return SzegoCocycle(self.f, self.seq.shift(m), self.z)


def one_step(c: SzegoCocycle, n: int) -> Mat2C:
    return szego_matrix(evaluate(c.f, c.seq, n), c.z)


def transfer(c: SzegoCocycle, n: int) -> LogScaledProduct:
    """``A(n, omega)``: ``A(T^{n-1}w)...A(w)`` for n > 0, inverses for n < 0."""
    p = LogScaledProduct.identity()
    if n == 0:
        return p
    if n > 0:
        alphas = coefficient_sequence(c.f, c.seq, 0, n - 1).values
        for a in alphas.tolist():
            p = absorb(p, szego_matrix(a, c.z))
    else:
        alphas = coefficient_sequence(c.f, c.seq, n, -1).values
        for a in reversed(alphas.tolist()):
            p = absorb(p, szego_inverse(a, c.z))
    return p


# --- bulk real products ------------------------------------------------------


def sl2r_table(values: np.ndarray, zs: np.ndarray):
    """Real SL(2,R) images of the det-normalized one-step matrices.

    Returns four real arrays of shape ``(len(values), len(zs))``.
    """
    f = np.asarray(values, dtype=complex)[:, None]
    z = np.asarray(zs, dtype=complex)[None, :]
    r = 1.0 / np.sqrt(1.0 - np.abs(f) ** 2)
    s = r / np.sqrt(z)
    m = (s * z, -np.conj(f) * s, -f * z * s, s * np.ones_like(z))
    u, ui = mat2.U, mat2.U_INV
    um = mat2.batch_mul(tuple(np.full((1, 1), x) for x in ui), m)
    out = mat2.batch_mul(um, tuple(np.full((1, 1), x) for x in u))
    scale = mat2.batch_fro(out)
    leak = max(float(np.max(np.abs(t.imag) / scale)) for t in out)
    if leak > 1e-9:
        raise mat2.NotInGroup(f"conjugated matrices are not real (relative imag {leak:.3g})")
    return tuple(np.ascontiguousarray(t.real) for t in out)


def _tree_reduce(mats, logs):
    """Ordered product ``M[m-1] ... M[0]`` along axis 0, renormalized per level."""
    while mats[0].shape[0] > 1:
        m = mats[0].shape[0]
        h = m // 2
        early = tuple(t[0 : 2 * h : 2] for t in mats)
        late = tuple(t[1 : 2 * h : 2] for t in mats)
        prod = mat2.batch_mul(late, early)
        plog = logs[0 : 2 * h : 2] + logs[1 : 2 * h : 2]
        prod, plog = mat2.batch_renormalize(prod, plog)
        if m % 2:
            prod = tuple(np.concatenate([p, t[-1:]]) for p, t in zip(prod, mats))
            plog = np.concatenate([plog, logs[-1:]])
        mats, logs = prod, plog
    return tuple(t[0] for t in mats), logs[0]


def log_norm_grid(index: np.ndarray, table) -> np.ndarray:
    """``log ||A(n)||`` for every row of ``index`` and every column of ``table``.

    ``index`` has shape ``(S, n)`` and selects, per base point and step, a
    row of the real one-step ``table`` (arrays of shape ``(V, G)``).
    Result has shape ``(S, G)``.
    """
    index = np.asarray(index)
    S, n = index.shape
    G = table[0].shape[1]
    run = tuple(np.broadcast_to(x, (S, G)).copy() for x in (1.0, 0.0, 0.0, 1.0))
    run_log = np.zeros((S, G))
    chunk = max(1, _CHUNK_ELEMS // (S * G))
    for start in range(0, n, chunk):
        idx = index[:, start : start + chunk].T  # (m, S)
        mats = tuple(t[idx] for t in table)  # (m, S, G)
        logs = np.zeros(mats[0].shape)
        prod, plog = _tree_reduce(mats, logs)
        run = mat2.batch_mul(prod, run)
        run, run_log = mat2.batch_renormalize(run, run_log + plog)
    return run_log + np.log(mat2.batch_opnorm(run))


# --- Lyapunov exponents --------------------------------------------------------


def sample_sequences(spec: SubshiftSpec, samples: int, n: int, window: int = 0) -> list[SymbolSequence]:
    """Base points standing in for all of Omega.

    Rotation codings use phases ``theta + k/samples``; other subshifts use
    the offsets ``k * max(1, n // samples)`` along one orbit.
    """
    if isinstance(spec, RotationCoding):
        horizon = n + window + 1
        return [SymbolSequence(spec.with_phase(spec.theta + k / samples), horizon) for k in range(samples)]
    stride = max(1, n // samples)
    horizon = n + samples * stride + window + 1
    base = SymbolSequence(spec, horizon)
    return [base.shift(k * stride) for k in range(samples)]


def _family_index(f: VerblunskyMap, seqs: Sequence[SymbolSequence], n: int):
    values = None
    rows, row_of = [], []
    for s in seqs:
        vals, index = value_index(f, s, 0, n)
        values, remap = np.unique(vals, return_inverse=True)
        index = remap.reshape(-1)[index]
        # identical base-point rows are computed once so their estimates agree exactly
        for r, existing in enumerate(rows):
            if np.array_equal(existing, index):
                row_of.append(r)
                break
        else:
            row_of.append(len(rows))
            rows.append(index)
    return values, np.stack(rows), np.array(row_of)


@dataclass(frozen=True)
class LyapunovEstimate:
    z: complex
    n: int
    gamma: float
    defect: float
    samples: int
    per_sample: tuple[float, ...] = field(default=(), repr=False)

    @property
    def theta(self) -> float:
        return cmath.phase(self.z) % (2 * math.pi)

    def csv_row(self) -> list[str]:
        return [format(self.theta, ".17g"), format(self.gamma, ".17g"), format(self.defect, ".17g"), str(self.n), str(self.samples)]


LYAPUNOV_CSV_HEADER = ["theta", "gamma", "defect", "n", "samples"]


def estimates_to_csv(estimates: Sequence[LyapunovEstimate], header_lines: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LYAPUNOV_CSV_HEADER)
    for e in estimates:
        w.writerow(e.csv_row())
    return buf.getvalue()


def lyapunov_grid(f: VerblunskyMap, spec: SubshiftSpec, zs, n: int, samples: int) -> list[LyapunovEstimate]:
    """Lyapunov estimates at every ``z`` in ``zs`` from the same base points."""
    if n < 1:
        raise ValueError("n must be positive")
    if samples < 1:
        raise ValueError("samples must be positive")
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    if np.any(np.abs(np.abs(zs) - 1.0) > 1e-12):
        raise ValueError("z must lie on the unit circle")
    seqs = sample_sequences(spec, samples, n, f.window)
    values, rows, row_of = _family_index(f, seqs, n)
    table = sl2r_table(values, zs)
    lognorms = log_norm_grid(rows, table)[row_of]  # (samples, G)
    gammas = lognorms / n
    out = []
    for j, z in enumerate(zs.tolist()):
        g = gammas[:, j]
        out.append(
            LyapunovEstimate(
                z=z,
                n=n,
                gamma=float(np.mean(g)),
                defect=float(np.max(g) - np.min(g)),
                samples=samples,
                per_sample=tuple(float(x) for x in g),
            )
        )
    return out


def lyapunov(f: VerblunskyMap, spec: SubshiftSpec, z: complex, n: int, samples: int = 8) -> LyapunovEstimate:
    return lyapunov_grid(f, spec, [z], n, samples)[0]


def uniformity_profile(
    f: VerblunskyMap, spec: SubshiftSpec, z: complex, n_list: Sequence[int], samples: int = 8
) -> list[LyapunovEstimate]:
    """Estimates along increasing ``n``; the defect column is the uniformity diagnostic."""
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be increasing")
    return [lyapunov(f, spec, z, n, samples) for n in n_list]


# --- exponential dichotomy -------------------------------------------------------


@dataclass(frozen=True)
class DichotomyDirections:
    stable: np.ndarray
    unstable: np.ndarray
    decay_rate: float
    log_singular_ratio: float
    n: int

    def stable_log_norm(self, n: Optional[int] = None) -> float:
        """``log ||A(n, omega) stable||`` implied by the singular-value split."""
        return -self.decay_rate * (self.n if n is None else n)


def _canonical(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) - 1e-12 * np.arange(v.size)))
    return v * (abs(v[k]) / v[k])


def _split(p: LogScaledProduct, log_det: float):
    m = p.mat.to_array()
    _, s, vh = np.linalg.svd(m)
    log_smax = p.log_scale + math.log(s[0])
    # |det| is known exactly, so the small singular value is recovered without cancellation
    log_smin = log_det - log_smax
    return _canonical(vh[1].conj()), log_smax, log_smin


def dichotomy_directions(c: SzegoCocycle, n: int, min_ratio: float = 2.0) -> DichotomyDirections:
    """Stable/unstable directions at the base point from ``A(n)`` and ``A(-n)``.

    Raises DegenerateSplit if the singular values of ``A(n)`` are within a
    factor ``min_ratio`` (no visible dichotomy) or the directions coincide.
    """
    if n < 1:
        raise ValueError("n must be positive")
    log_det = n * math.log(abs(c.z))
    forward = transfer(c, n)
    stable, log_smax, log_smin = _split(forward, log_det)
    log_ratio = log_smax - log_smin
    if log_ratio < math.log(min_ratio):
        raise DegenerateSplit(f"singular values of A({n}) within factor {math.exp(log_ratio):.4g}")
    unstable, _, _ = _split(transfer(c, -n), -log_det)
    overlap = min(1.0, abs(np.vdot(stable, unstable)))
    if math.acos(overlap) < 1e-6:
        raise DegenerateSplit("stable and unstable directions coincide")
    return DichotomyDirections(stable, unstable, -log_smin / n, log_ratio, n)


def projective_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Sine of the angle between the complex lines through u and v."""
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    # norm of the part of v orthogonal to u; no cancellation near 0
    return float(min(1.0, np.linalg.norm(v - np.vdot(u, v) * u)))
