"""2x2 complex matrices, U(1,1)/SL(2,R) membership and log-scaled products.

Scalar matrices are :class:`Mat2C` named tuples ``(a, b, c, d)`` for
``[[a, b], [c, d]]``.  The ``batch_*`` helpers at the bottom act on the same
layout stored as four equally shaped numpy arrays and are what the grid
scans use.
"""
from __future__ import annotations

import cmath
import math
from typing import NamedTuple

import numpy as np

from .errors import NearSingular, NotInGroup

GROUP_TOL = 1e-9


class Mat2C(NamedTuple):
    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def identity(cls) -> "Mat2C":
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    @classmethod
    def diag(cls, x, y) -> "Mat2C":
        return cls(complex(x), 0j, 0j, complex(y))

    @classmethod
    def from_array(cls, m) -> "Mat2C":
        m = np.asarray(m, dtype=complex)
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def __matmul__(self, other: "Mat2C") -> "Mat2C":
        return mul(self, other)

    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def trace(self) -> complex:
        return self.a + self.d

    def adjoint(self) -> "Mat2C":
        return Mat2C(self.a.conjugate(), self.c.conjugate(), self.b.conjugate(), self.d.conjugate())

    def scale(self, s) -> "Mat2C":
        return Mat2C(s * self.a, s * self.b, s * self.c, s * self.d)

    def inv(self) -> "Mat2C":
        det = self.det()
        if det == 0:
            raise NearSingular("matrix is singular")
        return Mat2C(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def norm(self) -> float:
        """Operator (spectral) norm."""
        return _opnorm(abs(self.a), abs(self.b), abs(self.c), abs(self.d), abs(self.det()))

    def is_finite(self) -> bool:
        return all(cmath.isfinite(x) for x in self)


def _opnorm(a, b, c, d, absdet):
    fro2 = a * a + b * b + c * c + d * d
    disc = max(fro2 * fro2 - 4.0 * absdet * absdet, 0.0)
    return math.sqrt(0.5 * (fro2 + math.sqrt(disc)))


def mul(x: Mat2C, y: Mat2C) -> Mat2C:
    return Mat2C(
        x.a * y.a + x.b * y.c,
        x.a * y.b + x.b * y.d,
        x.c * y.a + x.d * y.c,
        x.c * y.b + x.d * y.d,
    )


J = Mat2C(1 + 0j, 0j, 0j, -1 + 0j)

# Cayley-type unitary taking SU(1,1) to SL(2,R) by conjugation.
U = Mat2C(-1j / math.sqrt(2), 1 / math.sqrt(2), 1j / math.sqrt(2), 1 / math.sqrt(2))
U_INV = U.adjoint()


def _maxabs(m: Mat2C) -> float:
    return max(abs(x) for x in m)


def j_defect(m: Mat2C) -> float:
    """Entrywise max of ``m* J m - J``."""
    r = mul(m.adjoint(), mul(J, m))
    return _maxabs(Mat2C(r.a - 1, r.b, r.c, r.d + 1))


def is_u11(m: Mat2C, tol: float = GROUP_TOL) -> bool:
    return j_defect(m) <= tol


def is_su11(m: Mat2C, tol: float = GROUP_TOL) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return j_defect(m) <= tol and abs(m.det() - 1) <= tol


def is_sl2r(m: Mat2C, tol: float = GROUP_TOL) -> bool:
    return max(abs(x.imag) for x in m) <= tol and abs(m.det() - 1) <= tol


def normalize_det(m: Mat2C) -> Mat2C:
    """Return ``det(m)**(-1/2) * m`` on the principal branch.

    Only defined for ``|det m| = 1``; anything else raises NearSingular.
    """
    det = m.det()
    if abs(abs(det) - 1.0) > 1e-9:
        raise NearSingular(f"|det| = {abs(det)!r} is not 1")
    return m.scale(1.0 / cmath.sqrt(det))


def conjugate_to_sl2r(m: Mat2C) -> Mat2C:
    if not is_su11(m):
        raise NotInGroup("matrix is not in SU(1,1)")
    return mul(U_INV, mul(m, U))


class LogScaledProduct(NamedTuple):
    """``exp(log_scale) * mat`` with ``mat`` kept at unit operator norm."""

    mat: Mat2C
    log_scale: float = 0.0

    @classmethod
    def identity(cls) -> "LogScaledProduct":
        return cls(Mat2C.identity(), 0.0)

    def log_norm(self) -> float:
        return self.log_scale + math.log(self.mat.norm())

    def to_array(self) -> np.ndarray:
        """Dense product; overflows for long products."""
        return math.exp(self.log_scale) * self.mat.to_array()


def absorb(p: LogScaledProduct, m: Mat2C) -> LogScaledProduct:
    """Left-multiply the product by ``m`` and renormalize."""
    r = mul(m, p.mat)
    s = r.norm()
    if s == 0.0 or not math.isfinite(s):
        raise NearSingular("product lost rank or overflowed in one step")
    return LogScaledProduct(r.scale(1.0 / s), p.log_scale + math.log(s))


# --- batched layout: tuple of four ndarrays -------------------------------


def batch_mul(x, y):
    xa, xb, xc, xd = x
    ya, yb, yc, yd = y
    return (xa * ya + xb * yc, xa * yb + xb * yd, xc * ya + xd * yc, xc * yb + xd * yd)


def batch_opnorm(m):
    a, b, c, d = (np.abs(t) for t in m)
    absdet = np.abs(m[0] * m[3] - m[1] * m[2])
    fro2 = a * a + b * b + c * c + d * d
    disc = np.maximum(fro2 * fro2 - 4.0 * absdet * absdet, 0.0)
    return np.sqrt(0.5 * (fro2 + np.sqrt(disc)))


def batch_fro(m):
    return np.sqrt(sum(t.real * t.real + t.imag * t.imag for t in m))


def batch_renormalize(m, log_scale):
    s = batch_fro(m)
    inv = 1.0 / s
    return tuple(t * inv for t in m), log_scale + np.log(s)
