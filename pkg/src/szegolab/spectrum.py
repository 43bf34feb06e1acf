"""Grid estimate of the essential support from Lyapunov exponents and uniformity.

A point ``z`` of the circle lies off the spectrum exactly when ``A_z`` is
uniform with positive exponent.  Each grid point is classified as

* ``resolvent``  -- gamma >= gamma_floor and defect <= defect_cap * gamma,
* ``spectrum``   -- gamma <  gamma_floor,
* ``undecided``  -- gamma >= gamma_floor but the spread over base points is
  large, i.e. what a non-uniform cocycle would look like.

Undecided points are counted as spectrum in the measure estimate, so the
estimate is an upper bound at the tested resolution.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .cmv import TWO_PI, BandSpectrum
from .cocycle import lyapunov_grid
from .symbolic import SubshiftSpec
from .verblunsky import VerblunskyMap

RESOLVENT = "resolvent"
SPECTRUM = "spectrum"
UNDECIDED = "undecided"

DEFAULT_DEFECT_CAP = 0.5


def default_gamma_floor(n: int) -> float:
    return 10.0 / n


def classify(gamma: float, defect: float, gamma_floor: float, defect_cap: float) -> str:
    if gamma_floor <= 0 or defect_cap <= 0:
        raise ValueError("thresholds must be positive")
    if gamma < gamma_floor:
        return SPECTRUM
    if defect <= defect_cap * gamma:
        return RESOLVENT
    return UNDECIDED


def classify_point(
    f: VerblunskyMap,
    spec: SubshiftSpec,
    z: complex,
    n: int,
    samples: int = 8,
    gamma_floor: Optional[float] = None,
    defect_cap: float = DEFAULT_DEFECT_CAP,
) -> str:
    est = lyapunov_grid(f, spec, [z], n, samples)[0]
    floor = default_gamma_floor(n) if gamma_floor is None else gamma_floor
    return classify(est.gamma, est.defect, floor, defect_cap)


@dataclass(frozen=True)
class SpectrumRow:
    theta: float
    gamma: float
    defect: float
    classification: str


@dataclass(frozen=True)
class SpectrumReport:
    grid_size: int
    rows: tuple[SpectrumRow, ...]
    gamma_floor: float
    defect_cap: float
    parameters: dict = field(default_factory=dict)

    @property
    def measure_estimate(self) -> float:
        count = sum(r.classification != RESOLVENT for r in self.rows)
        return TWO_PI / self.grid_size * count

    def counts(self) -> dict:
        out = {RESOLVENT: 0, SPECTRUM: 0, UNDECIDED: 0}
        for r in self.rows:
            out[r.classification] += 1
        return out

    def fraction(self, classification: str) -> float:
        return self.counts()[classification] / self.grid_size

    def thetas(self) -> np.ndarray:
        return np.array([r.theta for r in self.rows])

    def reclassify(self, gamma_floor: float, defect_cap: Optional[float] = None) -> "SpectrumReport":
        """Same estimates, new thresholds."""
        cap = self.defect_cap if defect_cap is None else defect_cap
        rows = tuple(replace(r, classification=classify(r.gamma, r.defect, gamma_floor, cap)) for r in self.rows)
        return replace(self, rows=rows, gamma_floor=gamma_floor, defect_cap=cap)

    def to_dict(self) -> dict:
        return {
            "grid_size": self.grid_size,
            "gamma_floor": self.gamma_floor,
            "defect_cap": self.defect_cap,
            "measure_estimate": self.measure_estimate,
            "counts": self.counts(),
            "parameters": self.parameters,
            "rows": [[r.theta, r.gamma, r.defect, r.classification] for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def to_csv(self, header_lines=()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "gamma", "defect", "class"])
        for r in self.rows:
            w.writerow([format(r.theta, ".17g"), format(r.gamma, ".17g"), format(r.defect, ".17g"), r.classification])
        return buf.getvalue()

    def plot_data(self) -> str:
        """Two whitespace-separated columns, theta and gamma."""
        return "".join(f"{r.theta:.17g} {r.gamma:.17g}\n" for r in self.rows)


def scan(
    f: VerblunskyMap,
    spec: SubshiftSpec,
    grid_size: int,
    n: int,
    samples: int = 8,
    gamma_floor: Optional[float] = None,
    defect_cap: float = DEFAULT_DEFECT_CAP,
) -> SpectrumReport:
    """Classify ``z_k = exp(2 pi i k / grid_size)`` for every k."""
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    floor = default_gamma_floor(n) if gamma_floor is None else float(gamma_floor)
    thetas = TWO_PI * np.arange(grid_size) / grid_size
    estimates = lyapunov_grid(f, spec, np.exp(1j * thetas), n, samples)
    rows = tuple(
        SpectrumRow(float(t), e.gamma, e.defect, classify(e.gamma, e.defect, floor, defect_cap))
        for t, e in zip(thetas, estimates)
    )
    params = {
        "subshift": spec.to_dict(),
        "map": f.to_dict(),
        "n": n,
        "samples": samples,
        "gamma_floor": floor,
        "defect_cap": defect_cap,
        "caveat": "uniformity over Omega is sampled by phases/offsets of one orbit",
    }
    return SpectrumReport(grid_size, rows, floor, defect_cap, params)


@dataclass(frozen=True)
class BandAgreement:
    agreement: float
    matches: int
    grid_size: int
    disagreement_arcs: tuple[tuple[float, float], ...]

    def to_dict(self) -> dict:
        return {
            "agreement": self.agreement,
            "matches": self.matches,
            "grid_size": self.grid_size,
            "disagreement_arcs": [[a, b] for a, b in self.disagreement_arcs],
        }


def compare_with_bands(report: SpectrumReport, bands: BandSpectrum) -> BandAgreement:
    """Fraction of grid points where "not resolvent" coincides with band membership."""
    thetas = report.thetas()
    in_band = bands.contains(thetas)
    spectral = np.array([r.classification != RESOLVENT for r in report.rows])
    agree = in_band == spectral
    arcs = []
    step = TWO_PI / report.grid_size
    for k in np.flatnonzero(~agree):
        t = float(thetas[k])
        if arcs and math.isclose(arcs[-1][1], t, abs_tol=1e-12):
            arcs[-1] = (arcs[-1][0], t + step)
        else:
            arcs.append((t, t + step))
    matches = int(agree.sum())
    return BandAgreement(matches / report.grid_size, matches, report.grid_size, tuple(arcs))
