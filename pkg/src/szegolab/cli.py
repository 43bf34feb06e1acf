"""Command-line front end.

Every subcommand reads a JSON config (``--config``), lets a few flags
override it (flags > config > defaults), writes its files into ``--out``
and embeds the resolved config in each file.  Nothing is random and no
timestamps are written, so reruns are byte-identical.

Exit codes: 0 success (``bosh``: SupportsB), 1 invalid input,
2 ``bosh`` verdict Weak, 3 ``bosh`` verdict Inconclusive.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .boshernitzan import SUPPORTS_B, WEAK, bosh_scan, convergent_lengths, near_convergent_lengths
from .cmv import EXTENDED, HALF_LINE, build_cmv, discriminant_bands, eigenphases
from .cocycle import estimates_to_csv, lyapunov_grid
from .errors import ConfigError, SzegoLabError
from .rotations import ContinuedFraction, classify_beta, continued_fraction, reliable_continued_fraction
from .spectrum import compare_with_bands, scan
from .symbolic import Periodic, RotationCoding, SymbolSequence, rotation_approximant, spec_from_dict
from .verblunsky import coefficient_sequence, map_from_dict

EXIT_OK, EXIT_INVALID, EXIT_WEAK, EXIT_INCONCLUSIVE = 0, 1, 2, 3


# --- config validation ------------------------------------------------------------


def _int(name, lo=1):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v):
            raise ConfigError(name, f"expected an integer, got {v!r}")
        if int(v) < lo:
            raise ConfigError(name, f"must be >= {lo}")
        return int(v)

    return check


def _float(name, positive=False, open_unit=False):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(name, f"expected a finite number, got {v!r}")
        if positive and v <= 0:
            raise ConfigError(name, "must be positive")
        if open_unit and not 0 < v < 1:
            raise ConfigError(name, "must lie in (0, 1)")
        return float(v)

    return check


def _optional(check):
    return lambda v: None if v is None else check(v)


def _int_list(name):
    def check(v):
        if not isinstance(v, list) or not v:
            raise ConfigError(name, "expected a nonempty list of integers")
        return [_int(f"{name}[{i}]")(x) for i, x in enumerate(v)]

    return check


def _lengths(v):
    if v in ("convergents", "near-convergents"):
        return v
    return _int_list("lengths")(v)


def _variant(v):
    if v not in (HALF_LINE, EXTENDED):
        raise ConfigError("variant", f"expected {HALF_LINE!r} or {EXTENDED!r}")
    return v


def _bool(name):
    def check(v):
        if not isinstance(v, bool):
            raise ConfigError(name, "expected true or false")
        return v

    return check


def _float_list(name):
    def check(v):
        if not isinstance(v, list) or not v:
            raise ConfigError(name, "expected a nonempty list of numbers")
        return [_float(f"{name}[{i}]")(x) for i, x in enumerate(v)]

    return check


# key -> (default, validator); subshift/map handled separately
COMMANDS = {
    "bosh": {
        "lengths": (None, _optional(_lengths)),
        "sample_length": (1_000_000, _int("sample_length")),
        "threshold": (0.1, _float("threshold", positive=True)),
    },
    "lyapunov": {
        "grid": (16, _int("grid")),
        "thetas": (None, _optional(_float_list("thetas"))),
        "n": (10_000, _int("n")),
        "n_list": (None, _optional(_int_list("n_list"))),
        "samples": (8, _int("samples")),
    },
    "spectrum": {
        "grid": (1024, _int("grid", lo=64)),
        "n": (10_000, _int("n")),
        "samples": (8, _int("samples")),
        "gamma_floor": (None, _optional(_float("gamma_floor", positive=True))),
        "defect_cap": (0.5, _float("defect_cap", positive=True)),
        "approximant_order": (None, _optional(_int("approximant_order"))),
        "band_grid": (16384, _int("band_grid", lo=8)),
    },
    "classify-beta": {
        "alpha": (None, _optional(_float("alpha", open_unit=True))),
        "quotients": (None, _optional(_int_list("quotients"))),
        "depth": (None, _optional(_int("depth"))),
        "beta": (None, _float("beta", open_unit=True)),
        "search_bound": (50, _int("search_bound")),
        "tol": (1e-9, _float("tol", positive=True)),
        "quotient_bound": (50, _int("quotient_bound")),
    },
    "cmv-eig": {
        "size": (256, _int("size")),
        "variant": (EXTENDED, _variant),
        "start": (None, _optional(_int("start", lo=-(1 << 40)))),
        "write_matrix": (False, _bool("write_matrix")),
    },
}
NEEDS = {
    "bosh": ("subshift",),
    "lyapunov": ("subshift", "map"),
    "spectrum": ("subshift", "map"),
    "classify-beta": (),
    "cmv-eig": ("subshift", "map"),
}
FLAG_KEYS = {"grid": "grid", "steps": "n", "samples": "samples"}


def resolve_config(command: str, raw: dict, flags: dict) -> dict:
    """Validate ``raw`` for ``command`` and merge flags over it over defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config", "expected a JSON object")
    table = COMMANDS[command]
    allowed = set(table) | set(NEEDS[command])
    for key in sorted(raw):
        if key not in allowed:
            raise ConfigError(key, f"unknown key for '{command}'")
    merged = dict(raw)
    for flag, key in FLAG_KEYS.items():
        if flags.get(flag) is not None:
            if key not in table:
                raise ConfigError(f"--{flag}", f"not used by '{command}'")
            merged[key] = flags[flag]
    out = {}
    for key in NEEDS[command]:
        if key not in merged:
            raise ConfigError(key, "missing")
        out[key] = merged[key]
    if "subshift" in out:
        spec_from_dict(out["subshift"])
        out["subshift"] = spec_from_dict(out["subshift"]).to_dict()
    if "map" in out:
        out["map"] = map_from_dict(out["map"]).to_dict()
    for key, (default, check) in table.items():
        value = merged.get(key, default)
        if value is None and key == "beta":
            raise ConfigError(key, "missing")
        out[key] = check(value) if value is not None else None
    return out


# --- output helpers -----------------------------------------------------------------


def _provenance(command, config):
    return f"config: {json.dumps({'command': command, **config}, sort_keys=True)}"


def _write(out_dir: Path, name: str, text: str):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text, encoding="utf-8", newline="\n")


def _write_json(out_dir, name, command, config, payload):
    doc = {"config": {"command": command, **config}, "result": payload}
    _write(out_dir, name, json.dumps(doc, sort_keys=True, indent=1) + "\n")


# --- commands -----------------------------------------------------------------------


def cmd_bosh(config: dict, out_dir: Path) -> int:
    spec = spec_from_dict(config["subshift"])
    L = config["sample_length"]
    lengths = config["lengths"]
    rule = "user-supplied"
    if lengths is None:
        lengths = "convergents" if isinstance(spec, RotationCoding) else "powers-of-two"
    if lengths == "convergents":
        if not isinstance(spec, RotationCoding):
            raise ConfigError("lengths", "convergent lengths need a rotation coding")
        lengths, rule = convergent_lengths(spec, L), "convergent denominators q_k"
    elif lengths == "near-convergents":
        if not isinstance(spec, RotationCoding):
            raise ConfigError("lengths", "convergent lengths need a rotation coding")
        lengths, rule = near_convergent_lengths(spec, L), "convergent denominators q_k and q_k + 1"
    elif lengths == "powers-of-two":
        lengths, rule = [1 << k for k in range(int(math.log2(max(L // 100, 1))) + 1)], "powers of two"
    if not lengths:
        raise ConfigError("sample_length", "too short for any tested length")
    seq = SymbolSequence(spec, horizon=L + max(lengths) + 1)
    report = bosh_scan(seq, lengths, L, config["threshold"], length_rule=rule)
    prov = _provenance("bosh", config)
    _write_json(out_dir, "bosh.json", "bosh", config, report.to_dict())
    _write(out_dir, "bosh.csv", report.to_csv([prov]))
    print(f"verdict {report.verdict}  C~{report.constant_estimate:.6g}  lengths {list(report.lengths)}")
    if report.verdict == SUPPORTS_B:
        return EXIT_OK
    return EXIT_WEAK if report.verdict == WEAK else EXIT_INCONCLUSIVE


def cmd_lyapunov(config: dict, out_dir: Path) -> int:
    spec = spec_from_dict(config["subshift"])
    f = map_from_dict(config["map"])
    if config["thetas"] is not None:
        thetas = np.array(sorted(t % (2 * math.pi) for t in config["thetas"]))
    else:
        thetas = 2 * math.pi * np.arange(config["grid"]) / config["grid"]
    zs = np.exp(1j * thetas)
    n_list = config["n_list"] or [config["n"]]
    estimates = []
    for n in n_list:
        estimates.extend(lyapunov_grid(f, spec, zs, n, config["samples"]))
    _write(out_dir, "lyapunov.csv", estimates_to_csv(estimates, [_provenance("lyapunov", config)]))
    for e in estimates[: min(4, len(estimates))]:
        print(f"theta {e.theta:.6f}  n {e.n}  gamma {e.gamma:.6g}  defect {e.defect:.3g}")
    return EXIT_OK


def _approximant_bands(spec, f, order, band_grid):
    if isinstance(spec, Periodic):
        period = len(spec.word)
        coeffs = coefficient_sequence(f, SymbolSequence(spec, 4 * period + 4 * f.window + 8), 0, 2 * period)
        return discriminant_bands(coeffs, period, band_grid), {"period": period, "source": "exact periodic"}
    if order is None:
        return None, None
    if not isinstance(spec, RotationCoding):
        raise ConfigError("approximant_order", "periodic approximants need a rotation coding")
    approx = rotation_approximant(spec, order)
    period = approx.continued_fraction.denominators[-1]
    seq = SymbolSequence(approx, 4 * period + 4 * f.window + 8)
    coeffs = coefficient_sequence(f, seq, 0, 2 * period)
    return discriminant_bands(coeffs, period, band_grid), {"period": period, "source": f"convergent order {order}"}


def cmd_spectrum(config: dict, out_dir: Path) -> int:
    spec = spec_from_dict(config["subshift"])
    f = map_from_dict(config["map"])
    report = scan(f, spec, config["grid"], config["n"], config["samples"], config["gamma_floor"], config["defect_cap"])
    prov = _provenance("spectrum", config)
    _write_json(out_dir, "spectrum.json", "spectrum", config, report.to_dict())
    _write(out_dir, "spectrum.csv", report.to_csv([prov]))
    _write(out_dir, "spectrum_gamma.dat", f"# {prov}\n# theta gamma\n" + report.plot_data())
    print(f"measure estimate {report.measure_estimate:.6f}  counts {report.counts()}")
    bands, info = _approximant_bands(spec, f, config["approximant_order"], config["band_grid"])
    if bands is not None:
        agreement = compare_with_bands(report, bands)
        payload = {"bands": bands.to_dict(), "approximant": info, "comparison": agreement.to_dict()}
        _write_json(out_dir, "bands.json", "spectrum", config, payload)
        _write(out_dir, "bands.csv", bands.to_csv([prov]))
        print(f"band measure {bands.total_measure:.6f}  agreement {agreement.agreement:.4f}")
    return EXIT_OK


def cmd_classify_beta(config: dict, out_dir: Path) -> int:
    if (config["alpha"] is None) == (config["quotients"] is None):
        raise ConfigError("alpha", "give exactly one of 'alpha' or 'quotients'")
    if config["quotients"] is not None:
        cf = ContinuedFraction.from_quotients(config["quotients"], config["depth"])
    else:
        if config["depth"] is None:
            cf = reliable_continued_fraction(config["alpha"])
        else:
            cf = continued_fraction(config["alpha"], config["depth"])
    result = classify_beta(cf, config["beta"], config["search_bound"], config["tol"], config["quotient_bound"])
    _write_json(out_dir, "classify_beta.json", "classify-beta", config, result.to_dict())
    print(f"verdict {result.verdict}  case_a {result.case_a}  case_b {result.case_b}  rational {result.rational_beta}")
    return EXIT_OK


def cmd_cmv_eig(config: dict, out_dir: Path) -> int:
    spec = spec_from_dict(config["subshift"])
    f = map_from_dict(config["map"])
    size = config["size"]
    start = config["start"]
    if config["variant"] == EXTENDED and start is None:
        start = 2 * math.floor(-size / 4)
    lo = 0 if config["variant"] == HALF_LINE else start
    seq = SymbolSequence(spec, abs(lo) + size + f.window + 2)
    coeffs = coefficient_sequence(f, seq, lo, lo + size - 1)
    op = build_cmv(coeffs, size, config["variant"], start if config["variant"] == EXTENDED else None)
    phases, moduli = eigenphases(op)
    prov = _provenance("cmv-eig", config)
    lines = [f"# {prov}", "phase,modulus"]
    lines += [f"{p:.17g},{m:.17g}" for p, m in zip(phases, moduli)]
    _write(out_dir, "eigenphases.csv", "\n".join(lines) + "\n")
    if config["write_matrix"]:
        _write(out_dir, "cmv_matrix.txt", f"# {prov}\n" + op.to_triplets())
    print(f"{size} eigenvalues, moduli in [{moduli.min():.6g}, {moduli.max():.6g}]")
    return EXIT_OK


HANDLERS = {
    "bosh": cmd_bosh,
    "lyapunov": cmd_lyapunov,
    "spectrum": cmd_spectrum,
    "classify-beta": cmd_classify_beta,
    "cmv-eig": cmd_cmv_eig,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="szegolab", description="Szego cocycle and CMV spectrum laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--grid", type=int, help="number of grid points on the circle")
        p.add_argument("--steps", type=int, help="cocycle steps n")
        p.add_argument("--samples", type=int, help="base-point samples")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError("--config", str(exc)) from None
        except json.JSONDecodeError as exc:
            raise ConfigError("--config", f"malformed JSON: {exc}") from None
        flags = {"grid": args.grid, "steps": args.steps, "samples": args.samples}
        config = resolve_config(args.command, raw, flags)
        return HANDLERS[args.command](config, Path(args.out))
    except SzegoLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
