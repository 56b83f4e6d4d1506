"""Command-line entry point.

Subcommands: maximize, certify, expose, fidelity, robust, plot.  Every JSON
document carries the run configuration under "config"; numbers are written
with 12 significant digits.  Failures print a JSON object to stderr and exit
nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

SIG = 12


class CLIError(Exception):
    """A user-facing failure with a short machine-readable kind."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def round_sig(obj):
    """Recursively round floats to 12 significant digits for serialization."""
    if isinstance(obj, dict):
        return {str(k): round_sig(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_sig(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not np.isfinite(v):
            return None
        return float(format(v, f".{SIG}g"))
    if isinstance(obj, np.ndarray):
        return round_sig(obj.tolist())
    return obj


def to_json(obj) -> str:
    return json.dumps(round_sig(obj), indent=2, sort_keys=True) + "\n"


def _error(kind: str, message: str, code: int = 1) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")
    return code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.exit(_error("usage", message, 2))


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"tolerance must be > 0, got {text}")
    return v


def _check_writable(path: str | None) -> None:
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise CLIError("output", f"cannot write to {path}")
    if Path(path).is_dir():
        raise CLIError("output", f"{path} is a directory")


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CLIError("input", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise CLIError("input", f"{path} is not valid JSON: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _config(args, **extra) -> dict:
    skip = {"func", "timing"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    cfg.update(extra)
    return cfg


# -- subcommands ---------------------------------------------------------------------------


def cmd_maximize(args) -> dict:
    from .hardy import maximize_hardy
    from .quantum import realization_to_dict

    t0 = time.perf_counter()
    res = maximize_hardy(args.parties, restarts=args.restarts, seed=args.seed)
    doc = {"config": _config(args), "result": res.to_dict(), "realization": realization_to_dict(res.realization)}
    if args.timing:
        doc["runtime_ms"] = (time.perf_counter() - t0) * 1e3
    return doc


def cmd_certify(args) -> dict:
    from .geometry import membership
    from .hardy import hardy_check
    from .quantum import behavior_from_dict

    try:
        b = behavior_from_dict(_read_json(args.behavior))
        b.validate()
    except (KeyError, ValueError, TypeError) as exc:
        raise CLIError("input", f"malformed behavior: {exc}") from exc
    report = hardy_check(b, args.eps_zero)
    doc = {"config": _config(args), "hardy": report.to_dict()}
    if b.parties == 3:
        m = membership(b.correlators)
        doc["local"] = m.local
        if not m.local:
            doc["separating"] = {"functional": m.separating.support(), "bound": m.bound, "violation": m.violation}
    else:
        doc["local"] = None
    return doc


def cmd_expose(args) -> dict:
    from .geometry import (
        HARDY_FUNCTIONAL,
        bell_operator,
        dual_certificate,
        exposing_functional,
        hardy_point,
        mermin_equivalence,
    )
    from .hardy import ghz_complex_realization

    target = hardy_point()
    ex = exposing_functional(target, exact=not args.float)
    dual = dual_certificate(target, exact=not args.float)
    r = ghz_complex_realization()
    Wm = bell_operator(HARDY_FUNCTIONAL, r)
    residual = float(np.linalg.norm(Wm @ r.state - 2 * r.state))
    lam = float(np.linalg.eigvalsh(Wm).max())
    mermin, witness = mermin_equivalence(ex.functional)
    hardy_mermin, hardy_witness = mermin_equivalence(HARDY_FUNCTIONAL)
    return {
        "config": _config(args),
        "primal_value": ex.value,
        "functional": ex.functional.support(),
        "functional_classical_bound": ex.functional.classical_bound(),
        "dual_value": dual.value,
        "dual_weights": {str(k): float(dual.weights[k]) for k in dual.support},
        "dual_support_size": len(dual.support),
        "reconstruction_error": dual.reconstruction_error,
        "hardy_functional": HARDY_FUNCTIONAL.support(),
        "hardy_functional_value": HARDY_FUNCTIONAL(target),
        "hardy_functional_classical_bound": HARDY_FUNCTIONAL.classical_bound(),
        "eigen_residual": residual,
        "lambda_max": lam,
        "mermin": bool(mermin and hardy_mermin),
        "mermin_witness": (witness or hardy_witness).to_dict() if (witness or hardy_witness) else None,
    }


def cmd_fidelity(args) -> dict:
    from .quantum import realization_from_dict
    from .swap import calibrate, fidelity, measurement_merit

    try:
        doc = _read_json(args.realization)
        # a maximize report carries its realization under "realization"
        r = realization_from_dict(doc.get("realization", doc))
    except (KeyError, ValueError, TypeError) as exc:
        raise CLIError("input", f"malformed realization: {exc}") from exc
    if r.parties != 3:
        raise CLIError("input", "the SWAP figures of merit need three parties")
    rep = fidelity(r, args.reference)
    cal = calibrate()
    return {
        "config": _config(args),
        "calibration": {"reference": cal.reference, "x_sign": cal.x_sign},
        "fidelity": rep.to_dict(),
        "T": [measurement_merit(r, k).to_dict() for k in range(3)],
    }


def cmd_robust(args) -> str:
    from .npa import MAX_LEVEL, parse_grid, sweep, sweep_csv

    if not 1 <= args.level <= MAX_LEVEL:
        raise CLIError("usage", f"level must be in 1..{MAX_LEVEL}")
    try:
        e1, e2 = parse_grid(args.eps1), parse_grid(args.eps2)
    except ValueError as exc:
        raise CLIError("usage", str(exc)) from exc
    if any(not 0 <= v <= 1 / 8 for v in e1) or any(v < 0 for v in e2):
        raise CLIError("usage", "eps1 must lie in [0, 1/8] and eps2 must be nonnegative")
    results = sweep(e1, e2, args.level, args.which, tol=args.sdp_tol)
    return sweep_csv(results, timing=args.timing)


def cmd_plot(args) -> str:
    from .npa import read_sweep_csv
    from .plot import sweep_svg

    try:
        with open(args.input) as fh:
            rows = read_sweep_csv(fh.read())
    except OSError as exc:
        raise CLIError("input", f"cannot read {args.input}: {exc.strerror}") from exc
    except (ValueError, KeyError) as exc:
        raise CLIError("input", f"malformed sweep table: {exc}") from exc
    if not rows:
        raise CLIError("input", "sweep table is empty")
    return sweep_svg(rows, title=args.title, source=Path(args.input).name)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hardycert", description="Hardy-paradox self-testing toolkit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help):
        return sub.add_parser(name, help=help, parents=[common])

    m = add("maximize", "maximize the Hardy probability")
    m.add_argument("--parties", type=int, choices=(2, 3), default=3)
    m.add_argument("--restarts", type=int, default=16)
    m.add_argument("--out")
    m.add_argument("--timing", action="store_true", help="include wall-clock runtime")
    m.set_defaults(func=cmd_maximize)

    c = add("certify", "Hardy report and locality test for a behavior")
    c.add_argument("--behavior", required=True)
    c.add_argument("--eps-zero", type=_positive, default=1e-9)
    c.add_argument("--out")
    c.set_defaults(func=cmd_certify)

    e = add("expose", "exposing functional, dual weights and Bell operator")
    e.add_argument("--out")
    e.add_argument("--float", action="store_true", help="floating-point simplex instead of exact rationals")
    e.set_defaults(func=cmd_expose)

    f = add("fidelity", "SWAP fidelity and measurement merits of a realization")
    f.add_argument("--realization", required=True)
    f.add_argument("--reference", choices=("ghz", "psistar"))
    f.add_argument("--out")
    f.set_defaults(func=cmd_fidelity)

    r = add("robust", "NPA robustness sweep to CSV")
    r.add_argument("which", choices=("state", "measurement"))
    r.add_argument("--level", type=int, required=True)
    r.add_argument("--eps1", required=True, help="a:b:n grid or single value")
    r.add_argument("--eps2", required=True, help="a:b:n grid or single value")
    r.add_argument("--sdp-tol", type=_positive, default=1e-9)
    r.add_argument("--out")
    r.add_argument("--timing", action="store_true", help="fill the runtime_ms column")
    r.set_defaults(func=cmd_robust)

    g = add("plot", "SVG figure of a sweep CSV")
    g.add_argument("--in", dest="input", required=True)
    g.add_argument("--out")
    g.add_argument("--title", default="")
    g.set_defaults(func=cmd_plot)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        _check_writable(getattr(args, "out", None))
        doc = args.func(args)
        _emit(doc if isinstance(doc, str) else to_json(doc), args.out)
    except CLIError as exc:
        return _error(exc.kind, str(exc))
    except Exception as exc:  # reported, never a bare traceback
        return _error(type(exc).__name__, str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
