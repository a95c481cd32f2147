"""Command-line front end.

Exit codes: 0 success, 2 invalid arguments or input, 3 numerical failure.
Computed numbers are written with 12 significant digits; echoed input
parameters keep full precision so that saved spectra can be recomputed
exactly by ``verify --from``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

import numpy as np

from . import __version__
from .analysis import critical_coupling, verify_propositions
from .bands import LatticeSpec, Spectrum, kp_spectrum, lattice_spectrum
from .diophantine import approx_quality, cf_expand, convergents, parse_theta
from .errors import InvalidInputError, NumericalError, ResonanceError
from .geoscatter import OnionGraph, onion_limit_smatrix, onion_smatrix
from .vertex import (
    Delta,
    DeltaPrime,
    DeltaPrimeS,
    PermInvariant,
    ScatteringData,
    VertexCoupling,
    star_smatrix,
)

__all__ = ["parse_coupling", "format_coupling", "run", "main"]

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
SPECTRUM_RTOL = 1e-9

_FAMILIES = {
    "delta": ("c",),
    "dprime": ("C",),
    "dprimes": ("D",),
    "perm": ("A", "B"),
}
COUPLING_PARAMS = {"c", "C", "D", "A", "B"}


def parse_coupling(s: str) -> VertexCoupling:
    """Parse ``delta:c=`` / ``dprime:C=`` / ``dprimes:D=`` / ``perm:A=,B=`` strings."""
    family, sep, rest = s.strip().partition(":")
    if not sep or family not in _FAMILIES:
        raise InvalidInputError(
            f"bad coupling family {family!r} in {s!r}; expected one of {', '.join(_FAMILIES)}")
    names = _FAMILIES[family]
    values: dict[str, float] = {}
    for token in rest.split(","):
        name, eq, raw = token.partition("=")
        name = name.strip()
        if not eq or name not in names:
            raise InvalidInputError(f"unexpected token {token!r} in coupling {s!r}")
        if name in values:
            raise InvalidInputError(f"duplicate parameter {name!r} in coupling {s!r}")
        try:
            v = float(raw)
        except ValueError:
            raise InvalidInputError(f"bad value {raw!r} for {name} in coupling {s!r}") from None
        if not math.isfinite(v):
            raise InvalidInputError(f"non-finite value {raw!r} for {name} in coupling {s!r}")
        values[name] = v
    missing = [n for n in names if n not in values]
    if missing:
        raise InvalidInputError(f"missing parameter {missing[0]!r} in coupling {s!r}")
    if family == "delta":
        return Delta(values["c"])
    if family == "dprime":
        if values["C"] == 0.0:
            print("warning: dprime:C=0 is the free vertex; using delta:c=0", file=sys.stderr)
        return DeltaPrime(values["C"])
    if family == "dprimes":
        return DeltaPrimeS(values["D"])
    return PermInvariant(values["A"], values["B"])


def format_coupling(c: VertexCoupling) -> str:
    if isinstance(c, Delta):
        return f"delta:c={c.c!r}"
    if isinstance(c, DeltaPrime):
        return f"dprime:C={c.C!r}"
    if isinstance(c, DeltaPrimeS):
        return f"dprimes:D={c.D!r}"
    return f"perm:A={c.A!r},B={c.B!r}"


# ---------------------------------------------------------------------------
# output helpers


def _num(x: float) -> float:
    return float(f"{x:.12g}") + 0.0  # no negative zero


def _fmt(x: float) -> str:
    return f"{_num(x):.12g}"


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text: str) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        _write_atomic(args.out, text)


def _positive_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s!r}")
    return v


def _finite_float(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {s!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {s!r}")
    return v


def _kgrid(kmin: float, kmax: float, samples: int) -> np.ndarray:
    if not (0 < kmin <= kmax):
        raise InvalidInputError(f"invalid momentum range [{kmin}, {kmax}]; need 0 < kmin <= kmax")
    return np.linspace(kmin, kmax, samples)


# ---------------------------------------------------------------------------
# subcommands

SCATTER_HEADER = ("k", "re_r", "im_r", "re_t", "im_t", "unitarity_defect")


def _scatter_output(args, meta: dict, data: list[ScatteringData], skipped: list[float]) -> str:
    rows = [(d.k, d.r.real, d.r.imag, d.t.real, d.t.imag, d.unitarity_defect) for d in data]
    if args.format == "csv":
        if skipped:
            print(f"note: skipped {len(skipped)} pole(s)", file=sys.stderr)
        return _csv_text(SCATTER_HEADER, rows)
    meta = dict(meta, skipped_k=[_num(k) for k in skipped])
    return _dump_json({
        "meta": meta,
        "rows": [dict(zip(SCATTER_HEADER, map(_num, row))) for row in rows],
    })


def cmd_scatter(args) -> int:
    coupling = parse_coupling(args.coupling)
    data = [star_smatrix(coupling, args.n, float(k))
            for k in _kgrid(args.kmin, args.kmax, args.samples)]
    meta = {"coupling": format_coupling(coupling), "n": args.n}
    _emit(args, _scatter_output(args, meta, data, []))
    return EXIT_OK


def cmd_onion(args) -> int:
    N = args.N
    ell = args.tau / N if args.tau is not None else args.ell
    if ell is None:
        raise InvalidInputError("onion needs --ell or --tau")
    tau = N * ell
    data, skipped = [], []
    g = OnionGraph(args.n, N, ell, args.c)
    for k in _kgrid(args.kmin, args.kmax, args.samples):
        try:
            if args.limit:
                data.append(onion_limit_smatrix(args.n, tau, args.c, float(k)))
            else:
                data.append(onion_smatrix(g, float(k)))
        except ResonanceError:
            skipped.append(float(k))
    meta = {"n": args.n, "N": N, "ell": ell, "c": args.c, "tau": tau, "limit": bool(args.limit)}
    _emit(args, _scatter_output(args, meta, data, skipped))
    return EXIT_OK


def _spectrum_payload(spec: Spectrum, extra: dict) -> dict:
    meta = dict(extra)
    meta["e_max"] = spec.e_max
    solver = dict(spec.meta.get("solver", {}))
    meta["solver"] = solver
    for key in ("approximate", "negative_energies", "note"):
        if key in spec.meta:
            meta[key] = spec.meta[key]
    return {
        "meta": meta,
        "intervals": [{"kind": iv.kind, "lo": _num(iv.lo), "hi": _num(iv.hi)}
                      for iv in spec.intervals],
    }


def _spectrum_text(args, spec: Spectrum, extra: dict) -> str:
    if args.format == "csv":
        rows = [(i, iv.kind, iv.lo, iv.hi) for i, iv in enumerate(spec.intervals)]
        return _csv_text(("index", "kind", "lo_energy", "hi_energy"), rows)
    return _dump_json(_spectrum_payload(spec, extra))


def _bands_spectrum(coupling, l1, l2, emax, negative, resolution) -> Spectrum:
    return lattice_spectrum(LatticeSpec(l1, l2, coupling), emax,
                            negative=negative, resolution=resolution)


def cmd_bands(args) -> int:
    coupling = parse_coupling(args.coupling)
    spec = _bands_spectrum(coupling, args.l1, args.l2, args.emax, args.negative, args.resolution)
    extra = {"coupling": format_coupling(coupling), "l1": args.l1, "l2": args.l2}
    _emit(args, _spectrum_text(args, spec, extra))
    return EXIT_OK


def cmd_kp(args) -> int:
    coupling = parse_coupling(args.coupling)
    spec = kp_spectrum(args.ell, coupling, args.emax, negative=args.negative)
    extra = {"coupling": format_coupling(coupling), "ell": args.ell}
    _emit(args, _spectrum_text(args, spec, extra))
    return EXIT_OK


def cmd_classify(args) -> int:
    theta = parse_theta(args.theta)
    cf = cf_expand(theta, args.depth)
    conv = convergents(cf, len(cf))
    quality = approx_quality(theta, max(args.depth, 2))
    if args.format == "csv":
        vals = list(quality.values) or [0.0] * len(conv)
        terms = (cf.a0,) + cf.quotients
        rows = [(i, a, c.p, c.q, vals[i] if i < len(vals) else 0.0)
                for i, (a, c) in enumerate(zip(terms, conv))]
        _emit(args, _csv_text(("index", "a", "p", "q", "quality"), rows))
        return EXIT_OK
    _emit(args, _dump_json({
        "theta": theta.label,
        "value": _num(float(theta)),
        "a0": cf.a0,
        "quotients": list(cf.quotients),
        "exact": cf.exact,
        "convergents": [[c.p, c.q] for c in conv],
        "quality": [_num(v) for v in quality.values],
        "min_quality": _num(quality.estimate),
        "global_min_quality": _num(quality.global_min),
        "rational": quality.rational,
    }))
    return EXIT_OK


def cmd_critical(args) -> int:
    theta = parse_theta(args.theta)
    l2 = args.l2 if args.l2 is not None else args.l1 * float(theta)
    c = critical_coupling(theta, args.l1, l2, args.emax)
    L = max(args.l1, l2)
    payload = {"theta": theta.label, "l1": args.l1, "l2": l2, "e_max": args.emax,
               "critical_c": _num(c), "critical_cL": _num(c * L)}
    if args.format == "csv":
        _emit(args, _csv_text(list(payload), [list(payload.values())]))
    else:
        _emit(args, _dump_json(payload))
    return EXIT_OK


def _report_payload(coupling, l1, l2, report) -> dict:
    d = report.to_dict()
    d["gap_widths"] = [_num(w) for w in d["gap_widths"]]
    for v in d["bound_violations"]:
        v["interval"] = [_num(x) for x in v["interval"]]
        v["bound"], v["value"] = _num(v["bound"]), _num(v["value"])
    d["e_max"] = report.e_max
    return {"lattice": {"coupling": format_coupling(coupling), "l1": l1, "l2": l2}, "report": d}


def _load_spectrum_file(path: str) -> tuple[dict, list[dict]]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        meta, intervals = doc["meta"], doc["intervals"]
        for key in ("coupling", "l1", "l2", "e_max"):
            meta[key]
    except FileNotFoundError:
        raise InvalidInputError(f"no such file: {path}") from None
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InvalidInputError(f"{path} is not a lattice spectrum file ({exc})") from None
    return meta, intervals


def _same_intervals(saved: list[dict], spec: Spectrum) -> bool:
    if len(saved) != len(spec.intervals):
        return False
    for s, iv in zip(saved, spec.intervals):
        if s.get("kind") != iv.kind:
            return False
        for a, b in ((float(s["lo"]), iv.lo), (float(s["hi"]), iv.hi)):
            if abs(a - b) > SPECTRUM_RTOL * max(1.0, abs(b)):
                return False
    return True


def cmd_verify(args) -> int:
    if args.from_file:
        meta, saved = _load_spectrum_file(args.from_file)
        coupling = parse_coupling(meta["coupling"])
        l1, l2, emax = float(meta["l1"]), float(meta["l2"]), float(meta["e_max"])
        solver = meta.get("solver", {})
        spec = _bands_spectrum(coupling, l1, l2, emax, bool(solver.get("negative", False)),
                               int(solver.get("resolution", 512)))
        if not _same_intervals(saved, spec):
            raise NumericalError(f"{args.from_file}: stored intervals do not match recomputation")
    else:
        missing = [f for f in ("coupling", "l1", "l2", "emax") if getattr(args, f) is None]
        if missing:
            raise InvalidInputError(f"verify needs --from or --{missing[0]}")
        coupling = parse_coupling(args.coupling)
        l1, l2, emax = args.l1, args.l2, args.emax
    report = verify_propositions(LatticeSpec(l1, l2, coupling), emax)
    _emit(args, _dump_json(_report_payload(coupling, l1, l2, report)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def _substitute(extra: list[str], param: str, value: float) -> list[str]:
    """Set ``param`` in the passthrough args, inside --coupling for coupling parameters."""
    out = list(extra)
    text = repr(float(value))
    if param in COUPLING_PARAMS and "--coupling" in out[:-1]:
        i = out.index("--coupling") + 1
        pattern = rf"(?<=[:,]){re.escape(param)}=[^,]*"
        if not re.search(pattern, out[i]):
            raise InvalidInputError(f"coupling {out[i]!r} has no parameter {param!r}")
        out[i] = re.sub(pattern, f"{param}={text}", out[i])
        return out
    flag = f"--{param}"
    if flag in out:
        out[out.index(flag) + 1] = text
    else:
        out += [flag, text]
    return out


_DEFAULT_FORMAT = {"scatter": "csv", "onion": "csv", "bands": "json", "kp": "json",
                   "classify": "json", "critical": "json", "verify": "json"}


def _run_cell(cell: tuple[list[str], str]) -> int:
    argv, path = cell
    return run(argv + ["--out", path])


def cmd_sweep(args, extra: list[str]) -> int:
    if args.command == "sweep":
        raise InvalidInputError("sweep cannot run itself")
    values = np.linspace(args.start, args.stop, args.steps) if args.steps > 1 else np.array([args.start])
    os.makedirs(args.out_dir, exist_ok=True)
    ext = _DEFAULT_FORMAT[args.command]
    if "--format" in extra[:-1]:
        ext = extra[extra.index("--format") + 1]
    cells = []
    for i, v in enumerate(values):
        argv = [args.command] + _substitute(extra, args.param, float(v))
        cells.append((argv, os.path.join(args.out_dir, f"cell_{i:04d}.{ext}")))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_run_cell, cells))
    else:
        codes = [_run_cell(c) for c in cells]
    index = {
        "command": args.command,
        "param": args.param,
        "cells": [{"index": i, "value": float(v), "argv": cell[0],
                   "file": os.path.basename(cell[1]), "exit_code": code}
                  for i, (v, cell, code) in enumerate(zip(values, cells, codes))],
    }
    _write_atomic(os.path.join(args.out_dir, "index.json"), _dump_json(index))
    return max(codes, default=EXIT_OK)


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, fmt: str) -> None:
    p.add_argument("--format", choices=("csv", "json"), default=fmt)
    p.add_argument("--out", default="-", help="output path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qgcontact", allow_abbrev=False, description="Contact interactions on quantum graphs and lattices.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("scatter", allow_abbrev=False, help="star-graph S-matrix on a momentum grid")
    p.add_argument("--coupling", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kmin", type=_finite_float, required=True)
    p.add_argument("--kmax", type=_finite_float, required=True)
    p.add_argument("--samples", type=_positive_int, default=100)
    _common(p, "csv")

    p = sub.add_parser("onion", allow_abbrev=False, help="onion-graph scattering and its many-link limit")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=_positive_int, required=True)
    p.add_argument("--ell", type=_finite_float)
    p.add_argument("--c", type=_finite_float, default=0.0)
    p.add_argument("--kmin", type=_finite_float, required=True)
    p.add_argument("--kmax", type=_finite_float, required=True)
    p.add_argument("--samples", type=_positive_int, default=100)
    p.add_argument("--limit", action="store_true", help="use the N -> infinity amplitudes")
    p.add_argument("--tau", type=_finite_float, help="total length per pair; sets ell = tau/N")
    _common(p, "csv")

    p = sub.add_parser("bands", allow_abbrev=False, help="band/gap intervals of a rectangular lattice")
    p.add_argument("--coupling", required=True)
    p.add_argument("--l1", type=_finite_float, required=True)
    p.add_argument("--l2", type=_finite_float, required=True)
    p.add_argument("--emax", type=_finite_float, required=True)
    p.add_argument("--negative", action="store_true", help="include negative energies")
    p.add_argument("--resolution", type=int, default=512, help="samples per cell (delta' only)")
    _common(p, "json")

    p = sub.add_parser("kp", allow_abbrev=False, help="one-dimensional Kronig-Penney spectrum")
    p.add_argument("--coupling", required=True)
    p.add_argument("--ell", type=_finite_float, required=True)
    p.add_argument("--emax", type=_finite_float, required=True)
    p.add_argument("--negative", action="store_true", help="include negative energies")
    _common(p, "json")

    p = sub.add_parser("classify", allow_abbrev=False, help="continued fraction and approximation quality")
    p.add_argument("--theta", required=True)
    p.add_argument("--depth", type=_positive_int, default=30)
    _common(p, "json")

    p = sub.add_parser("critical", allow_abbrev=False, help="critical coupling for gap opening")
    p.add_argument("--theta", required=True)
    p.add_argument("--l1", type=_finite_float, default=1.0)
    p.add_argument("--l2", type=_finite_float)
    p.add_argument("--emax", type=_finite_float, required=True)
    _common(p, "json")

    p = sub.add_parser("verify", allow_abbrev=False, help="check the lattice band/gap statements")
    p.add_argument("--coupling")
    p.add_argument("--l1", type=_finite_float)
    p.add_argument("--l2", type=_finite_float)
    p.add_argument("--emax", type=_finite_float)
    p.add_argument("--from", dest="from_file", help="bands JSON file to re-verify")
    _common(p, "json")

    p = sub.add_parser("sweep", help="run a subcommand over a parameter range", allow_abbrev=False,
                       description="Unrecognised arguments are passed to the swept command.")
    p.add_argument("--command", required=True,
                   choices=("scatter", "onion", "bands", "kp", "classify", "critical", "verify"))
    p.add_argument("--param", required=True)
    p.add_argument("--from", dest="start", type=_finite_float, required=True)
    p.add_argument("--to", dest="stop", type=_finite_float, required=True)
    p.add_argument("--steps", type=_positive_int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=_positive_int, default=1)
    return parser


_COMMANDS = {
    "scatter": cmd_scatter,
    "onion": cmd_onion,
    "bands": cmd_bands,
    "kp": cmd_kp,
    "classify": cmd_classify,
    "critical": cmd_critical,
    "verify": cmd_verify,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Execute one command line and return its exit code."""
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] == "sweep":
            args, extra = parser.parse_known_args(argv)
        else:
            args, extra = parser.parse_args(argv), []
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.cmd == "sweep":
            return cmd_sweep(args, extra)
        return _COMMANDS[args.cmd](args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())
