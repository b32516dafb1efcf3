"""Command-line entry point: ``cpdqz {sweep,doa,fluor,decompose}``.

Exit codes: 0 success, 2 configuration error, 3 dataset unavailable,
4 numerical failure in ``decompose``.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import errors
from .algorithms import METHODS, decompose, parse_pencil
from .linalg import BACKEND
from .experiments import (DoaScenario, SweepConfig, emit_summary, run_doa_experiment,
                          run_fluorescence_experiment, run_synthetic_sweep)
from .experiments.doa import AZIMUTHS, ELEVATIONS
from .tensorio import read_tensor, write_factor

log = logging.getLogger("cpdqz")

EXIT_OK, EXIT_CONFIG, EXIT_DATASET, EXIT_NUMERIC = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


def _float(tok: str) -> float:
    tok = tok.strip().lower()
    if tok in ("inf", "+inf", "infinity"):
        return math.inf
    return float(tok)


def parse_range(text: str, conv=float) -> list:
    """``a,b,c`` or inclusive ``start:stop[:step]``."""
    try:
        if ":" in text:
            parts = [conv(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else conv(1)
            if step <= 0 or stop < start:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [conv(start + k * step) for k in range(n)]
        return [conv(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse range {text!r}") from exc


def _methods(text: str) -> tuple[str, ...]:
    ms = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in ms if m not in METHODS]
    if bad or not ms:
        raise ConfigError(f"unknown method(s) {bad}; choose from {sorted(METHODS)}")
    return ms


def _pivot(value: int | None) -> int | None:
    # the CLI counts modes from 1
    return None if value is None else value - 1


def _common(p: argparse.ArgumentParser, methods: str) -> None:
    p.add_argument("--methods", default=methods, help="comma-separated subset of cpdqz,cpdqzs,gevd")
    p.add_argument("--pencil", default="first", help="first | random:SEED")
    p.add_argument("--pivot-mode", type=int, default=None,
                   help="1-based pivot mode for cpdqzs (default: last mode)")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--complex-fallback", choices=("on", "off"), default="off",
                   help="redo real pencils with complex eigenvalues in complex arithmetic")
    p.add_argument("--normalize", choices=("columns", "none"), default="none")


def _snr_args(p: argparse.ArgumentParser, default: str) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--snr", default=None, help="single SNR in dB (inf allowed)")
    g.add_argument("--snr-range", default=default, help="SNRs in dB: a,b,c or start:stop[:step]")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cpdqz", description="Algebraic CPD by QZ and GEVD, with experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="synthetic rank/SNR sweep")
    sw.add_argument("--config", type=Path, help="JSON file with SweepConfig fields; flags override")
    sw.add_argument("--order", type=int, default=None)
    sw.add_argument("--dims", default=None, help="extents, comma-separated, or one value for all modes")
    g = sw.add_mutually_exclusive_group()
    g.add_argument("--rank", type=int, default=None)
    g.add_argument("--rank-range", default=None, help="a,b,c or start:stop[:step]")
    _snr_args(sw, None)
    sw.add_argument("--trials", type=int, default=None)
    sw.add_argument("--out", type=Path, required=True)
    _common(sw, "cpdqz,cpdqzs,gevd")

    doa = sub.add_parser("doa", help="direction-of-arrival experiment")
    doa.add_argument("--sensors", type=int, default=20, help="M, sensors per side")
    doa.add_argument("--samples", type=int, default=20, help="K, snapshots")
    doa.add_argument("--azimuths", default=",".join(str(a) for a in AZIMUTHS))
    doa.add_argument("--elevations", default=",".join(str(e) for e in ELEVATIONS))
    doa.add_argument("--wavelength", type=float, default=2.0)
    doa.add_argument("--spacing", type=float, default=1.0)
    doa.add_argument("--slices", type=int, default=None, help="use only the first K' snapshots")
    _snr_args(doa, "0,10,20,30,40")
    doa.add_argument("--trials", type=int, default=100)
    doa.add_argument("--out", type=Path, required=True)
    _common(doa, "cpdqzs,gevd")

    fl = sub.add_parser("fluor", help="rank-3 fluorescence experiment")
    fl.add_argument("--data", type=Path, default=None, help="5x201x61 tensor in the text format")
    fl.add_argument("--synthetic", action="store_true", help="use the synthetic stand-in if --data is missing")
    _snr_args(fl, "-20,-10,0,10,20")
    fl.add_argument("--trials", type=int, default=100)
    fl.add_argument("--out", type=Path, required=True)
    _common(fl, "cpdqzs,gevd")

    dc = sub.add_parser("decompose", help="decompose one tensor file")
    dc.add_argument("tensor", type=Path)
    dc.add_argument("--rank", type=int, required=True)
    dc.add_argument("--method", default="cpdqzs", choices=sorted(METHODS))
    dc.add_argument("--out", type=Path, required=True)
    dc.add_argument("--pencil", default="first")
    dc.add_argument("--pivot-mode", type=int, default=None)
    dc.add_argument("--complex-fallback", choices=("on", "off"), default="off")
    dc.add_argument("--normalize", choices=("columns", "none"), default="none")
    return p


def _snrs(args) -> list[float]:
    if args.snr is not None:
        return [_float(args.snr)]
    return parse_range(args.snr_range, _float)


def _opts(args) -> dict:
    parse_pencil(args.pencil)
    return {
        "pencil": args.pencil,
        "pivot_mode": _pivot(args.pivot_mode),
        "complex_fallback": args.complex_fallback == "on",
        "normalize": args.normalize == "columns",
    }


def sweep_config(args) -> SweepConfig:
    base = {}
    if args.config is not None:
        try:
            base = json.loads(args.config.read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(base) - set(SweepConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if "snrs_db" in base:
            base["snrs_db"] = [_float(str(s)) for s in base["snrs_db"]]
    if args.order is not None:
        base["order"] = args.order
    if args.dims is not None:
        dims = parse_range(args.dims, int)
        order = base.get("order", len(dims) if len(dims) > 1 else 4)
        base["extents"] = dims * order if len(dims) == 1 else dims
        base.setdefault("order", len(base["extents"]))
    elif "order" in base and "extents" not in base:
        base["extents"] = [40] * base["order"]
    if args.rank is not None:
        base["ranks"] = [args.rank]
    elif args.rank_range is not None:
        base["ranks"] = parse_range(args.rank_range, int)
    if args.snr is not None or args.snr_range is not None:
        base["snrs_db"] = _snrs(args)
    if args.trials is not None:
        base["trials"] = args.trials
    base["methods"] = _methods(args.methods)
    base["seed"] = args.seed
    base.update(_opts(args))
    try:
        return SweepConfig(**base)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_sweep(args) -> int:
    cfg = sweep_config(args)
    if cfg.trials < 50:
        cfg.notes.append(f"{cfg.trials} trials (reference setting uses 50)")
    records = run_synthetic_sweep(cfg)
    meta = {"experiment": "sweep", **cfg.as_dict(), "qz_backend": BACKEND}
    paths = emit_summary(records, args.out, meta)
    log.info("wrote %s", ", ".join(str(p) for p in paths.values()))
    return EXIT_OK


def _cmd_doa(args) -> int:
    opts = _opts(args)
    try:
        sc = DoaScenario(args.sensors, args.samples, parse_range(args.azimuths), parse_range(args.elevations),
                         args.wavelength, args.spacing, seed=args.seed, slices=args.slices)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    methods = _methods(args.methods)
    records = run_doa_experiment(sc, _snrs(args), args.trials, methods, **opts)
    meta = {"experiment": "doa", **sc.as_dict(), "trials": args.trials, "methods": methods, **opts,
            "qz_backend": BACKEND,
            "notes": [f"{args.trials} trials (reference setting uses 500)"] if args.trials < 500 else []}
    emit_summary(records, args.out, meta)
    return EXIT_OK


def _cmd_fluor(args) -> int:
    opts = _opts(args)
    methods = _methods(args.methods)
    records, source = run_fluorescence_experiment(args.data, _snrs(args), args.trials, methods, seed=args.seed,
                                                  synthetic_fallback=args.synthetic, **opts)
    meta = {"experiment": "fluor", "source": source, "trials": args.trials, "methods": methods,
            "seed": args.seed, **opts, "qz_backend": BACKEND}
    emit_summary(records, args.out, meta)
    return EXIT_OK


def _cmd_decompose(args) -> int:
    opts = _opts(args)
    t = read_tensor(args.tensor)
    if args.method != "cpdqzs":
        opts.pop("pivot_mode")
    try:
        rep = decompose(args.method, t, args.rank, **opts)
    except (errors.QzNoConvergence, errors.SvdNoConvergence, errors.RealPencilComplexEigenvalues,
            errors.SingularPencil, errors.SingularPivotFactor, errors.RankDeficient,
            errors.DegenerateHigherFactors, errors.NotEnoughSlices, errors.ZeroInput) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    args.out.mkdir(parents=True, exist_ok=True)
    for n, u in enumerate(rep.model.factors):
        write_factor(u, args.out / f"factor_{n + 1}.txt")
    if rep.model.weights is not None:
        write_factor(np.asarray(rep.model.weights)[None, :], args.out / "weights.txt")
    for w in rep.diagnostics.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"sweep": _cmd_sweep, "doa": _cmd_doa, "fluor": _cmd_fluor, "decompose": _cmd_decompose}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except errors.DatasetUnavailable as exc:
        print(f"dataset unavailable: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except (ConfigError, errors.CpdError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
