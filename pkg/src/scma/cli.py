"""Command-line front end: validate / analyze / simulate / optimize.

Exit codes: 0 success, 1 validation failure, 2 usage or parse error.  Every
command is deterministic given its arguments and seed; the worker count
(--threads, default from SCMA_THREADS) never changes any output file.  Each
invocation that writes files also writes a manifest JSON next to them.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    CodebookFormatError,
    CodebookSet,
    read_codebook_json,
    codebook_to_dict,
)
from .channel import CHANNELS, ebn0_to_n0
from .detector import MpaConfig
from .fixtures import validate_codebook
from .metrics import i_lower_bound_profile, kpi
from .montecarlo import (
    DEFAULT_MAX_FRAMES,
    DEFAULT_TARGET_ERRORS,
    sweep_ser,
    sweep_csv_lines,
)
from .optimizer import CRN_MODES, DeConfig, ObjectiveConfig, optimize
from .structure import builtin_template, instantiate, read_template_json


class UsageError(Exception):
    pass


def parse_snr_range(text: str) -> list[float]:
    """MATLAB-style inclusive range A:STEP:B; a bare number is a single
    point."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        a, step, b = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"invalid range {text!r}; expected A:STEP:B") from None
    if step == 0.0:
        if a == b:
            return [a]
        raise UsageError(f"zero step in range {text!r}")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    if n < 1:
        raise UsageError(f"empty range {text!r}")
    return [a + i * step for i in range(n)]


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("SCMA_THREADS", "1")))
    except ValueError:
        return 1


def _load_codebook(path: str) -> CodebookSet:
    try:
        return read_codebook_json(path)
    except CodebookFormatError as exc:
        raise UsageError(str(exc)) from exc


def _load_template(name_or_path: str):
    if name_or_path in ("6x4", "12x6"):
        return builtin_template(name_or_path)
    try:
        return read_template_json(name_or_path)
    except CodebookFormatError as exc:
        raise UsageError(str(exc)) from exc


def _write_manifest(
    directory: Path,
    command: str,
    argv: list[str],
    seed: int | None,
    config: dict,
    outputs: list[str],
    started: float,
    name: str = "manifest.json",
) -> None:
    doc = {
        "command": command,
        "argv": argv,
        "seed": seed,
        "version": __version__,
        "wall_clock_s": round(time.perf_counter() - started, 3),
        "config": config,
        "outputs": outputs,
    }
    (directory / name).write_text(json.dumps(doc, indent=2) + "\n")


def _cmd_validate(args: argparse.Namespace, argv: list[str]) -> int:
    cbs = _load_codebook(args.codebook)
    report = validate_codebook(cbs)
    print(json.dumps(report.to_dict(), indent=2))
    return 0 if report.ok else 1


def _cmd_analyze(args: argparse.Namespace, argv: list[str]) -> int:
    started = time.perf_counter()
    cbs = _load_codebook(args.codebook)
    grid = parse_snr_range(args.n0_grid_db) if args.n0_grid_db else []
    if grid and not args.il_csv:
        raise UsageError("--il-csv is required when --n0-grid-db is given")
    report = kpi(cbs, rel_tol=args.rel_tol)
    out: dict = {"codebook": args.codebook, "kpi": report.to_dict()}
    outputs: list[str] = []
    if grid:
        rows = ["snr_db,resource,il_bits"]
        means = []
        for g in grid:
            n0 = ebn0_to_n0(g, cbs.config)
            per, mean = i_lower_bound_profile(cbs, n0)
            for k, val in enumerate(per):
                rows.append(f"{g:.10g},{k},{val:.10g}")
            rows.append(f"{g:.10g},mean,{mean:.10g}")
            means.append(mean)
        path = Path(args.il_csv)
        path.write_text("\n".join(rows) + "\n")
        outputs.append(path.name)
        out["il"] = {"grid_db": grid, "mean": means, "csv": str(path)}
        _write_manifest(
            path.parent,
            "analyze",
            argv,
            None,
            {"codebook": args.codebook, "rel_tol": args.rel_tol},
            outputs,
            started,
            name=path.name + ".manifest.json",
        )
    print(json.dumps(out, indent=2))
    return 0


def _cmd_simulate(args: argparse.Namespace, argv: list[str]) -> int:
    started = time.perf_counter()
    cbs = _load_codebook(args.codebook)
    points = parse_snr_range(args.ebno)
    mpa = MpaConfig(iterations=args.mpa_iters, domain=args.mpa_domain)
    estimates = sweep_ser(
        cbs,
        points,
        args.channel,
        mpa=mpa,
        seed=args.seed,
        frames=args.frames,
        target_errors=args.target_errors,
        max_frames=args.max_frames,
        threads=args.threads,
    )
    out = Path(args.out)
    out.write_text("\n".join(sweep_csv_lines(estimates)) + "\n")
    config = {
        "codebook": args.codebook,
        "channel": args.channel,
        "ebno": args.ebno,
        "frames": args.frames,
        "target_errors": args.target_errors,
        "max_frames": args.max_frames,
        "mpa_iters": args.mpa_iters,
        "mpa_domain": args.mpa_domain,
    }
    _write_manifest(
        out.parent, "simulate", argv, args.seed, config, [out.name], started,
        name=out.name + ".manifest.json",
    )
    print(json.dumps({"points": [e.to_dict() for e in estimates]}, indent=2))
    return 0


def _cmd_optimize(args: argparse.Namespace, argv: list[str]) -> int:
    started = time.perf_counter()
    template = _load_template(args.template)
    eval_cfg = ObjectiveConfig(
        ebn0_db=args.ebno,
        channel=args.channel,
        frames=args.frames_per_eval,
        mpa=MpaConfig(iterations=args.mpa_iters),
        crn_mode=args.crn,
        threads=args.threads,
    )
    cfg = DeConfig(
        s_p=args.np,
        d=2 * template.num_params,
        alpha=args.f,
        c_r=args.cr,
        i_max=args.max_iter,
        plateau_eps=args.plateau_eps,
        plateau_window=args.plateau_window,
        seed=args.seed,
        eval=eval_cfg,
    )
    result = optimize(template, cfg)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    history_lines = ["generation,best_ser"]
    history_lines += [
        f"{g},{v:.10g}" for g, v in enumerate(result.history)
    ]
    (outdir / "history.csv").write_text("\n".join(history_lines) + "\n")

    best_set = instantiate(template, result.a_opt)
    (outdir / "codebook.json").write_text(
        json.dumps(codebook_to_dict(best_set)) + "\n"
    )

    config = {
        "template": args.template,
        "channel": args.channel,
        "ebn0_db": args.ebno,
        "s_p": cfg.s_p,
        "d": cfg.d,
        "alpha": cfg.alpha,
        "c_r": cfg.c_r,
        "i_max": cfg.i_max,
        "plateau_eps": cfg.plateau_eps,
        "plateau_window": cfg.plateau_window,
        "frames_per_eval": eval_cfg.frames,
        "crn_mode": eval_cfg.crn_mode,
        "mpa_iters": args.mpa_iters,
        "selection_rule": "strict <; ties keep the incumbent row",
    }
    artifact = {
        "config": config,
        "seed": args.seed,
        "generations": result.generations,
        "stop_reason": result.stop_reason,
        "history": [float(v) for v in result.history],
        "a_opt": [[float(z.real), float(z.imag)] for z in result.a_opt],
        "best_row": [float(v) for v in result.best_row],
    }
    (outdir / "run.json").write_text(json.dumps(artifact, indent=2) + "\n")
    _write_manifest(
        outdir, "optimize", argv, args.seed, config,
        ["history.csv", "codebook.json", "run.json"], started,
    )
    print(json.dumps({
        "best_ser": float(result.history[-1]),
        "generations": result.generations,
        "stop_reason": result.stop_reason,
        "out": str(outdir),
    }, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scma",
        description="Sparse code multiple access link-level toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="structural checks on a codebook file")
    p.add_argument("--codebook", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("analyze", help="distance KPIs and mutual-information bound")
    p.add_argument("--codebook", required=True)
    p.add_argument("--rel-tol", type=float, default=1e-3,
                   help="relative tolerance for kissing-number counting")
    p.add_argument("--n0-grid-db", default=None,
                   help="Eb/N0 grid (A:STEP:B, dB) for the bound sweep")
    p.add_argument("--il-csv", default=None, help="output CSV for the bound sweep")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("simulate", help="Monte-Carlo SER sweep")
    p.add_argument("--codebook", required=True)
    p.add_argument("--channel", choices=CHANNELS, default="awgn")
    p.add_argument("--ebno", required=True, help="Eb/N0 sweep A:STEP:B in dB")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--frames", type=int, default=None,
                       help="fixed frames per SNR point")
    group.add_argument("--target-errors", type=int, default=DEFAULT_TARGET_ERRORS,
                       help="stop a point after this many symbol errors")
    p.add_argument("--max-frames", type=int, default=DEFAULT_MAX_FRAMES)
    p.add_argument("--mpa-iters", type=int, default=10)
    p.add_argument("--mpa-domain", choices=("linear", "log"), default="linear")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("optimize", help="differential-evolution codebook search")
    p.add_argument("--template", required=True,
                   help="6x4, 12x6, or a template JSON file")
    p.add_argument("--channel", choices=CHANNELS, default="awgn")
    p.add_argument("--ebno", type=float, required=True,
                   help="optimization Eb/N0 in dB")
    p.add_argument("--np", type=int, default=20, help="population size")
    p.add_argument("--cr", type=float, default=0.95, help="crossover rate")
    p.add_argument("--f", type=float, default=0.6, help="mutation scaling factor")
    p.add_argument("--max-iter", type=int, default=80)
    p.add_argument("--plateau-eps", type=float, default=0.02)
    p.add_argument("--plateau-window", type=int, default=5)
    p.add_argument("--frames-per-eval", type=int, default=20000)
    p.add_argument("--mpa-iters", type=int, default=10)
    p.add_argument("--crn", choices=CRN_MODES, default="per-generation",
                   help="common-random-number stream policy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_optimize)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
