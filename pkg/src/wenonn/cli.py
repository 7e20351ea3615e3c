"""``wenonn`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import adr, output, studies
from . import train as training
from .core import ConfigurationError, ContractError
from .nn import TrainingError, load_checkpoint, save_checkpoint
from .problems import PROBLEMS, get_problem, run
from .solver import SolverError
from .weno import SchemeKind, scheme as make_scheme

log = logging.getLogger("wenonn")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
SCHEME_NAMES = [k.value for k in SchemeKind]


def resolve_scheme(name: str, checkpoint: Optional[str]):
    """Scheme config plus the checkpoint id (``None`` for classical kinds)."""
    kind = SchemeKind(name)
    if not kind.is_nn:
        if checkpoint:
            log.warning("--checkpoint ignored for classical scheme %s", name)
        return make_scheme(name), None
    if not checkpoint:
        raise ConfigurationError(f"{name} needs --checkpoint")
    ck = load_checkpoint(checkpoint)
    if ck.base_scheme != kind.base.name:
        raise ConfigurationError(f"checkpoint was trained on {ck.base_scheme}, scheme {name} needs {kind.base.name}")
    return make_scheme(name, network=ck.params, eps1=ck.eps1), ck.params.theta_id


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_dataset(args, manifest: output.RunManifest):
    counts = training.scaled_counts(args.n_samples) if args.n_samples else training.FAMILY_COUNTS
    seed = args.seed if args.seed is not None else 0
    data = training.generate_dataset(seed, counts)
    params = np.full((len(data), 6), np.nan)
    for i, s in enumerate(data):
        params[i, :len(s.params)] = s.params
    path = _out_dir(args) / "dataset.npz"
    np.savez(path, family=np.array([s.family.value for s in data]), params=params,
             grid_values=np.stack([s.grid_values for s in data]),
             reference_fluxes=np.stack([s.reference_fluxes for s in data]))
    manifest.config_digest = output.digest({"seed": seed, "counts": list(counts)})
    manifest.output_paths.append(str(path))


def cmd_train(args, manifest: output.RunManifest):
    if not args.config:
        raise ConfigurationError("train needs --config")
    cfg = training.load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    manifest.config_digest = cfg.digest()
    manifest.scheme_kind = f"weno5-{cfg.base.lower()}-nn"
    data = training.generate_dataset(cfg.seed, training.scaled_counts(cfg.n_samples))
    result = training.train(data, cfg)
    out = _out_dir(args)
    ck, hist = out / "checkpoint.json", out / "history.csv"
    save_checkpoint(ck, result.params, cfg.base, cfg.eps1, cfg.digest())
    training.write_history(hist, result.history)
    manifest.checkpoint_id = result.params.theta_id
    manifest.output_paths += [str(ck), str(hist)]
    if result.aborted:
        raise TrainingError(result.aborted + f" (last good checkpoint written to {ck})")


def cmd_adr(args, manifest: output.RunManifest):
    sc, ck_id = resolve_scheme(args.scheme, args.checkpoint)
    N = args.N
    manifest.scheme_kind, manifest.checkpoint_id, manifest.grid = args.scheme, ck_id, [N]
    manifest.config_digest = output.digest({"scheme": args.scheme, "N": N, "checkpoint": ck_id})
    phi, Phi = adr.spectrum_values(sc, N)
    bounds = [adr.spectral_error_bound(sc, n, N) for n in range(N // 2 + 1)]
    out = _out_dir(args)
    p1 = output.write_spectrum(out / f"spectrum-{args.scheme}.csv", phi, Phi)
    p2 = output.write_bound(out / f"bound-{args.scheme}.csv", phi, [b[0] for b in bounds],
                            [b[1] for b in bounds])
    manifest.output_paths += [str(p1), str(p2)]


def cmd_run(args, manifest: output.RunManifest):
    problem = get_problem(args.problem).with_overrides(nx=args.nx, ny=args.ny, t_final=args.tfinal,
                                                       cfl=args.cfl)
    sc, ck_id = resolve_scheme(args.scheme, args.checkpoint)
    manifest.scheme_kind, manifest.checkpoint_id = args.scheme, ck_id
    manifest.grid = [problem.nx] if problem.dimension == 1 else [problem.nx, problem.ny]
    manifest.t_final = problem.t_final
    manifest.config_digest = output.digest({"problem": problem.name, "grid": manifest.grid,
                                            "t_final": problem.t_final, "cfl": problem.cfl,
                                            "scheme": args.scheme, "checkpoint": ck_id})
    result = run(problem, sc, snapshot_times=args.snapshot or ())
    out = _out_dir(args)
    gamma = problem.gamma
    for t, field in list(result.snapshots) + [(result.t, result.field)]:
        stem = f"{problem.name}-{args.scheme}-t{t:.6g}"
        if problem.dimension == 1:
            path = output.write_snapshot_1d(out / f"{stem}.csv", field, gamma)
        else:
            path = output.write_snapshot_2d(out / f"{stem}.grid", field, gamma)
        manifest.output_paths.append(str(path))


def cmd_convergence(args, manifest: output.RunManifest):
    sc, ck_id = (None, None) if args.first_order else resolve_scheme(args.scheme, args.checkpoint)
    res = args.resolutions
    tf = args.tfinal if args.tfinal is not None else 1.0
    cfl = args.cfl if args.cfl is not None else 0.4
    rows = studies.convergence_study(sc, res, tf, cfl, first_order=args.first_order)
    label = "upwind1" if args.first_order else args.scheme
    manifest.scheme_kind, manifest.checkpoint_id, manifest.grid, manifest.t_final = label, ck_id, res, tf
    manifest.config_digest = output.digest({"scheme": label, "res": res, "t": tf, "cfl": cfl})
    path = output.write_csv(_out_dir(args) / f"convergence-{label}.csv", "convergence",
                            output.CONVERGENCE_COLUMNS,
                            [(r.n, r.l1_error, r.linf_error, r.l1_order, r.linf_order) for r in rows])
    manifest.output_paths.append(str(path))


def cmd_weights(args, manifest: output.RunManifest):
    sc, ck_id = resolve_scheme(args.scheme, args.checkpoint)
    n = args.nx or 200
    x, W = studies.weight_probe(args.function, sc, n)
    manifest.scheme_kind, manifest.checkpoint_id, manifest.grid = args.scheme, ck_id, [n]
    manifest.config_digest = output.digest({"function": args.function, "scheme": args.scheme,
                                            "n": n, "checkpoint": ck_id})
    path = output.write_weights(_out_dir(args) / f"weights-{args.function}-{args.scheme}.csv", x, W)
    manifest.output_paths.append(str(path))


COMMANDS = {"dataset": cmd_dataset, "train": cmd_train, "adr": cmd_adr, "run": cmd_run,
            "convergence": cmd_convergence, "weights": cmd_weights}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config")
    common.add_argument("--scheme", choices=SCHEME_NAMES, default="weno5-z")
    common.add_argument("--checkpoint")
    common.add_argument("--nx", type=int)
    common.add_argument("--ny", type=int)
    common.add_argument("--tfinal", type=float)
    common.add_argument("--cfl", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", default=".")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="wenonn", description="WENO5 schemes with learned weight compensation")
    sub = p.add_subparsers(dest="command", required=True)
    d = sub.add_parser("dataset", parents=[common], help="generate the training dataset")
    d.add_argument("--n-samples", type=int, help="stratified subset size (default: full set)")
    sub.add_parser("train", parents=[common], help="train a compensation network from a config file")
    a = sub.add_parser("adr", parents=[common], help="spectrum and spectral-error bound tables")
    a.add_argument("--N", type=int, default=128)
    r = sub.add_parser("run", parents=[common], help="run a built-in problem")
    r.add_argument("problem", choices=sorted(PROBLEMS))
    r.add_argument("--snapshot", type=float, action="append", help="extra output time (repeatable)")
    c = sub.add_parser("convergence", parents=[common], help="order study on periodic sine advection")
    c.add_argument("--resolutions", type=int, nargs="+", default=[25, 50, 100, 200])
    c.add_argument("--first-order", action="store_true", help="first-order upwind reference")
    w = sub.add_parser("weights", parents=[common], help="per-interface nonlinear weights")
    w.add_argument("--function", default="jump", choices=sorted(studies.PROBE_FUNCTIONS))
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    manifest = output.RunManifest(command=args.command, config_digest="")
    start = time.perf_counter()
    code = EXIT_OK
    try:
        COMMANDS[args.command](args, manifest)
    except (ConfigurationError, ContractError) as exc:
        manifest.status, manifest.message, code = "config-error", str(exc), EXIT_CONFIG
    except (SolverError, TrainingError, ArithmeticError) as exc:
        manifest.status, manifest.message, code = "numeric-error", str(exc), EXIT_NUMERIC
    manifest.wall_time = time.perf_counter() - start
    if code != EXIT_OK:
        print(f"wenonn {args.command}: {manifest.message}", file=sys.stderr)
    try:
        manifest.write(_out_dir(args))
    except OSError as exc:
        print(f"wenonn: cannot write manifest: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
