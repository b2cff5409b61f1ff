"""Command-line entry point: ``voigtbq {run,sweep,regimes,oracle-check,info}``.

On failure a single line ``error: <ErrorClass>: <message>`` goes to stderr
and the exit status identifies the class:

    2  usage or configuration error
    3  runtime abort (non-finite values, step budget exhausted)
    4  checkpoint / file format error
    5  a verification check failed (oracle-check)
    1  anything else
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .config import load_config
from .convergence import regime_matrix, sweep_epsilon
from .diagnostics import DiagnosticsMonitor
from .errors import CheckpointFormatError, ConfigError, MaxStepsExceeded, NonFiniteError
from .initial import make_initial_data
from .io import DiagnosticsWriter, checkpoint_read, checkpoint_write
from .oracle import oracle_agreement
from .timestepper import integrate, stable_dt

log = logging.getLogger("voigtbq")

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_FORMAT = 4
EXIT_CHECK = 5

ORACLE_TOL = 1e-12


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, key="argv")


def _parser():
    p = _Parser(prog="voigtbq", description="Voigt-Boussinesq pseudo-spectral solver")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="YAML experiment file")
        sp.add_argument("--output", help="output directory (overrides output.directory)")
        sp.add_argument("--workers", type=int, default=1, help="parallel runs for sweeps")
        sp.add_argument("--seed", type=int, help="override the initial-data seed")

    run = sub.add_parser("run", help="integrate one configuration")
    common(run)
    run.add_argument("--resume", help="start from this checkpoint instead of the initial data")
    run.add_argument("--checkpoint-every", type=int, default=0, metavar="K",
                     help="write a checkpoint at every K-th output time")

    common(sub.add_parser("sweep", help="epsilon -> 0 convergence sweep"))
    common(sub.add_parser("regimes", help="fractional (alpha, beta) regime matrix"))
    oc = sub.add_parser("oracle-check", help="compare the FFT flux against the direct-sum oracle")
    common(oc, config_required=False)
    oc.add_argument("--states", type=int, default=50)
    oc.add_argument("--grid", type=int, default=16)
    common(sub.add_parser("info", help="echo the configuration and derived quantities"))
    return p


def _setup_logging():
    level = os.environ.get("VB_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _load(args):
    config = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2**64:
            raise ConfigError("must be an unsigned 64-bit integer", key="--seed")
        config = config.with_seed(args.seed)
    if args.workers < 1:
        raise ConfigError("must be >= 1", key="--workers")
    outdir = args.output or config.output_dir
    return config, outdir


def _emit(obj):
    print(json.dumps(obj, sort_keys=False))


def cmd_run(args):
    config, outdir = _load(args)
    grid = config.grid
    params = config.params
    if args.resume:
        state0, ck_params = checkpoint_read(args.resume, expected_N=grid.N)
        if ck_params != params:
            log.warning("checkpoint parameters %s differ from config %s; using config", ck_params, params)
    else:
        state0 = make_initial_data(config.initial, grid)

    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "config.json"), "w", encoding="utf-8") as fh:
        json.dump(config.as_dict(), fh, indent=2)

    writer = DiagnosticsWriter(os.path.join(outdir, "diagnostics.ndjson"))
    monitor = DiagnosticsMonitor(params, config.s_values, sink=writer, keep=False)
    count = 0

    def observer(state):
        nonlocal count
        monitor(state)
        if args.checkpoint_every and count % args.checkpoint_every == 0:
            checkpoint_write(state, params, os.path.join(outdir, f"checkpoint-{count:06d}.chk"))
        count += 1

    try:
        final = integrate(state0, config.control, params, observer=observer,
                          observe_every=config.every_steps, observe_dt=config.every_time)
    finally:
        writer.close()
    checkpoint_write(final, params, os.path.join(outdir, "final.chk"))
    last = monitor.last
    _emit({"status": "ok", "t": final.t, "bkm_integral": last.bkm_integral,
           "q_theta": last.q_theta, "output": outdir})
    return EXIT_OK


def cmd_sweep(args):
    config, outdir = _load(args)
    if not config.epsilons:
        raise ConfigError("sweep needs a nonempty list", key="sweep.epsilons")
    report = sweep_epsilon(config, config.epsilons, workers=args.workers)
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "convergence.json"), "w", encoding="utf-8") as fh:
        json.dump(report.as_dict(), fh, indent=2)
    verdict = {True: "PASS", False: "FAIL", None: "SKIPPED"}[report.passed]
    _emit({"status": "ok", "verdict": verdict, "epsilons": report.epsilons,
           "e_max": report.e_max, "rates": report.rates, "metric_max": report.metric_max})
    return EXIT_OK


def cmd_regimes(args):
    config, outdir = _load(args)
    if not config.cells:
        raise ConfigError("regimes needs a nonempty list", key="regimes.cells")
    cells = regime_matrix(config, config.cells, workers=args.workers)
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "regimes.ndjson"), "w", encoding="utf-8") as fh:
        for cell in cells:
            fh.write(json.dumps(cell.as_dict()) + "\n")
    for cell in cells:
        _emit(cell.as_dict())
    return EXIT_OK


def cmd_oracle_check(args):
    if args.config:
        _load(args)
    worst = oracle_agreement(n_states=args.states, N=args.grid)
    ok = worst < ORACLE_TOL
    _emit({"status": "ok" if ok else "fail", "states": args.states, "N": args.grid,
           "max_error": worst, "tolerance": ORACLE_TOL})
    if not ok:
        print(f"error: OracleMismatch: max error {worst:.3e} >= {ORACLE_TOL:.0e}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_info(args):
    config, outdir = _load(args)
    grid = config.grid
    state0 = make_initial_data(config.initial, grid)
    if config.control.mode == "fixed":
        dt = config.control.dt
    else:
        dt = stable_dt(state0, config.control.cfl, config.control.dt_max)
    _emit({
        "N": grid.N,
        "epsilon": config.params.epsilon,
        "alpha": config.params.alpha,
        "beta": config.params.beta,
        "dt": dt,
        "mode": config.control.mode,
        "t_end": config.control.t_end,
        "dx": grid.dx,
        "retained_modes": int(np.count_nonzero(grid.dealias_mask)),
        "kmax_retained": grid.kmax_retained,
        "initial": config.initial,
        "output": outdir,
    })
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "regimes": cmd_regimes,
    "oracle-check": cmd_oracle_check,
    "info": cmd_info,
}


def main(argv=None):
    _setup_logging()
    try:
        args = _parser().parse_args(argv)
        if args.command is None:
            raise ConfigError("missing subcommand; expected one of " + ", ".join(COMMANDS), key="argv")
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        code, exc_out = EXIT_CONFIG, exc
    except (NonFiniteError, MaxStepsExceeded) as exc:
        code, exc_out = EXIT_RUNTIME, exc
    except CheckpointFormatError as exc:
        code, exc_out = EXIT_FORMAT, exc
    except OSError as exc:
        code, exc_out = EXIT_FORMAT, exc
    except Exception as exc:  # noqa: BLE001 - last-resort classification
        log.debug("unexpected failure", exc_info=True)
        code, exc_out = EXIT_OTHER, exc
    msg = " ".join(str(exc_out).split())
    print(f"error: {type(exc_out).__name__}: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
