"""Command-line front end: ``simulate``, ``enumerate``, ``sweep`` and ``trace``.

Exit status is 0 on success, 1 for configuration errors, 2 for data errors and
3 for numerical failures.
"""
import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import fileio
from .baselines import BaselineKind, enumerate_baseline
from .covariance import check_hermitian, fb_smooth, sample_covariance
from .errors import ConfigError, DataError, EnumerationError
from .experiments import run_sweep, singular_value_trace, spacing_ratio_vs_eta
from .array_model import synthesize
from .solver import SolverParams, decompose

log = logging.getLogger('toeplitz_enum')

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get('TARGET_THREADS')
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f'TARGET_THREADS must be an integer, got {env!r}') from None
    return 1


def _load_config(args, need_config=True):
    if getattr(args, 'preset', None):
        if args.config:
            raise ConfigError('--config and --preset are mutually exclusive')
        cfg = cfgmod.load_preset(args.preset)
    elif args.config:
        try:
            cfg = cfgmod.load(args.config)
        except OSError as exc:
            raise ConfigError(f'cannot read config: {exc}') from None
    elif need_config:
        raise ConfigError('a --config file is required')
    else:
        cfg = cfgmod.RunConfig()
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError('--seed must be non-negative')
        cfg.scenario = cfg.scenario.replace(seed=args.seed)
        cfg.sweep['seed'] = args.seed
    if args.eta is not None:
        base = {} if cfg.solver is None else {
            k: getattr(cfg.solver, k) for k in ('mu', 'eps', 'max_iters', 'k_max', 'rank_rel_tol')}
        cfg.solver = SolverParams(eta=args.eta, **base)
        cfg.series = [{**s, 'solver': {**s['solver'], 'eta': args.eta}} if 'solver' in s else s
                      for s in cfg.series]
    if getattr(args, 'trials', None) is not None:
        cfg.sweep['trials'] = args.trials
    if args.out:
        cfg.output_dir = args.out
    if cfg.solver is not None:
        cfg.solver.resolved_k_max(cfg.array.size)
    logging.getLogger().setLevel(getattr(logging, (args.verbosity or cfg.verbosity).upper()))
    log.info('resolved config: %s', json.dumps(cfg.resolved(), sort_keys=True))
    return cfg


def _outdir(cfg):
    path = Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_simulate(args):
    cfg = _load_config(args)
    x = synthesize(cfg.array, cfg.scenario)
    out = _outdir(cfg)
    if cfg.output_format == 'text':
        target = out / 'snapshots.csv'
        target.write_text(fileio.format_text(x))
    else:
        target = out / 'snapshots.tgt'
        fileio.save(target, x, fileio.Kind.SNAPSHOTS)
    sc = cfg.scenario
    print(f'M={cfg.array.size} K={sc.num_sources} Q={sc.num_snapshots} SNR={sc.snr_db:g} dB '
          f'seed={sc.seed} -> {target}')
    return EXIT_OK


def cmd_enumerate(args):
    cfg = _load_config(args, need_config=False)
    kind = None if args.kind == 'auto' else fileio.Kind[args.kind.upper()]
    try:
        matrix, kind = fileio.load(args.input, kind)
    except OSError as exc:
        raise DataError(f'cannot read input: {exc}') from None
    if args.config and matrix.shape[0] != cfg.array.size:
        raise DataError(f'input has {matrix.shape[0]} rows but the config declares '
                        f'{cfg.array.size} array elements')
    if kind is fileio.Kind.SNAPSHOTS:
        num_snapshots = matrix.shape[1]
        R = fb_smooth(sample_covariance(matrix))
    else:
        R = check_hermitian(matrix, 'input covariance')
        num_snapshots = args.snapshots
    if args.method != 'target':
        if num_snapshots is None and args.method != 'eigengap':
            raise ConfigError('--snapshots is required for MDL/AIC on a covariance input')
        est = enumerate_baseline(R, num_snapshots or 0, BaselineKind(args.method))
        print(f'est_num_sources={est}')
        return EXIT_OK
    res = decompose(R, cfg.require_solver())
    print(f'est_num_sources={res.est_num_sources}')
    print(f'iterations={res.iterations}')
    print(f'converged={str(res.converged).lower()}')
    print(f'fit_error={res.fit_error:.6g}')
    if args.dump:
        target = _outdir(cfg) / 'decomposition.npz'
        np.savez(target, L_hat=res.L_hat, D_hat=res.D_hat, singular_values=res.singular_values,
                 residual_LZ=res.residual_LZ, residual_DW=res.residual_DW)
        print(f'singular_values={" ".join(f"{s:.6g}" for s in res.singular_values)}')
        log.info('decomposition written to %s', target)
    return EXIT_OK


def cmd_sweep(args):
    cfg = _load_config(args)
    name = args.preset or Path(args.config).stem
    out = _outdir(cfg)
    threads = _threads(args)
    for spec in cfg.sweep_specs():
        stem = f'{name}_{spec.label}' if spec.label else name
        res = run_sweep(spec, threads=threads)
        res.to_csv(out / f'{stem}.csv')
        if spec.keep_trials:
            res.trials_to_csv(out / f'{stem}_trials.csv')
        print(f'[{stem}] axis={spec.axis.value}')
        for i, v in enumerate(res.values):
            cells = '  '.join(f'{m}={res.pcd[i, j]:.3f}' for j, m in enumerate(res.methods))
            print(f'  {v:>8g}  {cells}')
    return EXIT_OK


def cmd_trace(args):
    cfg = _load_config(args)
    params = cfg.require_solver()
    num_frames = cfg.trace.get('num_frames')
    if num_frames is None:
        raise ConfigError('[trace] num_frames is required')
    frame_size = cfg.trace.get('frame_size')
    trace = singular_value_trace(cfg.array, cfg.scenario, num_frames, params, frame_size=frame_size)
    target = _outdir(cfg) / 'trace.csv'
    trace.to_csv(target)
    r_R, r_L = trace.spacing_ratios()
    print(f'frames={trace.num_frames} r(R)={r_R.value:.4g} r(L)={r_L.value:.4g}'
          + (' (degenerate)' if r_L.degenerate else ''))
    etas = cfg.trace.get('etas')
    if etas:
        for eta, r in spacing_ratio_vs_eta(cfg.array, cfg.scenario, num_frames, params, etas,
                                           frame_size=frame_size).items():
            print(f'  eta={eta:g} r(L)={r.value:.4g}')
    print(f'-> {target}')
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH', help='TOML run configuration')
    common.add_argument('--out', metavar='DIR', help='output directory (overrides [output] dir)')
    common.add_argument('--seed', type=int, help='override scenario and sweep seeds')
    common.add_argument('--eta', type=float, help='nuclear-norm weight (required for the decomposition)')
    common.add_argument('--threads', type=int, help='worker threads (fallback: TARGET_THREADS)')
    common.add_argument('-v', '--verbosity', choices=['debug', 'info', 'warning', 'error'])

    p = argparse.ArgumentParser(prog='toeplitz-enum', description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest='command', required=True)

    s = sub.add_parser('simulate', parents=[common], help='synthesize a snapshot file')
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser('enumerate', parents=[common], help='estimate the source count of a file')
    e.add_argument('input', help='TGT1 container or re,im text file')
    e.add_argument('--kind', choices=['auto', 'snapshots', 'covariance'], default='auto')
    e.add_argument('--method', choices=['target'] + [k.value for k in BaselineKind], default='target')
    e.add_argument('--snapshots', type=int, help='snapshot count behind a covariance input (MDL/AIC)')
    e.add_argument('--dump', action='store_true', help='write L, D and singular values to the output dir')
    e.set_defaults(func=cmd_enumerate)

    w = sub.add_parser('sweep', parents=[common], help='Monte Carlo PCD sweep')
    w.add_argument('--preset', choices=cfgmod.PRESETS)
    w.add_argument('--trials', type=int)
    w.set_defaults(func=cmd_sweep)

    t = sub.add_parser('trace', parents=[common], help='per-frame singular values of R and L')
    t.set_defaults(func=cmd_trace)
    return p


def main(argv=None):
    logging.basicConfig(format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr, level=logging.INFO)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EnumerationError as exc:
        print(f'error: {exc}', file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f'error: numerical failure: {exc}', file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == '__main__':
    sys.exit(main())
