"""
COMMAND-LINE INTERFACE
======================

ownership-entropy <command> [options]

Commands:
    degrees     edge list -> degree table and per-degree histograms
    fit         histogram or sample -> power-law / exponential fit (JSON)
    joint       two marginals + copula -> joint PMF
    entropy     joint (or marginals + copula) -> Shannon entropy and mutual information
    distance    Euclidean distance between two joints
    scan        objective along a theta grid
    calibrate   distance-minimizing or entropy-extremizing theta (JSON)
    report      Case 1 + Case 2 + Case 3 results for one edge list (JSON)

Exit codes: 0 success, 1 domain error (JSON error report on stderr),
2 usage error or missing input, 3 completed with validity alarms.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional, Tuple

from pydantic import ValidationError

from ownership_entropy import calibrate as cal
from ownership_entropy.config import (
    DEFAULT_WORKERS,
    FIXTURE_IN_N,
    FIXTURE_IN_RATE,
    FIXTURE_OUT_GAMMA,
    FIXTURE_OUT_N,
    LOG_FILE,
    REPORT_K_GRID,
    SAMPLE_EDGE_FILE,
    validate_environment,
)
from ownership_entropy.copulas import make_copula, parse_copula_spec
from ownership_entropy.errors import (
    ConfigurationError,
    EdgeListParseError,
    OwnershipEntropyError,
)
from ownership_entropy.logging_config import get_logger, parse_log_level, setup_logging
from ownership_entropy.marginals import (
    empirical_pmf,
    exponential_pmf,
    fit_exponential_ls,
    fit_power_law_ls,
    fit_power_law_mle,
    parse_marginal_spec,
    power_law_pmf,
    realize,
    sample_pmf,
)
from ownership_entropy.measures import (
    copula_value_entropy,
    euclidean_distance,
    marginal_entropy,
    mutual_information,
    shannon_entropy,
)
from ownership_entropy.models import (
    NONPARAMETRIC_FAMILIES,
    PARAMETRIC_FAMILIES,
    DiscretePMF,
    JointPMF,
    RunConfig,
)
from ownership_entropy.net import (
    build_degree_sample,
    degree_sequences,
    infer_format,
    load_edge_list,
)
from ownership_entropy.sklar import empirical_joint, joint_from_copula, marginals_of
from ownership_entropy import writers

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_USAGE = 2
EXIT_ALARM = 3

FAMILIES = NONPARAMETRIC_FAMILIES + PARAMETRIC_FAMILIES
FILE_SUFFIXES = ('.csv', '.tsv', '.tab', '.txt', '.json')


# ============================================================================
# PARSER
# ============================================================================

def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-o', '--output', default=None, help='Output file (default: stdout)')
    common.add_argument('--format', dest='output_format', choices=('csv', 'json'), default='csv',
                        help='Output format for tabular results (default: csv)')
    common.add_argument('-q', '--quiet', action='store_true', help='Only errors on the console')
    return common


def _marginal_options(parser: argparse.ArgumentParser):
    parser.add_argument('--k-in', default=None,
                        help='k_in marginal: histogram CSV (j,prob) or spec such as exponential:-0.9727:10')
    parser.add_argument('--k-out', default=None,
                        help='k_out marginal: histogram CSV (j,prob) or spec such as power_law:2.159:19')
    parser.add_argument('--edges', default=None,
                        help='Edge list whose empirical joint supplies the marginals (and distance target)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='ownership-entropy',
        description='Copula-based concentration measures for directed ownership networks',
    )
    common = _common_options()
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('degrees', parents=[common], help='Degree table and histograms of an edge list')
    p.add_argument('edges', help='Edge list file (owner,owned[,weight])')
    p.add_argument('--input-format', choices=('csv', 'tsv'), default=None)
    p.add_argument('--mode', choices=('joint_positive', 'marginal_positive'), default='joint_positive')
    p.add_argument('--hist-dir', default=None, help='Directory for k_in_hist.csv and k_out_hist.csv')

    p = sub.add_parser('fit', parents=[common], help='Fit a power-law or exponential marginal (JSON)')
    p.add_argument('input', nargs='?', default=None,
                   help='Histogram CSV (j,prob) for least squares, sample CSV for mle')
    p.add_argument('--family', choices=('power_law', 'exponential'), default='power_law')
    p.add_argument('--method', choices=('ls', 'survival', 'mle'), default='ls')
    p.add_argument('--synthetic', default=None,
                   help='Fit a generated input instead, e.g. power_law:2:19')
    p.add_argument('--size', type=int, default=100_000, help='Synthetic sample size for mle')
    p.add_argument('--seed', type=int, default=None, help='Seed for synthetic samples')

    p = sub.add_parser('joint', parents=[common], help='Joint PMF of two marginals under a copula')
    _marginal_options(p)
    p.add_argument('--copula', default='product', help='product, frechet-lower, frechet-upper, gumbel:2, ...')

    p = sub.add_parser('entropy', parents=[common], help='Entropy of a joint PMF')
    _marginal_options(p)
    p.add_argument('--joint', default=None, help='Joint CSV (i,j,mass); otherwise built from --copula')
    p.add_argument('--copula', default='product')
    p.add_argument('--literal', action='store_true',
                   help='Also report -sum C ln C over copula values (diagnostic)')

    p = sub.add_parser('distance', parents=[common], help='Euclidean distance between joints')
    _marginal_options(p)
    p.add_argument('target', help='Joint CSV (i,j,mass)')
    p.add_argument('other', nargs='?', default=None,
                   help='Second joint CSV; otherwise the --copula joint with the target marginals')
    p.add_argument('--copula', default='product')

    for name, text in (('scan', 'Objective along a theta grid'),
                       ('calibrate', 'Calibrate theta (JSON)')):
        p = sub.add_parser(name, parents=[common], help=text)
        _marginal_options(p)
        p.add_argument('--family', choices=PARAMETRIC_FAMILIES, required=True)
        p.add_argument('--objective', choices=cal.OBJECTIVES, default='entropy')
        p.add_argument('--target', default=None, help='Target joint CSV for the distance objective')
        p.add_argument('--workers', type=int, default=None)
        if name == 'scan':
            p.add_argument('--grid', required=True, help='lo:hi:steps, e.g. 1:10:100')
        else:
            p.add_argument('--goal', choices=('min', 'max'), default=None,
                           help='Default: min for distance, max for entropy')
            p.add_argument('--window', default=None, help='Theta window lo:hi, e.g. --window=-1:-0.05 (default: family window)')
            p.add_argument('--branch', choices=cal.BRANCHES, default='both')
            p.add_argument('--coarse-points', type=int, default=None)
            p.add_argument('--trace', action='store_true', help='Include the coarse scan in the JSON')

    p = sub.add_parser('report', parents=[common], help='Case 1-3 results for one edge list (JSON)')
    p.add_argument('edges', nargs='?', default=SAMPLE_EDGE_FILE)
    p.add_argument('--k-grid', default=':'.join(str(x) for x in REPORT_K_GRID),
                   help='Marginal exponent grid lo:hi:steps for Case 3')
    p.add_argument('--workers', type=int, default=None)
    return parser


# ============================================================================
# INPUT HELPERS
# ============================================================================

def _input_paths(args) -> Tuple[str, ...]:
    paths = []
    for name in ('edges', 'input', 'joint', 'target', 'other'):
        value = getattr(args, name, None)
        if value:
            paths.append(value)
    for name in ('k_in', 'k_out'):
        value = getattr(args, name, None)
        if value and (value.lower().endswith(FILE_SUFFIXES) or os.sep in value):
            paths.append(value)
    return tuple(paths)


def _load_marginal(text: str) -> DiscretePMF:
    if os.path.exists(text):
        return writers.read_pmf_csv(text)
    return realize(parse_marginal_spec(text))


def _edge_joint(path: str) -> Tuple[JointPMF, list]:
    edge_list = load_edge_list(path, infer_format(path))
    records = degree_sequences(edge_list)
    return empirical_joint(build_degree_sample(records, 'joint_positive')), records


def _resolve_marginals(args, target: Optional[JointPMF] = None) -> Tuple[DiscretePMF, DiscretePMF, Optional[JointPMF]]:
    """(k_in PMF, k_out PMF, empirical joint or None) from --edges, --k-in/--k-out, a target, or the fixture."""
    empirical = None
    if getattr(args, 'edges', None):
        empirical, _ = _edge_joint(args.edges)
    source = empirical if empirical is not None else target
    base_in, base_out = marginals_of(source) if source is not None else (
        exponential_pmf(FIXTURE_IN_RATE, FIXTURE_IN_N),
        power_law_pmf(FIXTURE_OUT_GAMMA, FIXTURE_OUT_N),
    )
    pmf_in = _load_marginal(args.k_in) if args.k_in else base_in
    pmf_out = _load_marginal(args.k_out) if args.k_out else base_out
    return pmf_in, pmf_out, empirical


def _workers(args, env) -> int:
    if getattr(args, 'workers', None):
        return args.workers
    return env.workers if env is not None else DEFAULT_WORKERS


def _emit_table(args, csv_text: str, payload: dict):
    text = writers.dumps_json(payload) if args.output_format == 'json' else csv_text
    writers.write_text(text, args.output)


def _emit_json(args, payload: dict):
    writers.write_text(writers.dumps_json(payload), args.output)


# ============================================================================
# COMMANDS (each returns the validity alarms it saw)
# ============================================================================

def cmd_degrees(args, env) -> List[str]:
    edge_list = load_edge_list(args.edges, args.input_format or infer_format(args.edges))
    records = degree_sequences(edge_list)
    if args.mode == 'marginal_positive':
        samples = build_degree_sample(records, 'marginal_positive')
        pmf_in, pmf_out = empirical_pmf(samples.k_in), empirical_pmf(samples.k_out)
    else:
        pmf_in, pmf_out = marginals_of(empirical_joint(build_degree_sample(records, 'joint_positive')))

    table = writers.degrees_csv(records)
    _emit_table(args, table, {
        'nodes': len(records),
        'edges': len(edge_list.edges),
        'self_loops_dropped': edge_list.self_loops_dropped,
        'duplicates_dropped': edge_list.duplicates_dropped,
        'records': [r.model_dump() for r in records],
        'k_in': writers.pmf_payload(pmf_in),
        'k_out': writers.pmf_payload(pmf_out),
    })
    if args.output and not args.quiet:
        print(table, end='')

    if args.hist_dir:
        os.makedirs(args.hist_dir, exist_ok=True)
        writers.write_text(writers.pmf_csv(pmf_in), os.path.join(args.hist_dir, 'k_in_hist.csv'))
        writers.write_text(writers.pmf_csv(pmf_out), os.path.join(args.hist_dir, 'k_out_hist.csv'))
    return []


def cmd_fit(args, env) -> List[str]:
    if args.seed is not None and not args.synthetic:
        raise ConfigurationError("--seed is only used with --synthetic.")
    if args.family == 'exponential' and args.method != 'ls':
        raise ConfigurationError("The exponential family supports --method ls only.")
    if args.input is None and args.synthetic is None:
        raise ConfigurationError("fit needs an input file or --synthetic.")

    synthetic = realize(parse_marginal_spec(args.synthetic)) if args.synthetic else None
    if args.method == 'mle':
        if synthetic is not None:
            sample = sample_pmf(synthetic, args.size, args.seed)
            report = fit_power_law_mle(sample, synthetic.n)
        else:
            report = fit_power_law_mle(writers.read_sample_csv(args.input))
    else:
        pmf = synthetic if synthetic is not None else writers.read_pmf_csv(args.input)
        if args.family == 'exponential':
            report = fit_exponential_ls(pmf)
        else:
            report = fit_power_law_ls(pmf, 'survival' if args.method == 'survival' else 'density')

    _emit_json(args, {'fit': writers.fit_payload(report)})
    return []


def cmd_joint(args, env) -> List[str]:
    spec = parse_copula_spec(args.copula)
    pmf_in, pmf_out, _ = _resolve_marginals(args)
    joint = joint_from_copula(spec, pmf_in, pmf_out)
    _emit_table(args, writers.joint_csv(joint), {'copula': spec.label, 'joint': writers.joint_payload(joint)})
    return list(joint.alarms)


def cmd_entropy(args, env) -> List[str]:
    spec = parse_copula_spec(args.copula)
    if args.joint:
        joint = writers.read_joint_csv(args.joint)
        pmf_in, pmf_out = marginals_of(joint)
    else:
        pmf_in, pmf_out, _ = _resolve_marginals(args)
        joint = joint_from_copula(spec, pmf_in, pmf_out)

    values = {
        'entropy': shannon_entropy(joint),
        'entropy_k_in': marginal_entropy(pmf_in),
        'entropy_k_out': marginal_entropy(pmf_out),
        'mutual_information': mutual_information(joint),
    }
    if args.literal:
        values['copula_value_entropy'] = copula_value_entropy(spec, pmf_in, pmf_out)
    _emit_table(args, writers.scalars_csv(values), dict(values, alarms=joint.alarms))
    return list(joint.alarms)


def cmd_distance(args, env) -> List[str]:
    target = writers.read_joint_csv(args.target)
    if args.other:
        other = writers.read_joint_csv(args.other)
        label = args.other
    else:
        spec = parse_copula_spec(args.copula)
        pmf_in, pmf_out, _ = _resolve_marginals(args, target)
        other = joint_from_copula(spec, pmf_in, pmf_out)
        label = spec.label
    values = {'distance': euclidean_distance(target, other)}
    _emit_table(args, writers.scalars_csv(values), dict(values, compared=label, alarms=other.alarms))
    return list(other.alarms)


def _scan_inputs(args):
    target = writers.read_joint_csv(args.target) if args.target else None
    pmf_in, pmf_out, empirical = _resolve_marginals(args, target)
    if target is None and args.objective == 'distance':
        if empirical is None:
            raise ConfigurationError("The distance objective needs --target or --edges.")
        target = empirical
    return pmf_in, pmf_out, target


def cmd_scan(args, env) -> List[str]:
    pmf_in, pmf_out, target = _scan_inputs(args)
    scan = cal.scan_theta(args.family, pmf_in, pmf_out, args.objective, cal.parse_grid(args.grid),
                          target=target, workers=_workers(args, env))
    _emit_table(args, writers.scan_csv(scan), {
        'family': args.family,
        'objective': scan.objective,
        'theta': scan.points[:, 0],
        'values': scan.values,
        'alarms': scan.alarms,
    })
    return list(scan.alarms)


def cmd_calibrate(args, env) -> List[str]:
    pmf_in, pmf_out, target = _scan_inputs(args)
    window = cal.parse_window(args.window) if args.window else None
    coarse = args.coarse_points or (env.coarse_points if env is not None else None)
    options = dict(window=window, branch=args.branch, coarse_points=coarse, workers=_workers(args, env))
    if args.objective == 'distance':
        if args.goal == 'max':
            raise ConfigurationError("The distance objective is minimized only.")
        result = cal.minimize_distance(args.family, pmf_in, pmf_out, target, **options)
    else:
        result = cal.extremize_entropy(args.family, pmf_in, pmf_out, args.goal or 'max', **options)
    _emit_json(args, {'calibration': writers.calibration_payload(result, include_trace=args.trace)})
    return list(result.alarms)


def build_report(edges_path: str, k_grid, workers: int = DEFAULT_WORKERS, coarse_points: Optional[int] = None) -> Tuple[dict, List[str]]:
    """Case 1 (distances), Case 2 (entropies) and Case 3 (entropy surfaces) for one edge list."""
    empirical, records = _edge_joint(edges_path)
    pmf_in, pmf_out = marginals_of(empirical)
    alarms: List[str] = []

    nonparametric = {}
    for family in NONPARAMETRIC_FAMILIES:
        joint = joint_from_copula(make_copula(family), pmf_in, pmf_out)
        alarms.extend(joint.alarms)
        nonparametric[family] = joint

    options = dict(coarse_points=coarse_points, workers=workers)
    case1 = {
        'distances': {f: euclidean_distance(j, empirical) for f, j in nonparametric.items()},
        'calibrations': {},
    }
    case2 = {
        'entropy_empirical': shannon_entropy(empirical),
        'mutual_information_empirical': mutual_information(empirical),
        'entropies': {f: shannon_entropy(j) for f, j in nonparametric.items()},
        'maximize': {},
        'minimize': {},
    }
    for family in PARAMETRIC_FAMILIES:
        fit = cal.minimize_distance(family, pmf_in, pmf_out, empirical, **options)
        high = cal.extremize_entropy(family, pmf_in, pmf_out, 'max', **options)
        low = cal.extremize_entropy(family, pmf_in, pmf_out, 'min', **options)
        for result in (fit, high, low):
            alarms.extend(result.alarms)
        case1['calibrations'][family] = writers.calibration_payload(fit)
        case2['maximize'][family] = writers.calibration_payload(high)
        case2['minimize'][family] = writers.calibration_payload(low)

    case3 = {}
    for step in sorted(cal.CASE3_STEPS):
        out_spec, in_spec = cal.case3_step(step, pmf_in, pmf_out)
        surfaces = {}
        for family in FAMILIES:
            surface = cal.entropy_surface(out_spec, in_spec, family, k_grid, workers=workers)
            alarms.extend(surface.trace.alarms)
            surfaces[family] = writers.surface_payload(surface)
        case3[f'step{step}'] = {'k_out': out_spec.variant, 'k_in': in_spec.variant, 'surfaces': surfaces}

    report = {
        'input': os.path.basename(edges_path),
        'nodes': len(records),
        'support': {'n_in': empirical.n_in, 'n_out': empirical.n_out},
        'case1': case1,
        'case2': case2,
        'case3': case3,
        'alarms': sorted(set(alarms)),
    }
    return report, sorted(set(alarms))


def cmd_report(args, env) -> List[str]:
    coarse = env.coarse_points if env is not None else None
    report, alarms = build_report(args.edges, cal.parse_grid(args.k_grid), _workers(args, env), coarse)
    _emit_json(args, report)
    return alarms


COMMANDS = {
    'degrees': cmd_degrees,
    'fit': cmd_fit,
    'joint': cmd_joint,
    'entropy': cmd_entropy,
    'distance': cmd_distance,
    'scan': cmd_scan,
    'calibrate': cmd_calibrate,
    'report': cmd_report,
}


# ============================================================================
# ENTRY POINT
# ============================================================================

def _error_payload(error: OwnershipEntropyError) -> dict:
    payload = {'kind': error.kind, 'message': str(error)}
    if isinstance(error, EdgeListParseError):
        payload['rows'] = [{'line': line, 'message': msg} for line, msg in error.errors]
    return {'error': payload}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    env = validate_environment()
    setup_logging(
        log_level=parse_log_level(env.log_level) if env is not None else logging.INFO,
        log_file=env.log_file if env is not None else LOG_FILE,
        console_level=logging.ERROR if args.quiet else logging.WARNING,
    )

    try:
        RunConfig(
            command=args.command,
            inputs=_input_paths(args),
            output=args.output,
            output_format=args.output_format,
            quiet=args.quiet,
            options={k: v for k, v in vars(args).items() if k not in ('command', 'output', 'output_format', 'quiet')},
        )
    except ValidationError as e:
        message = e.errors()[0]['msg'].removeprefix('Value error, ')
        print(f"ownership-entropy {args.command}: error: {message}", file=sys.stderr)
        return EXIT_USAGE

    logger.info(f"Running '{args.command}'")
    try:
        alarms = COMMANDS[args.command](args, env)
    except OwnershipEntropyError as e:
        logger.error(f"'{args.command}' failed: {e}")
        report = writers.dumps_json(_error_payload(e))
        sys.stderr.write(report)
        if args.output:
            writers.write_text(report, args.output)
        return EXIT_DOMAIN_ERROR

    if alarms:
        logger.warning(f"'{args.command}' completed with {len(alarms)} validity alarm(s)")
        return EXIT_ALARM
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
