import argparse
import logging
import sys
from typing import List, Optional

import numpy as np
import pandas as pd

import pykneser.exceptions as exc
from pykneser import counting, harness, oracle
from pykneser.formula import VARIANTS, gen_cnf, parse_dimacs, write_dimacs
from pykneser.kneser import random_coloring
from pykneser.resolution import FORMATS, MODES, check_refutation, emit_proof, parse_proof, proof_size, transport
from pykneser.substitution import apply_to_cnf, build_phi, compose_phi, verify_image, write_substitution
from pykneser.version import __version__


logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _output(path: Optional[str]):
    return sys.stdout if path in (None, '-') else path


def _report(frame: pd.DataFrame, path: Optional[str]) -> int:
    oracle.write_report(frame, _output(path))
    for row in frame.itertuples(index=False):
        if row.verdict == 'fail':
            print('FAIL {} {}: {}'.format(row.kind, row.params, row.witness), file=sys.stderr)
    return EXIT_OK if oracle.report_passed(frame) else EXIT_FAIL


def cmd_gen(args) -> int:
    cnf = gen_cnf(args.variant, args.n, args.k, args.colors, shuffle_seed=args.seed)
    write_dimacs(cnf, _output(args.output))
    return EXIT_OK


def cmd_subst(args) -> int:
    phi = build_phi(args.k, args.n, args.variant, args.colors)
    write_substitution(phi, _output(args.output))
    return EXIT_OK


def cmd_verify_subst(args) -> int:
    report = verify_image(args.k, args.n, args.variant, args.colors)
    print(report.summary())
    if args.report:
        oracle.write_report(pd.DataFrame(report.findings(), columns=oracle.FINDING_COLUMNS), args.report)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_transport(args) -> int:
    cnf = parse_dimacs(args.cnf)
    proof = parse_proof(args.proof, args.format, cnf)
    phi = compose_phi(cnf.k, cnf.n, cnf.variant, cnf.colors) if args.to_php else build_phi(cnf.k - 1, cnf.n, cnf.variant, cnf.colors)
    image = transport(proof, phi, tighten=not args.literal)
    emit_proof(image, _output(args.output))
    target = apply_to_cnf(phi, cnf)
    verdict = check_refutation(target, image, 'tolerant')
    print('{} -> {}: {} steps -> {} steps, {}'.format(phi.source.label, phi.target.label, proof_size(proof),
                                                      proof_size(image), verdict), file=sys.stderr)
    return EXIT_OK if verdict else EXIT_FAIL


def cmd_check_proof(args) -> int:
    cnf = parse_dimacs(args.cnf)
    proof = parse_proof(args.proof, args.format, cnf)
    verdict = check_refutation(cnf, proof, args.mode)
    print(verdict)
    return EXIT_OK if verdict else EXIT_FAIL


def cmd_count_circuit(args) -> int:
    circuit = counting.build_count(args.n)
    print('Count_{}: {} gates, {} outputs'.format(args.n, circuit.size, len(circuit.outputs)))
    if args.netlist:
        counting.write_netlist(circuit, args.netlist)
    if args.fit:
        c, sizes = counting.fit_circuit_size()
        print('size(n) ~ {:.3f} * n log2 n, measured {}'.format(c, sizes))
    return EXIT_OK


def cmd_identities(args) -> int:
    report = counting.check_count_identities(args.n, args.samples, args.seed)
    for item in report.items:
        print('identity {}: {} ({} assignments{})'.format(item.item, 'pass' if item.passed else 'FAIL', item.checked,
                                                          ', exhaustive' if item.exhaustive else ''))
    for note in report.notes:
        print('note: ' + note)
    if args.report:
        oracle.write_report(report.to_frame(), args.report)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_oracle_k2(args) -> int:
    frames = [oracle.trichotomy_campaign(args.n, args.samples, args.seed, args.workers)]
    if args.n <= 7:
        frames.append(oracle.four_set_campaign(args.n))
    return _report(pd.concat(frames, ignore_index=True), args.report)


def cmd_oracle_k3(args) -> int:
    frame = oracle.k3_family_campaign(args.n, args.samples or 10000, args.seed, args.workers)
    rows = []
    for summand in oracle.N3_SUMMANDS:
        witnesses = oracle.failed_program_witnesses([args.n], summand)[args.n] if args.n >= 6 else []
        rows.append(oracle.Finding('n3-bound', 'n={} summand={}'.format(args.n, summand),
                                   'p reaching C(n,3): {}'.format(witnesses or 'none'), 'info'))
    frame = pd.concat([frame, pd.DataFrame(rows, columns=oracle.FINDING_COLUMNS)], ignore_index=True)
    return _report(frame, args.report)


def cmd_audit(args) -> int:
    if args.k != 2:
        raise exc.FunctionInputFail('The counting chain audit is defined for k=2 (got k={})'.format(args.k))
    frame = oracle.audit_campaign(args.n, args.samples, args.seed, args.workers)
    return _report(frame, args.report or 'audit_k2_n{}_seed{}.tsv'.format(args.n, args.seed))


def cmd_witness(args) -> int:
    if args.trace:
        coloring = random_coloring(args.n, args.k, args.n - 2 * args.k + 1, np.random.default_rng(args.seed))
        pair = oracle.find_mono_disjoint_k3(coloring) if args.k == 3 else oracle.find_mono_disjoint(coloring)
        for line in pair.trace:
            print(line)
        print(pair)
        return EXIT_OK
    frame = oracle.witness_campaign(args.n, args.k, args.samples, args.seed, args.workers)
    return _report(frame, args.report)


def cmd_bench(args) -> int:
    adapter = harness.read_adapter_config(args.solver_config) if args.solver_config else harness.default_adapter()
    colors = int(args.colors) if args.colors.isdigit() else args.colors
    spec = harness.CampaignSpec(args.variant, args.k, range(args.n_min, args.n_max + 1), colors, adapter,
                                args.timeout, args.seed, args.proof, args.workers)
    result = harness.campaign(spec, args.instances)
    harness.write_campaign_csv(result, _output(args.output))
    frame = harness.campaign_frame(result)
    rate = harness.growth_rate(frame)
    print(result.hardware, file=sys.stderr)
    if rate is not None:
        print('log(seconds) ~ {:.3f} n (x{:.2f} per n, r={:.3f}, {} points)'.format(
            rate.slope, rate.factor_per_n, rate.rvalue, rate.points), file=sys.stderr)
    wrong = [r for r in result.rows if r.error or (args.proof and r.result == harness.UNSAT and not r.proof_checked)]
    return EXIT_FAIL if wrong else EXIT_OK


def _add_instance_args(p, variants=VARIANTS):
    p.add_argument('--variant', choices=variants, default='kneser', help='formula family (default kneser)')
    p.add_argument('--n', type=int, required=True, help='ground set size')
    p.add_argument('--k', type=int, required=True, help='subset size')
    p.add_argument('--colors', type=int, default=None, help='number of colors (default n-2k+1)')


def _add_sampling_args(p, samples=None):
    p.add_argument('--samples', type=int, default=samples, help='number of random samples (default {})'.format(
        samples or 'exhaustive where feasible'))
    p.add_argument('--seed', type=int, default=0, help='RNG seed recorded in the report (default 0)')
    p.add_argument('--workers', type=int, default=1, help='worker processes (default 1)')
    p.add_argument('--report', default=None, help='tab-separated findings file (default stdout)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='pykneser', description='Kneser formula generation, substitution, '
                                     'proof checking and combinatorial oracles')
    parser.add_argument('-V', '--version', action='version', version='%(prog)s ' + __version__)
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v for info, -vv for debug logging')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('gen', help='emit a DIMACS instance')
    _add_instance_args(p)
    p.add_argument('--seed', type=int, default=None, help='shuffle the clause order with this seed')
    p.add_argument('-o', '--output', default=None, help='output file (default stdout)')
    p.set_defaults(func=cmd_gen)

    for name, func, text in [('subst', cmd_subst, 'emit the substitution from (k+1, n) to (k, n-2)'),
                             ('verify-subst', cmd_verify_subst, 'check that the substituted instance is the smaller one')]:
        p = sub.add_parser(name, help=text)
        _add_instance_args(p, ('kneser', 'kneser-onto', 'schrijver', 'schrijver-onto'))
        p.add_argument('-o', '--output', default=None, help='output file (default stdout)')
        p.add_argument('--report', default=None, help='tab-separated findings file')
        p.set_defaults(func=func)

    p = sub.add_parser('transport', help='push a refutation through the substitution')
    p.add_argument('--cnf', required=True, help='DIMACS file of the source instance')
    p.add_argument('--proof', required=True, help='refutation of the source instance')
    p.add_argument('--format', choices=FORMATS, default='native', help='proof format (default native)')
    p.add_argument('--to-php', action='store_true', help='compose substitutions down to k=1')
    p.add_argument('--literal', action='store_true', help='keep literal clause images instead of tightening')
    p.add_argument('-o', '--output', default=None, help='output file for the transported proof (default stdout)')
    p.set_defaults(func=cmd_transport)

    p = sub.add_parser('check-proof', help='check a resolution refutation')
    p.add_argument('--cnf', required=True, help='DIMACS file')
    p.add_argument('--proof', required=True, help='proof file')
    p.add_argument('--format', choices=FORMATS, default='native', help='proof format (default native)')
    p.add_argument('--mode', choices=MODES, default='strict', help='checking mode (default strict)')
    p.set_defaults(func=cmd_check_proof)

    p = sub.add_parser('count-circuit', help='build the popcount circuit')
    p.add_argument('--n', type=int, required=True, help='number of inputs')
    p.add_argument('--netlist', default=None, help='write the netlist to this file')
    p.add_argument('--fit', action='store_true', help='fit size(n) = c n log2 n over n = 8..128')
    p.set_defaults(func=cmd_count_circuit)

    p = sub.add_parser('identities', help='check the counting identities')
    p.add_argument('--n', type=int, required=True, help='number of inputs')
    _add_sampling_args(p)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser('oracle-k2', help='trichotomy and four-set sweeps for 2-subsets')
    p.add_argument('--n', type=int, required=True, help='ground set size')
    _add_sampling_args(p)
    p.set_defaults(func=cmd_oracle_k2)

    p = sub.add_parser('oracle-k3', help='class bound sweep for 3-subsets')
    p.add_argument('--n', type=int, required=True, help='ground set size')
    _add_sampling_args(p)
    p.set_defaults(func=cmd_oracle_k3)

    p = sub.add_parser('audit', help='audit the k=2 counting chain on random colorings')
    p.add_argument('--k', type=int, default=2, help='subset size, only 2 is supported')
    p.add_argument('--n', type=int, required=True, help='ground set size')
    _add_sampling_args(p, samples=1000)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser('witness', help='find monochromatic disjoint pairs on random colorings')
    p.add_argument('--k', type=int, default=3, help='subset size (default 3)')
    p.add_argument('--n', type=int, required=True, help='ground set size')
    p.add_argument('--trace', action='store_true', help='print the extraction trace for one coloring')
    _add_sampling_args(p, samples=1000)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser('bench', help='run an external solver over a grid of instances')
    p.add_argument('--variant', choices=VARIANTS, default='kneser', help='formula family (default kneser)')
    p.add_argument('--k', type=int, default=2, help='subset size (default 2)')
    p.add_argument('--n-min', type=int, default=5, help='smallest n (default 5)')
    p.add_argument('--n-max', type=int, default=11, help='largest n (default 11)')
    p.add_argument('--colors', default='unsat', help='unsat (n-2k+1), sat (n-2k+2) or a number (default unsat)')
    p.add_argument('--solver-config', default=None, help='key=value adapter file (default: ${})'.format(harness.SOLVER_ENV))
    p.add_argument('--timeout', type=float, default=60, help='seconds per run (default 60)')
    p.add_argument('--seed', type=int, default=None, help='shuffle clause order with this seed')
    p.add_argument('--proof', action='store_true', help='request and check DRAT proofs')
    p.add_argument('--workers', type=int, default=1, help='concurrent solver processes (default 1)')
    p.add_argument('--instances', default='instances', help='directory for the instance files (default instances)')
    p.add_argument('-o', '--output', default=None, help='CSV file (default stdout)')
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: List[str] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')
    try:
        return args.func(args)
    except (exc.FunctionInputFail, exc.DimacsParseFail, exc.ProofParseFail, exc.ContractViolation,
            exc.SolverNotFound, OSError) as e:
        print('pykneser {}: {}'.format(args.command, e), file=sys.stderr)
        return EXIT_USAGE
    except exc.InternalInconsistency as e:
        logger.error('%s', e)
        return EXIT_FAIL


if __name__ == '__main__':
    sys.exit(main())
