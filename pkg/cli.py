#!/usr/bin/env python3
"""
Command-line interface for the Kisin module toolkit
Shape analysis, sigma and W_C, lift certificates, tau checks and fuzzing

Exit codes: 0 ok, 1 usage or parse error, 2 invariant violations, 3 not generic
"""

import argparse
import sys
from pathlib import Path

# Add the project root to the path so that src is importable from anywhere
sys.path.insert(0, str(Path(__file__).parent))

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATIONS = 2
EXIT_NOT_GENERIC = 3


class ToolkitArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fail(message: str) -> int:
    sys.stderr.write(f"error: {message}\n")
    return EXIT_USAGE


def _model(args):
    from src.algebra import EpsilonModel
    return EpsilonModel.from_name(args.epsilon_model)


def cmd_analyze(args) -> int:
    """Shape report of a module document"""
    from src.documents import load_document, module_from_document
    from src.export import ReportExporter, diagnostics_frame
    from src.shape import ShapeAnalyzer

    document = load_document(args.path)
    module = module_from_document(document)
    report = ShapeAnalyzer().analyze(module)

    exporter = ReportExporter()
    exporter.print_table(diagnostics_frame(report.diagnostics), title=f"Diagnostics for {args.path}")
    exporter.emit_json(report.to_dict(), args.out)
    return EXIT_OK if report.ok else EXIT_VIOLATIONS


def cmd_sigma(args) -> int:
    """C, W_C and sigma for a list of weights"""
    from src.config import CLI_CONFIG
    from src.export import ReportExporter
    from src.rootsys import w_c_combinatorial
    from src.shape import closed_set_from_weights, find_sigma

    weights = tuple(args.weights)
    C = closed_set_from_weights(weights)
    sigma = find_sigma(weights)
    w_c = None
    if len(weights) <= CLI_CONFIG['enumerate_max_dimension']:
        w_c = sorted(perm.as_list() for perm in w_c_combinatorial(C))

    sys.stderr.write(f"C = {C.pairs()}\nsigma = {sigma.as_list()}\n")
    ReportExporter().emit_json({
        'weights': list(weights),
        'C': [list(pair) for pair in C.pairs()],
        'W_C': w_c,
        'sigma': sigma.as_list(),
    }, args.out)
    return EXIT_OK


def cmd_weyl(args) -> int:
    """Compare both descriptions of W_C over every closed subset"""
    import pandas as pd

    from src.config import CLI_CONFIG
    from src.export import ReportExporter
    from src.rootsys import enumerate_closed_sets, w_c_combinatorial, w_c_conjugation

    limit = CLI_CONFIG['weyl_max_dimension']
    if not 1 <= args.d <= limit:
        return _fail(f"weyl is limited to 1 <= d <= {limit}, got {args.d}")

    rows, mismatches = [], []
    for C in enumerate_closed_sets(args.d):
        combinatorial = w_c_combinatorial(C)
        conjugation = w_c_conjugation(C)
        agree = combinatorial == conjugation
        rows.append({'C': str(C.pairs()), 'W_C': len(combinatorial), 'agree': agree})
        if not agree:
            mismatches.append(C.to_dict())

    status = 'PASS' if not mismatches else 'FAIL'
    exporter = ReportExporter()
    exporter.print_table(pd.DataFrame(rows, columns=['C', 'W_C', 'agree']),
                         title=f"Closed subsets of R+ for GL_{args.d}: {len(rows)} ({status})")
    exporter.emit_json({
        'd': args.d,
        'closed_sets': len(rows),
        'agreeing': len(rows) - len(mismatches),
        'mismatches': mismatches,
        'status': status,
    }, args.out)
    return EXIT_OK if status == 'PASS' else EXIT_VIOLATIONS


def cmd_lift(args) -> int:
    """Lift certificate of a module document"""
    from src.documents import epsilon_model_from, load_document, module_from_document, tau_from_document, \
        validate_certificate
    from src.errors import NotGeneric, ShapeViolation
    from src.export import ReportExporter, certificate_frame, diagnostics_frame
    from src.lift import LiftPipeline

    document = load_document(args.path)
    module = module_from_document(document)
    model = epsilon_model_from(document, args.epsilon_model)
    A_tau = tau_from_document(document, module, model, args.precision)
    exporter = ReportExporter()

    try:
        cert = LiftPipeline(model=model).run(module, A_tau)
    except NotGeneric as e:
        sys.stderr.write(f"not generic: characters {e.witness[0]} and {e.witness[1]} differ by eps_p\n")
        exporter.emit_json({'generic': False, 'witness': list(e.witness)}, args.out)
        return EXIT_NOT_GENERIC
    except ShapeViolation as e:
        exporter.print_table(diagnostics_frame(e.diagnostics), title="Shape violations")
        exporter.emit_json({'generic': None, 'diagnostics': [d.to_dict() for d in e.diagnostics]}, args.out)
        return EXIT_VIOLATIONS

    document = validate_certificate(cert.to_dict())
    exporter.print_table(certificate_frame(cert), title=f"Ordinary lift, weights {list(cert.ht_multiset)}")
    exporter.emit_json(document, args.out)
    return EXIT_OK


def cmd_check_tau(args) -> int:
    """Consistency and shape of the tau-matrix of a document"""
    from src.documents import epsilon_model_from, load_document, module_from_document, tau_from_document
    from src.errors import DocumentError, PreconditionFailed
    from src.export import ReportExporter
    from src.phigamma import check_consistency, check_iplus, tau_shape_check

    document = load_document(args.path)
    module = module_from_document(document)
    model = epsilon_model_from(document, args.epsilon_model)
    A_tau = tau_from_document(document, module, model, args.precision)
    if A_tau is None:
        raise DocumentError("document has no tau_matrix", '/tau_matrix')

    iplus = check_iplus(A_tau)
    consistency = check_consistency(module, A_tau, model)
    shape = None
    if iplus and consistency:
        try:
            shape = tau_shape_check(module, A_tau, model)
        except PreconditionFailed as e:
            sys.stderr.write(f"tau shape not checked: {e}\n")

    result = {
        'epsilon_model': model.name,
        'precision': A_tau.precision,
        'iplus': iplus,
        'consistency': consistency.to_dict(),
        'tau_shape': shape,
    }
    sys.stderr.write(f"I+: {iplus}  consistency: {result['consistency']['status']}  shape: {shape}\n")
    ReportExporter().emit_json(result, args.out)
    return EXIT_OK if iplus and consistency and shape else EXIT_VIOLATIONS


def cmd_fuzz(args) -> int:
    """Seeded random corpus through every pipeline"""
    from src.config import EXPORT_CONFIG, FIELD_CONFIG, create_directories
    from src.export import ReportExporter, tally_frame
    from src.fuzz import FuzzRunner

    runner = FuzzRunner(p=args.p or FIELD_CONFIG['default_p'], f=args.f, d=args.d,
                        count=args.count, seed=args.seed, model=_model(args))
    summary = runner.run()

    exporter = ReportExporter()
    exporter.print_table(tally_frame(summary['tallies']), title="Invariant tallies")
    if args.out:
        runner.write_corpus(args.out, summary)
        sys.stderr.write(f"corpus written to {args.out}\n")
        return EXIT_VIOLATIONS if summary['failures'] else EXIT_OK

    exporter.emit_json(summary)
    if summary['failures']:
        # failing runs are always kept for replay
        create_directories()
        run_dir = EXPORT_CONFIG['corpus_dir'] / (
            f"p{summary['p']}_f{summary['f']}_d{summary['d']}_seed{summary['seed']}")
        runner.write_corpus(run_dir, summary)
        sys.stderr.write(f"{len(summary['failures'])} failures written to {run_dir}\n")
        return EXIT_VIOLATIONS
    return EXIT_OK


def cmd_config(args) -> int:
    """Display current configuration"""
    from src.config import print_config
    print_config(sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = ToolkitArgumentParser(add_help=False)
    common.add_argument('--out', help='Write the JSON report (or the fuzz corpus) here instead of stdout')
    common.add_argument('--seed', type=int, default=0, help='Seed for every random choice')
    common.add_argument('--precision', type=int, help='Precision N of tau-matrices in x')
    common.add_argument('--epsilon-model', help='standard, shifted, doubled or comma-separated g coefficients')
    common.add_argument('--log-level', help='Overrides LOG_LEVEL')

    parser = ToolkitArgumentParser(
        description='Kisin module toolkit',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python cli.py analyze fixtures/shape_t204.json
  python cli.py sigma 2 0 4
  python cli.py weyl 3
  python cli.py lift fixtures/lift_generic.json
  python cli.py check-tau fixtures/tau_rank1_diagonal.json
  python cli.py fuzz --p 5 --d 3 --count 1000 --seed 7
  python cli.py config
        """
    )
    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    analyze_parser = subparsers.add_parser('analyze', parents=[common], help='Shape report of a module')
    analyze_parser.add_argument('path', help='Input document')
    analyze_parser.set_defaults(handler=cmd_analyze)

    sigma_parser = subparsers.add_parser('sigma', parents=[common], help='C, W_C and sigma for weights')
    sigma_parser.add_argument('weights', type=int, nargs='+', help='Distinct weights t_1 ... t_d')
    sigma_parser.set_defaults(handler=cmd_sigma)

    weyl_parser = subparsers.add_parser('weyl', parents=[common], help='Check both descriptions of W_C')
    weyl_parser.add_argument('d', type=int, help='Dimension')
    weyl_parser.set_defaults(handler=cmd_weyl)

    lift_parser = subparsers.add_parser('lift', parents=[common], help='Ordinary lift certificate')
    lift_parser.add_argument('path', help='Input document')
    lift_parser.set_defaults(handler=cmd_lift)

    tau_parser = subparsers.add_parser('check-tau', parents=[common], help='Consistency and shape of A_tau')
    tau_parser.add_argument('path', help='Input document with a tau_matrix')
    tau_parser.set_defaults(handler=cmd_check_tau)

    fuzz_parser = subparsers.add_parser('fuzz', parents=[common], help='Seeded random corpus')
    fuzz_parser.add_argument('--p', type=int, help='Prime (KISIN_DEFAULT_P by default)')
    fuzz_parser.add_argument('--f', type=int, default=1, help='Extension degree')
    fuzz_parser.add_argument('--d', type=int, default=3, help='Rank')
    fuzz_parser.add_argument('--count', type=int, default=100, help='Number of items')
    fuzz_parser.set_defaults(handler=cmd_fuzz)

    config_parser = subparsers.add_parser('config', parents=[common], help='Show current configuration')
    config_parser.set_defaults(handler=cmd_config)
    return parser


def main(argv=None) -> int:
    """Main CLI entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE

    from src.config import configure_logging
    from src.errors import DocumentError, InvariantFailure, PreconditionFailed, ToolkitError
    configure_logging(args.log_level)

    try:
        return args.handler(args)
    except KeyboardInterrupt:
        sys.stderr.write("\nInterrupted by user\n")
        return EXIT_USAGE
    except DocumentError as e:
        return _fail(str(e))
    except (InvariantFailure, PreconditionFailed) as e:
        sys.stderr.write(f"violation: {e}\n")
        return EXIT_VIOLATIONS
    except (ToolkitError, ValueError) as e:
        return _fail(str(e))


if __name__ == '__main__':
    sys.exit(main())
