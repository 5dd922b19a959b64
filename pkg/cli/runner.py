# cli/runner.py
"""
Command-line front end for moments, oracle, curve, invariants and duality runs.

Results are written as canonical JSON to stdout (or --out). Exit codes:
0 success, 1 failed verification or module error, 2 usage or spec error.

Depends on: core, utils.file_handler, utils.progress_tracker
"""

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional

from core.curve import CurveSolver, CurveSpec
from core.errors import CapExceededError, SpecFormatError, SuperloopError
from core.fatgraph import FatgraphEngine
from core.gaussian_oracle import GaussianOracle
from core.grassmann import as_coefficient
from core.supermatrix import Grading
from core.toprec import DualityChecker, TopologicalRecursion
from utils.file_handler import FileHandler
from utils.progress_tracker import ProgressTracker

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

logger = logging.getLogger(__name__)


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _pair_of_ints(text: str) -> List[int]:
    values = _int_list(text)
    if len(values) != 2 or min(values) < 0:
        raise argparse.ArgumentTypeError(f"expected two non-negative integers 'a,b', got {text!r}")
    return values


def _exact_list(text: str) -> List[Any]:
    try:
        return [as_coefficient(v.strip()) for v in text.split(',') if v.strip()]
    except (TypeError, ValueError, ArithmeticError) as e:
        raise argparse.ArgumentTypeError(f"expected exact rationals like 1/2, got {text!r} ({e})")


def _exact(text: str) -> Any:
    values = _exact_list(text)
    if len(values) != 1:
        raise argparse.ArgumentTypeError(f"expected one exact rational, got {text!r}")
    return values[0]


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose errors raise instead of exiting"""

    def error(self, message: str):
        raise SpecFormatError(f"{self.prog}: {message}", {'usage': self.format_usage().strip()})


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help="Seed for randomized runs")
    common.add_argument('--jobs', type=int, default=None, help="Worker threads")
    common.add_argument('--out', default=None, help="Write JSON here instead of stdout")
    common.add_argument('--config', default=None, help="JSON file overriding config keys")

    parser = _Parser(prog='superloop', description="Gaussian Hermitian supermatrix model toolkit")
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    moments = sub.add_parser('moments', parents=[common], help="Star-fatgraph moment polynomial")
    moments.add_argument('--valencies', type=_int_list, required=True)
    moments.add_argument('--perfect-only', action='store_true')
    moments.add_argument('--grading', type=_pair_of_ints, default=None, help="p,q")
    moments.add_argument('--y', type=_exact_list, default=None, help="Diagonal external field")
    moments.add_argument('--hbar', type=_exact, default=None)
    moments.add_argument('--check', action='store_true',
                         help="Compare with the index sum and the Gaussian oracle")

    oracle = sub.add_parser('oracle', parents=[common], help="Exact Gaussian oracle")
    oracle.add_argument('--kind', choices=['moment', 'partition', 'exp-source', 'duality'], required=True)
    oracle.add_argument('--grading', type=_pair_of_ints, required=True, help="p,q")
    oracle.add_argument('--sources', type=_pair_of_ints, default=[0, 0], help="m,n")
    oracle.add_argument('--valencies', type=_int_list, default=None)
    oracle.add_argument('--x', type=_exact_list, default=None, help="Source values")
    oracle.add_argument('--y', type=_exact_list, default=None, help="Diagonal external field")
    oracle.add_argument('--hbar', type=_exact, default=None)
    oracle.add_argument('--order', type=int, default=None)

    for name, text in (('curve', "Solve and verify a genus-0 spectral curve"),
                       ('invariants', "Free energies of a spectral curve"),
                       ('duality', "x-y duality report")):
        command = sub.add_parser(name, parents=[common], help=text)
        source = command.add_mutually_exclusive_group(required=True)
        source.add_argument('--spec', default=None, help="CurveSpec JSON file")
        source.add_argument('--inline', default=None, help="CurveSpec JSON text")
        if name != 'curve':
            command.add_argument('--g-max', type=int, default=None)
        if name == 'duality':
            command.add_argument('--tol', type=float, default=None)
            command.add_argument('--no-oracle', action='store_true')
    return parser


class Runner:
    """
    Executes one parsed command and records its checks
    """

    def __init__(self, config: Dict[str, Any] = None):
        self.config = config or {}
        self.logger = logging.getLogger(__name__)
        self.files = FileHandler(self.config)
        self.tracker = ProgressTracker()

    def load_spec(self, args: argparse.Namespace) -> CurveSpec:
        if args.spec is not None:
            data = self.files.read_json_file(args.spec)
            if data is None:
                raise SpecFormatError(f"Cannot read curve spec from {args.spec}")
        else:
            data = self.files.loads(args.inline)
        return CurveSpec.from_dict(data)

    def _g_max(self, args: argparse.Namespace) -> int:
        g_max = self.config.get('g_max', 3) if args.g_max is None else args.g_max
        cap = self.config.get('g_max_cap', 3)
        if not 1 <= g_max <= cap:
            raise CapExceededError(f"g_max must lie in 1..{cap}, got {g_max}", {'g_max': g_max})
        return g_max

    # --- commands ------------------------------------------------------------

    def moments(self, args: argparse.Namespace) -> Dict[str, Any]:
        engine = FatgraphEngine(self.config)
        poly = engine.moment_polynomial(args.valencies, perfect_only=args.perfect_only)
        result: Dict[str, Any] = {'moment_polynomial': poly}
        if args.grading is None:
            return result

        grading = Grading(*args.grading)
        hbar = args.hbar if args.hbar is not None else as_coefficient(self.config.get('hbar', 1))
        y = args.y or [as_coefficient(0)] * grading.size
        if len(y) != grading.size:
            raise SpecFormatError(f"--y needs {grading.size} values, got {len(y)}")
        result.update({'grading': grading, 'y': y, 'hbar': hbar,
                       'specialized': engine.specialize(poly, grading, y, hbar)})
        if args.check and not args.perfect_only:
            indexsum = engine.moment_indexsum(args.valencies, grading, y, hbar)
            oracle = GaussianOracle(self.config).moment(args.valencies, grading, hbar, y)
            result.update({'indexsum': indexsum, 'oracle': oracle})
            self.tracker.record('three_way_moment', result['specialized'] == indexsum == oracle,
                                "specialized polynomial, index sum and Gaussian oracle agree")
        return result

    def oracle(self, args: argparse.Namespace) -> Dict[str, Any]:
        oracle = GaussianOracle(self.config)
        grading = Grading(*args.grading)
        m, n = args.sources
        hbar = args.hbar if args.hbar is not None else as_coefficient(self.config.get('hbar', 1))

        if args.kind == 'moment':
            if not args.valencies:
                raise SpecFormatError("--kind moment needs --valencies")
            return {'grading': grading, 'valencies': args.valencies, 'hbar': hbar,
                    'value': oracle.moment(args.valencies, grading, hbar, args.y)}
        if args.kind == 'partition':
            series = oracle.partition_oracle(m, n, grading.p, grading.q, args.x, args.y, hbar, args.order)
            return {'partition': series}
        if args.kind == 'exp-source':
            report = oracle.exp_source_identity(grading, hbar, args.order)
            self.tracker.record('exp_source_identity', report['holds'], "⟨exp str NY⟩ = exp(ħ/2 str Y²)")
            return report
        seed = self.config.get('seed', 0)
        report = oracle.oracle_duality(m, n, grading.p, grading.q, hbar, seed=seed)
        if report['closed']:
            self.tracker.record('oracle_duality', report['reflected_matches'],
                                "Z(X,Y;ħ) / Z(Y,X;-ħ) is the expected constant")
        return report

    def curve(self, args: argparse.Namespace) -> Dict[str, Any]:
        spec = self.load_spec(args)
        solver = CurveSolver(self.config)
        curve = solver.solve_rational_curve(spec)
        residues = solver.verify_residue_data(curve, strict=False)
        equation = solver.assemble_Eext(curve)
        large_z = solver.large_z_check(curve)
        result = {'curve': curve, 'residues': residues, 'equation': equation, 'large_z': large_z}

        self.tracker.record('residues', residues['holds'], "residue identities of y dx and x dy")
        self.tracker.record('large_z', large_z['holds'], "y ~ x - ħ(total charge)/x")
        eext_tol = self.config.get('eext_tolerance', 1e-9)
        self.tracker.record('equation', equation.relative_residual < eext_tol,
                            "|E(x(z), y(z))| on samples, relative to its terms",
                            {'max_residual': equation.max_residual, 'relative_residual': equation.relative_residual})
        if not spec.sources:
            planar = solver.planar_moment_check(curve, self.config.get('planar_kmax', 6))
            result['planar_moments'] = planar
            self.tracker.record('planar_moments', planar['holds'], "genus-0 resolvent vs fatgraph moments")
        return result

    def invariants(self, args: argparse.Namespace) -> Dict[str, Any]:
        g_max = self._g_max(args)
        spec = self.load_spec(args)
        curve = CurveSolver(self.config).solve_rational_curve(spec)
        recursion = TopologicalRecursion(curve, {**self.config, 'g_max': g_max})
        table = recursion.free_energies(g_max)
        checks = []
        for g in range(1, g_max + 1):
            report = recursion.residue_check(g)
            checks.append(report)
            self.tracker.record(f'residue_g{g}', report['holds'], f"ω_({g},1) residue conditions")
        return {'curve': curve, **table.to_dict(), 'residue_checks': checks}

    def duality(self, args: argparse.Namespace) -> Dict[str, Any]:
        g_max = self._g_max(args)
        spec = self.load_spec(args)
        report = DualityChecker(self.config).duality_report(spec, g_max, args.tol, with_oracle=not args.no_oracle)
        self.tracker.record('duality', report['holds'], "|F_g(E) - F_g(swap E)| below tolerance")
        return report

    def execute(self, args: argparse.Namespace) -> Dict[str, Any]:
        handlers: Dict[str, Callable[[argparse.Namespace], Dict[str, Any]]] = {
            'moments': self.moments,
            'oracle': self.oracle,
            'curve': self.curve,
            'invariants': self.invariants,
            'duality': self.duality,
        }
        result = handlers[args.command](args)
        result['command'] = args.command
        result['checks'] = self.tracker.summary()
        return result


def _emit(files: FileHandler, data: Dict[str, Any], out: Optional[str]) -> bool:
    if out:
        return files.write_json_file(out, data)
    sys.stdout.write(files.dumps(data) + "\n")
    return True


def run(argv: Optional[List[str]] = None, config: Optional[Dict[str, Any]] = None) -> int:
    """
    Parse arguments, run one command and write its JSON

    Args:
        argv: Arguments without the program name
        config: Base configuration (config.json contents)

    Returns:
        Exit code
    """
    config = dict(config or {})
    files = FileHandler(config)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SpecFormatError as e:
        sys.stderr.write(parser.format_usage())
        _emit(files, e.to_dict(), None)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return EXIT_OK if not e.code else EXIT_USAGE

    if args.config:
        overrides = files.read_json_file(args.config)
        if not isinstance(overrides, dict):
            _emit(files, SpecFormatError(f"Cannot read config overrides from {args.config}").to_dict(), None)
            return EXIT_USAGE
        config.update(overrides)
    if args.seed is not None:
        config['seed'] = args.seed
    if args.jobs is not None:
        config['jobs'] = max(1, args.jobs)

    runner = Runner(config)
    try:
        result = runner.execute(args)
    except (SpecFormatError, CapExceededError) as e:
        logger.error(f"{args.command}: {e}")
        _emit(files, e.to_dict(), None)
        return EXIT_USAGE
    except SuperloopError as e:
        logger.error(f"{args.command} failed: {e}")
        _emit(files, e.to_dict(), None)
        return EXIT_FAILED
    except (ValueError, ZeroDivisionError) as e:
        logger.error(f"{args.command}: invalid input: {e}")
        _emit(files, {'error': type(e).__name__, 'message': str(e), 'details': {}}, None)
        return EXIT_USAGE

    if not _emit(files, result, args.out):
        return EXIT_FAILED
    if not runner.tracker.all_passed():
        failed = runner.tracker.failed_checks()
        logger.error(f"Failed checks: {', '.join(failed) if failed else 'unfinished checks'}")
        return EXIT_FAILED
    return EXIT_OK
