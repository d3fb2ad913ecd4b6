import logging
import sys
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError, handle_default_options

from planner import bench
from planner.baselines import brute_force_sgq, pc_arrange, per_slot_stgq, stg_arrange
from planner.exceptions import PlannerError
from planner.graph_core import extract_feasible_graph
from planner.instance_io import (
    GRAPH_MODELS,
    GenConfig,
    format_number,
    generate,
    parse_graph,
    parse_schedule,
    serialize_graph,
    serialize_schedule,
    write_solution,
)
from planner.ip_model import (
    build_sgq_model,
    build_stgq_model,
    check_assignment,
    emit_assignment_text,
    emit_lp_text,
    solution_to_assignment,
)
from planner.sgq_solver import PRUNE_KINDS, SgqQuery, solve_sgq
from planner.stgq_solver import CANDIDATE_FILTERS, StgqQuery, solve_stgq

logger = logging.getLogger(__name__)

STRATEGIES = {
    'distance': 'use_distance_prune',
    'acquaintance': 'use_acquaintance_prune',
    'exterior': 'use_exterior_condition',
    'availability': 'use_availability_prune',
}

INFEASIBLE = 2


class Command(BaseCommand):
    help = 'Solve social / social-temporal group queries, run baselines, export IP models and benchmarks.'
    requires_system_checks = []

    # -- argument parsing --------------------------------------------------

    def create_parser(self, prog_name, subcommand, **kwargs):
        # parse errors raise CommandError so they exit with 1, not argparse's 2
        self._called_from_command_line = False
        return super().create_parser(prog_name, subcommand, **kwargs)

    def add_arguments(self, parser):
        sub = parser.add_subparsers(dest='action', required=True)

        gen = sub.add_parser('gen', help='Generate a graph and a schedule file.')
        gen.add_argument('--out', required=True, help='Path prefix; writes <out>.graph and <out>.schedule.')
        gen.add_argument('--n', type=int, default=100)
        gen.add_argument('--model', choices=GRAPH_MODELS, default='attachment')
        gen.add_argument('--edges-per-vertex', type=int, default=3)
        gen.add_argument('--weight-min', type=int, default=1)
        gen.add_argument('--weight-max', type=int, default=100)
        gen.add_argument('--T', type=int, default=24, dest='horizon')
        gen.add_argument('--avail-prob', type=float, default=0.7)
        gen.add_argument('--run-bias', type=float, default=0.6)
        gen.add_argument('--seed', type=int, default=1)

        sgq = sub.add_parser('solve-sgq', help='Run SGSelect.')
        self._add_query_arguments(sgq)

        stgq = sub.add_parser('solve-stgq', help='Run STGSelect.')
        self._add_query_arguments(stgq)
        self._add_temporal_arguments(stgq)

        baseline = sub.add_parser('baseline', help='Run a reference baseline.')
        baseline.add_argument('--method', choices=['brute', 'per-slot', 'pc-arrange'], required=True)
        baseline.add_argument('--brute', action='store_true', help='per-slot: brute force inside each slot.')
        self._add_query_arguments(baseline)
        self._add_temporal_arguments(baseline, required=False)

        compare = sub.add_parser('compare', help='PCArrange against STGArrange.')
        self._add_query_arguments(compare, with_k=False)
        self._add_temporal_arguments(compare)

        export = sub.add_parser('export-ip', help='Write the integer programming model as LP text.')
        export.add_argument('--variant', choices=['sgq', 'stgq'], required=True)
        export.add_argument('--output', help='LP file (default: standard output).')
        export.add_argument('--with-solution', metavar='PATH',
                            help="Also write the solver's own assignment and its check report to PATH.")
        self._add_query_arguments(export)
        self._add_temporal_arguments(export, required=False)

        grid = sub.add_parser('bench', help='Run a benchmark grid and print CSV.')
        grid.add_argument('--grid', default='', help='e.g. "p=4..8 s=1 k=2 n=100 seeds=1..5 algorithms=sgselect,brute"')
        grid.add_argument('--workers', type=int, default=None)
        grid.add_argument('--output', help='CSV file (default: standard output).')

    def _add_query_arguments(self, parser, with_k=True):
        parser.add_argument('--graph', required=True)
        parser.add_argument('--initiator', '-q', required=True)
        parser.add_argument('-p', type=int, required=True)
        parser.add_argument('-s', type=int, required=True)
        if with_k:
            parser.add_argument('-k', type=int, required=True)
        parser.add_argument('--theta0', type=int)
        parser.add_argument('--tight', action='store_true', help='Use the sorted acquaintance bound.')
        parser.add_argument('--disable', action='append', choices=sorted(STRATEGIES), default=[])
        parser.add_argument('--format', choices=['text', 'json'], default='text')

    def _add_temporal_arguments(self, parser, required=True):
        parser.add_argument('--schedule', required=required)
        parser.add_argument('-m', type=int, required=required)
        parser.add_argument('--phi0', type=int)
        parser.add_argument('--phi-max', type=int)
        parser.add_argument('--candidate-filter', choices=sorted(CANDIDATE_FILTERS), default='window')

    def run_from_argv(self, argv):
        try:
            parser = self.create_parser(argv[0], argv[1])
            options = parser.parse_args(argv[2:])
        except CommandError as exc:
            message = str(exc).removeprefix('Error: ')
            self.stderr.write(f'error[usage]: {message}')
            sys.exit(1)
        cmd_options = vars(options)
        args = cmd_options.pop('args', ())
        handle_default_options(options)
        try:
            self.execute(*args, **cmd_options)
        except CommandError as exc:
            if options.traceback:
                raise
            self.stderr.write(str(exc))
            sys.exit(exc.returncode)

    # -- dispatch ----------------------------------------------------------

    def handle(self, *args, **options):
        action = options['action']
        handler = getattr(self, 'handle_' + action.replace('-', '_'))
        try:
            handler(options)
        except CommandError:
            raise
        except PlannerError as exc:
            logger.info("[CLI] %s failed: %s", action, exc)
            raise CommandError(f'error[{exc.tag}]: {exc}', returncode=1)
        except (OSError, UnicodeDecodeError) as exc:
            raise CommandError(f'error[input]: {exc}', returncode=1)
        except Exception as exc:
            logger.exception("[CLI] %s crashed", action)
            raise CommandError(f'error[internal]: {exc}', returncode=1)

    # -- loading -----------------------------------------------------------

    def _read(self, path):
        return Path(path).read_text(encoding='utf-8')

    def _graph(self, options):
        return parse_graph(self._read(options['graph']), source=options['graph'])

    def _table(self, options):
        if not options.get('schedule'):
            raise CommandError('error[usage]: --schedule is required here', returncode=1)
        return parse_schedule(self._read(options['schedule']), source=options['schedule'])

    def _switches(self, options):
        return {STRATEGIES[name]: False for name in options['disable']}

    def _sgq_query(self, options, k=None):
        switches = self._switches(options)
        switches.pop('use_availability_prune', None)
        return SgqQuery(
            q=options['initiator'], p=options['p'], s=options['s'],
            k=options['k'] if k is None else k,
            theta0=options['theta0'], tight_acquaintance_bound=options['tight'],
            **switches,
        )

    def _stgq_query(self, options, k=None):
        if options.get('m') is None:
            raise CommandError('error[usage]: -m is required here', returncode=1)
        return StgqQuery(
            q=options['initiator'], p=options['p'], s=options['s'],
            k=options['k'] if k is None else k,
            theta0=options['theta0'], tight_acquaintance_bound=options['tight'],
            m=options['m'], phi0=options['phi0'], phi_max=options['phi_max'],
            candidate_filter=options['candidate_filter'],
            **self._switches(options),
        )

    # -- output ------------------------------------------------------------

    def _report(self, options, solution, stats, query, algorithm):
        if options['format'] == 'json':
            self.stdout.write(write_solution(solution, stats, query, algorithm), ending='')
        else:
            self.stdout.write(f'algorithm: {algorithm}')
            self.stdout.write(f"status: {'success' if solution else 'failure'}")
            if solution:
                self.stdout.write(f"members: {' '.join(solution.members)}")
                self.stdout.write(f'total: {format_number(solution.total)}')
                if solution.period is not None:
                    self.stdout.write(f'period: {solution.period}')
            prunes = stats.prune_counts()
            self.stdout.write(f'nodes expanded: {stats.nodes_expanded}')
            self.stdout.write('prunes: ' + ' '.join(f'{kind}={prunes[kind]}' for kind in PRUNE_KINDS))
            self.stdout.write(f'elapsed: {stats.elapsed * 1000:.3f} ms')
        if solution is None:
            raise CommandError('error[infeasible]: Failure, no feasible group', returncode=INFEASIBLE)

    # -- subcommands -------------------------------------------------------

    def handle_gen(self, options):
        config = GenConfig(
            n=options['n'], model=options['model'], edges_per_vertex=options['edges_per_vertex'],
            weight_range=(options['weight_min'], options['weight_max']), T=options['horizon'],
            avail_prob=options['avail_prob'], run_bias=options['run_bias'], seed=options['seed'],
        )
        graph, table = generate(config)
        prefix = options['out']
        Path(f'{prefix}.graph').write_text(serialize_graph(graph))
        Path(f'{prefix}.schedule').write_text(serialize_schedule(table))
        logger.info("[CLI] wrote %s.graph and %s.schedule", prefix, prefix)
        self.stdout.write(config.initiator)

    def handle_solve_sgq(self, options):
        graph = self._graph(options)
        query = self._sgq_query(options)
        solution, stats = solve_sgq(graph, query)
        self._report(options, solution, stats, query, 'sgselect')

    def handle_solve_stgq(self, options):
        graph = self._graph(options)
        table = self._table(options)
        query = self._stgq_query(options)
        solution, stats = solve_stgq(graph, table, query)
        self._report(options, solution, stats, query, 'stgselect')

    def handle_baseline(self, options):
        graph = self._graph(options)
        method = options['method']
        if method == 'brute':
            query = self._sgq_query(options)
            solution, stats = brute_force_sgq(graph, query)
            self._report(options, solution, stats, query, 'brute')
            return

        table = self._table(options)
        query = self._stgq_query(options)
        if method == 'per-slot':
            solution, stats = per_slot_stgq(graph, table, query, brute=options['brute'])
            self._report(options, solution, stats, query, 'per-slot')
            return

        result = pc_arrange(graph, table, query)
        if result is None:
            self.stdout.write('algorithm: pc-arrange\nstatus: failure')
            raise CommandError('error[infeasible]: Failure, pc-arrange kept too few attendees',
                               returncode=INFEASIBLE)
        self.stdout.write('algorithm: pc-arrange\nstatus: success')
        self.stdout.write(f"members: {' '.join(result.members)}")
        self.stdout.write(f'total: {format_number(result.total)}')
        self.stdout.write(f'period: {result.period}')
        self.stdout.write(f'k_h: {result.k_h}')

    def handle_compare(self, options):
        graph = self._graph(options)
        table = self._table(options)
        query = self._stgq_query(options, k=0)
        reference = pc_arrange(graph, table, query)
        if reference is None:
            self.stdout.write('status: failure')
            raise CommandError('error[infeasible]: Failure, pc-arrange found no group', returncode=INFEASIBLE)
        k_star, solution = stg_arrange(graph, table, query, reference=reference)
        self.stdout.write(f'k_h: {reference.k_h}')
        self.stdout.write(f'k*: {k_star}')
        self.stdout.write(f'pc-arrange total: {format_number(reference.total)} period {reference.period}')
        self.stdout.write(f'stg-arrange total: {format_number(solution.total)} period {solution.period}')
        self.stdout.write(f"pc-arrange members: {' '.join(reference.members)}")
        self.stdout.write(f"stg-arrange members: {' '.join(solution.members)}")

    def handle_export_ip(self, options):
        graph = self._graph(options)
        if options['variant'] == 'stgq':
            table = self._table(options)
            query = self._stgq_query(options)
            model = build_stgq_model(graph, table, query)
        else:
            table = None
            query = self._sgq_query(options)
            model = build_sgq_model(graph, query)

        text = emit_lp_text(model)
        if options['output']:
            Path(options['output']).write_text(text)
        else:
            self.stdout.write(text, ending='')

        if options['with_solution']:
            if table is None:
                solution, _ = solve_sgq(graph, query)
            else:
                solution, _ = solve_stgq(graph, table, query)
            if solution is None:
                raise CommandError('error[infeasible]: Failure, no solution to export', returncode=INFEASIBLE)
            fg = extract_feasible_graph(graph, query.q, query.s)
            assignment = solution_to_assignment(solution, fg, model)
            report = check_assignment(model, assignment)
            header = (
                f'# feasible {str(report.feasible).lower()} objective {format_number(report.objective)}\n'
                + ''.join(f'# violated {tag}\n' for tag in report.violated)
            )
            Path(options['with_solution']).write_text(header + emit_assignment_text(model, assignment))

    def handle_bench(self, options):
        rows = bench.bench_grid(options['grid'], workers=options['workers'])
        if options['output']:
            with open(options['output'], 'w', newline='') as out:
                bench.write_csv(rows, out)
        else:
            bench.write_csv(rows, self.stdout)
