from fractions import Fraction

from django.test import SimpleTestCase

from planner.exceptions import InputError
from planner.graph_core import SocialGraph, extract_feasible_graph
from planner.ip_model import (
    Assignment,
    build_sgq_model,
    build_stgq_model,
    check_assignment,
    emit_assignment_text,
    emit_lp_text,
    solution_to_assignment,
)
from planner.schedule_core import SlotRange
from planner.sgq_solver import SgqQuery, Solution, solve_sgq
from planner.stgq_solver import StgqQuery, solve_stgq

from .strategies import rows_on, seeded_sgq_instances, seeded_stgq_instances, star_chords


def triangle() -> SocialGraph:
    return SocialGraph.from_edges([('q', 'a', 1), ('a', 'b', 2), ('q', 'b', 3)])


def four_vertices() -> SocialGraph:
    return SocialGraph.from_edges([('q', 'a', 1), ('q', 'b', 2), ('q', 'c', 3), ('a', 'b', 1)])


class BuildTests(SimpleTestCase):

    def test_attendance_row(self):
        text = emit_lp_text(build_sgq_model(triangle(), SgqQuery(q='q', p=2, s=1, k=0)))
        self.assertIn('c1_0: phi_q + phi_a + phi_b = 2\n', text)
        self.assertIn('c2_0: phi_q = 1\n', text)

    def test_initiator_comes_first(self):
        model = build_sgq_model(four_vertices(), SgqQuery(q='b', p=2, s=1, k=0))
        self.assertEqual(model.vertices, ('b', 'a', 'c', 'q'))

    def test_unknown_initiator(self):
        with self.assertRaises(InputError):
            build_sgq_model(triangle(), SgqQuery(q='z', p=2, s=1, k=0))

    def test_family_sizes(self):
        table = rows_on(5, 'qabc', range(1, 6))
        model = build_stgq_model(four_vertices(), table, StgqQuery(q='q', p=3, s=2, k=1, m=2))
        expected = {1: 1, 2: 1, 3: 4, 4: 3, 5: 3, 6: 6, 7: 3, 8: 3, 9: 1, 10: 4 * 4 * 2}
        for family, size in expected.items():
            with self.subTest(family=family):
                self.assertEqual(len(model.family(family)), size)

    def test_sgq_variables(self):
        graph = four_vertices()
        model = build_sgq_model(graph, SgqQuery(q='q', p=3, s=2, k=1))
        n, e = len(graph), graph.number_of_edges()
        self.assertEqual(len(model.variables), n + n + n * 2 * e)
        self.assertFalse([v for v in model.variables if v.startswith('tau_')])
        self.assertFalse(model.family(9))
        self.assertFalse(model.family(10))

    def test_single_start_when_m_equals_horizon(self):
        table = rows_on(3, 'qab', range(1, 4))
        model = build_stgq_model(triangle(), table, StgqQuery(q='q', p=2, s=1, k=0, m=3))
        self.assertEqual([v for v in model.binaries if v.startswith('tau_')], ['tau_1'])

    def test_horizon_shorter_than_activity(self):
        table = rows_on(2, 'qab', [1, 2])
        with self.assertRaises(InputError):
            build_stgq_model(triangle(), table, StgqQuery(q='q', p=2, s=1, k=0, m=3))

    def test_availability_rows(self):
        table = rows_on(2, 'qa', [1, 2])  # b never free
        model = build_stgq_model(triangle(), table, StgqQuery(q='q', p=2, s=1, k=0, m=1))
        rows = {(c.terms, c.rhs) for c in model.family(10)}
        self.assertIn((((1, 'phi_b'), (1, 'tau_1')), 1), rows)
        self.assertIn((((1, 'phi_a'), (1, 'tau_1')), 2), rows)


class EmitTests(SimpleTestCase):

    def test_sections_in_order(self):
        lines = emit_lp_text(build_sgq_model(triangle(), SgqQuery(q='q', p=2, s=1, k=0))).splitlines()
        positions = [lines.index(h) for h in ('Minimize', 'Subject To', 'Bounds', 'Binary', 'End')]
        self.assertEqual(positions, sorted(positions))
        self.assertEqual(lines[-1], 'End')
        self.assertIn('obj: delta_q + delta_a + delta_b', lines)
        self.assertIn('delta_a >= 0', lines)

    def test_weighted_path_row(self):
        text = emit_lp_text(build_sgq_model(triangle(), SgqQuery(q='q', p=2, s=1, k=0)))
        self.assertIn(
            'c7_0: 2 pi_a_a_b + 2 pi_a_b_a + pi_a_a_q + pi_a_q_a + 3 pi_a_b_q + 3 pi_a_q_b - delta_a = 0\n',
            text,
        )

    def test_deterministic(self):
        query = SgqQuery(q='q', p=3, s=2, k=1)
        shuffled = SocialGraph.from_edges([('a', 'b', 1), ('q', 'c', 3), ('b', 'q', 2), ('a', 'q', 1)])
        self.assertEqual(
            emit_lp_text(build_sgq_model(four_vertices(), query)),
            emit_lp_text(build_sgq_model(shuffled, query)),
        )

    def test_edgeless_graph_keeps_rows_non_empty(self):
        graph = SocialGraph.from_edges([], vertices=['q', 'a'])
        text = emit_lp_text(build_sgq_model(graph, SgqQuery(q='q', p=1, s=1, k=0)))
        self.assertIn('c4_0: -phi_a = 0\n', text)
        self.assertIn('c8_0: 0 phi_q <= 1\n', text)
        for line in text.splitlines():
            if line.startswith('c') and ':' in line:
                self.assertNotRegex(line, r':\s+(=|<=|>=)')

    def test_assignment_text(self):
        model = build_sgq_model(triangle(), SgqQuery(q='q', p=2, s=1, k=0))
        solution, _ = solve_sgq(triangle(), SgqQuery(q='q', p=2, s=1, k=0))
        fg = extract_feasible_graph(triangle(), 'q', 1)
        text = emit_assignment_text(model, solution_to_assignment(solution, fg, model))
        self.assertEqual(len(text.splitlines()), len(model.variables))
        self.assertIn('phi_a 1\n', text)
        self.assertIn('delta_a 1\n', text)
        self.assertIn('pi_a_q_a 1\n', text)


class CheckTests(SimpleTestCase):

    def test_all_zeros(self):
        model = build_sgq_model(star_chords(), SgqQuery(q='q', p=3, s=1, k=0))
        report = check_assignment(model, Assignment({v: 0 for v in model.variables}))
        self.assertFalse(report.feasible)
        self.assertEqual(report.violated_families, frozenset({1, 2}))

    def test_solver_answer_is_feasible(self):
        graph, query = star_chords(), SgqQuery(q='q', p=3, s=1, k=0)
        solution, _ = solve_sgq(graph, query)
        model = build_sgq_model(graph, query)
        report = check_assignment(model, solution_to_assignment(solution, extract_feasible_graph(graph, 'q', 1), model))
        self.assertTrue(report.feasible, report.violated)
        self.assertEqual(report.objective, 3)

    def test_seeded_answers_are_feasible(self):
        for graph, q, p, s, k in seeded_sgq_instances(30, seed=99, max_n=9):
            query = SgqQuery(q=q, p=p, s=s, k=k)
            solution, _ = solve_sgq(graph, query)
            if solution is None:
                continue
            model = build_sgq_model(graph, query)
            asg = solution_to_assignment(solution, extract_feasible_graph(graph, q, s), model)
            report = check_assignment(model, asg)
            with self.subTest(q=q, p=p, s=s, k=k):
                self.assertTrue(report.feasible, report.violated)
                self.assertEqual(report.objective, Fraction(solution.total))

    def test_stgq_answer_is_feasible(self):
        graph = star_chords()
        table = rows_on(6, 'qabcd', [2, 3, 4])
        query = StgqQuery(q='q', p=3, s=1, k=0, m=3)
        solution, _ = solve_stgq(graph, table, query)
        model = build_stgq_model(graph, table, query)
        asg = solution_to_assignment(solution, extract_feasible_graph(graph, 'q', 1), model)
        self.assertEqual(asg['tau_2'], 1)
        report = check_assignment(model, asg)
        self.assertTrue(report.feasible, report.violated)

    def test_seeded_stgq_answers_are_feasible(self):
        checked = 0
        for graph, table, q, p, s, k, m in seeded_stgq_instances(30, seed=21, max_n=9):
            query = StgqQuery(q=q, p=p, s=s, k=k, m=m)
            solution, _ = solve_stgq(graph, table, query)
            if solution is None:
                continue
            checked += 1
            model = build_stgq_model(graph, table, query)
            asg = solution_to_assignment(solution, extract_feasible_graph(graph, q, s), model)
            report = check_assignment(model, asg)
            with self.subTest(q=q, p=p, s=s, k=k, m=m):
                self.assertTrue(report.feasible, report.violated)
                self.assertEqual(report.objective, Fraction(solution.total))
        self.assertGreater(checked, 0)

    def test_busy_member_breaks_availability_rows(self):
        graph = star_chords()
        table = rows_on(6, 'qabcd', [2, 3, 4])
        query = StgqQuery(q='q', p=3, s=1, k=0, m=3)
        model = build_stgq_model(graph, table, query)
        moved = Solution(('a', 'b', 'q'), 3.0, SlotRange(3, 5))
        report = check_assignment(model, solution_to_assignment(moved, extract_feasible_graph(graph, 'q', 1), model))
        self.assertEqual(report.violated_families, frozenset({10}))

    def test_strangers_break_acquaintance(self):
        graph, query = star_chords(), SgqQuery(q='q', p=3, s=1, k=0)
        model = build_sgq_model(graph, query)
        strangers = Solution(('a', 'c', 'q'), 4.0)
        report = check_assignment(model, solution_to_assignment(strangers, extract_feasible_graph(graph, 'q', 1), model))
        self.assertEqual(report.violated_families, frozenset({3}))
        self.assertIn('c3_1', report.violated)

    def test_too_long_path(self):
        graph = SocialGraph.from_edges([('q', 'a', 1), ('a', 'b', 1)])
        model = build_sgq_model(graph, SgqQuery(q='q', p=2, s=1, k=1))
        asg = solution_to_assignment(
            Solution(('b', 'q'), 2.0), extract_feasible_graph(graph, 'q', 2), model,
        )
        report = check_assignment(model, asg)
        self.assertIn(8, report.violated_families)

    def test_non_binary_value(self):
        model = build_sgq_model(triangle(), SgqQuery(q='q', p=2, s=1, k=0))
        values = {v: 0 for v in model.variables}
        values['phi_a'] = Fraction(1, 2)
        report = check_assignment(model, Assignment(values))
        self.assertIn('binary:phi_a', report.violated)

    def test_missing_variable(self):
        model = build_sgq_model(triangle(), SgqQuery(q='q', p=2, s=1, k=0))
        with self.assertRaises(InputError):
            check_assignment(model, Assignment({'phi_q': 1}))

    def test_stgq_assignment_needs_period(self):
        graph = triangle()
        table = rows_on(3, 'qab', range(1, 4))
        model = build_stgq_model(graph, table, StgqQuery(q='q', p=2, s=1, k=0, m=1))
        with self.assertRaises(InputError):
            solution_to_assignment(Solution(('a', 'q'), 1.0), extract_feasible_graph(graph, 'q', 1), model)

    def test_fractional_weights_use_tolerance(self):
        graph = SocialGraph.from_edges([('q', 'a', 0.1), ('a', 'b', 0.2), ('q', 'b', 0.7)])
        query = SgqQuery(q='q', p=3, s=2, k=0)
        model = build_sgq_model(graph, query)
        self.assertFalse(model.integral_weights)
        solution, _ = solve_sgq(graph, query)
        report = check_assignment(model, solution_to_assignment(solution, extract_feasible_graph(graph, 'q', 2), model))
        self.assertTrue(report.feasible, report.violated)
        self.assertIsInstance(report.objective, float)
        self.assertAlmostEqual(report.objective, solution.total)
