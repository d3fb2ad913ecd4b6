import json

import networkx as nx
from django.apps import apps
from django.test import SimpleTestCase, override_settings

from planner.exceptions import InputError, ParseError
from planner.instance_io import (
    GenConfig,
    SplitMix64,
    format_number,
    generate,
    parse_graph,
    parse_schedule,
    probability_threshold,
    read_solution,
    serialize_graph,
    serialize_schedule,
    write_solution,
)
from planner.schedule_core import SlotRange
from planner.sgq_solver import SearchStats, SgqQuery, Solution
from planner.stgq_solver import StgqQuery

GRAPH_TEXT = """\
# friends of q
q a 1
q b 2

a b 2.5
z
"""

SCHEDULE_TEXT = """\
slots 4
# one row per person
q 1111
a 0110
"""


class GraphFormatTests(SimpleTestCase):

    def test_parse(self):
        graph = parse_graph(GRAPH_TEXT)
        self.assertEqual(graph.vertices, ('a', 'b', 'q', 'z'))
        self.assertEqual(graph.weight('b', 'a'), 2.5)
        self.assertEqual(graph.neighbors('z'), frozenset())

    def test_serialize(self):
        self.assertEqual(serialize_graph(parse_graph(GRAPH_TEXT)), 'a b 2.5\na q 1\nb q 2\nz\n')

    def test_errors_are_located(self):
        cases = [
            ('q a 1\nq q 2\n', 2, 3),
            ('q a x\n', 1, 5),
            ('q a -1\n', 1, 5),
            ('q a 0\n', 1, 5),
            ('q a 1\n\na q 2\n', 3, 1),
            ('q a\n', 1, 1),
            ('q a 1 extra\n', 1, 1),
        ]
        for text, line, column in cases:
            with self.subTest(text=text), self.assertRaises(ParseError) as caught:
                parse_graph(text, source='friends.txt')
            self.assertEqual((caught.exception.line, caught.exception.column), (line, column))
            self.assertTrue(str(caught.exception).startswith(f'friends.txt:{line}:{column}:'))
            self.assertEqual(caught.exception.tag, 'parse')

    def test_parse_error_is_an_input_error(self):
        with self.assertRaises(InputError):
            parse_graph('a a 1\n')


class ScheduleFormatTests(SimpleTestCase):

    def test_parse(self):
        table = parse_schedule(SCHEDULE_TEXT)
        self.assertEqual(table.horizon, 4)
        self.assertEqual(table.row('a'), (False, True, True, False))
        self.assertFalse(table.is_available('nobody', 1))

    def test_serialize(self):
        self.assertEqual(serialize_schedule(parse_schedule(SCHEDULE_TEXT)), 'slots 4\na 0110\nq 1111\n')

    def test_errors_are_located(self):
        cases = [
            ('', 1, 1),
            ('# only comments\n', 1, 1),
            ('slot 4\n', 1, 1),
            ('slots four\n', 1, 7),
            ('slots 0\n', 1, 7),
            ('slots ²\nq 1\n', 1, 7),
            ('slots 3\nq 10x\n', 2, 5),
            ('slots 3\nq 10\n', 2, 3),
            ('slots 3\nq 101\nq 111\n', 3, 1),
            ('slots 3\nq\n', 2, 1),
        ]
        for text, line, column in cases:
            with self.subTest(text=text), self.assertRaises(ParseError) as caught:
                parse_schedule(text)
            self.assertEqual((caught.exception.line, caught.exception.column), (line, column))


class SplitMixTests(SimpleTestCase):

    def test_reference_sequence(self):
        rng = SplitMix64(0)
        self.assertEqual(rng.next_u64(), 0xE220A8397B1DCDAF)
        self.assertEqual(rng.next_u64(), 0x6E789E6AA1B965F4)

    def test_ranges(self):
        rng = SplitMix64(42)
        draws = [rng.below(7) for _ in range(2000)]
        self.assertEqual(set(draws), set(range(7)))
        self.assertTrue(all(3 <= rng.randint(3, 5) <= 5 for _ in range(200)))

    def test_chance_extremes(self):
        rng = SplitMix64(9)
        self.assertTrue(all(rng.chance(probability_threshold(1.0)) for _ in range(500)))
        self.assertFalse(any(rng.chance(probability_threshold(0.0)) for _ in range(500)))
        self.assertEqual(probability_threshold(0.5), 1 << 52)


class GeneratorTests(SimpleTestCase):

    def test_same_seed_same_instance(self):
        config = GenConfig(n=40, T=12, seed=5)
        first, second = generate(config), generate(config)
        self.assertEqual(serialize_graph(first[0]), serialize_graph(second[0]))
        self.assertEqual(serialize_schedule(first[1]), serialize_schedule(second[1]))

    def test_other_seed_other_instance(self):
        a, _ = generate(GenConfig(n=40, seed=5))
        b, _ = generate(GenConfig(n=40, seed=6))
        self.assertNotEqual(serialize_graph(a), serialize_graph(b))

    def test_vertex_ids(self):
        config = GenConfig(n=100)
        self.assertEqual(config.vertex_ids[:2], ('v00', 'v01'))
        self.assertEqual(config.vertex_ids[-1], 'v99')
        self.assertEqual(config.initiator, 'v00')
        self.assertEqual(GenConfig(n=5).initiator, 'v0')

    def test_attachment_graph(self):
        graph, _ = generate(GenConfig(n=10, model='attachment', edges_per_vertex=3, weight_range=(2, 4)))
        self.assertEqual(graph.number_of_edges(), 1 + 2 + 3 * 7)
        self.assertTrue(nx.is_connected(graph.nx))
        self.assertTrue(all(2 <= w <= 4 for _, _, w in graph.edges()))

    def test_uniform_graph(self):
        graph, _ = generate(GenConfig(n=10, model='uniform', edges_per_vertex=3))
        self.assertEqual(graph.number_of_edges(), 15 + 9)
        self.assertTrue(nx.is_connected(graph.nx))

    def test_dense_uniform_graph_is_complete(self):
        graph, _ = generate(GenConfig(n=6, model='uniform', edges_per_vertex=20))
        self.assertEqual(graph.number_of_edges(), 15)

    def test_always_available(self):
        _, table = generate(GenConfig(n=20, T=10, avail_prob=1.0))
        self.assertTrue(all(all(table.row(v)) for v in table.vertices))

    def test_never_available(self):
        _, table = generate(GenConfig(n=20, T=10, avail_prob=0.0))
        self.assertFalse(any(any(table.row(v)) for v in table.vertices))

    def test_availability_rate(self):
        _, table = generate(GenConfig(n=1000, T=100, avail_prob=0.7, run_bias=0.6, seed=3))
        free = sum(sum(table.row(v)) for v in table.vertices)
        self.assertAlmostEqual(free / (1000 * 100), 0.7, delta=0.02)

    def test_full_run_bias_gives_constant_rows(self):
        _, table = generate(GenConfig(n=50, T=8, run_bias=1.0))
        for v in table.vertices:
            self.assertEqual(len(set(table.row(v))), 1)

    def test_instance_survives_text_formats(self):
        graph, table = generate(GenConfig(n=30, T=6, seed=8))
        self.assertEqual(serialize_graph(parse_graph(serialize_graph(graph))), serialize_graph(graph))
        self.assertEqual(serialize_schedule(parse_schedule(serialize_schedule(table))), serialize_schedule(table))

    def test_rejects_bad_config(self):
        bad = [
            {'n': 1}, {'model': 'smallworld'}, {'edges_per_vertex': 0},
            {'weight_range': (0, 5)}, {'weight_range': (5, 4)}, {'T': 0},
            {'avail_prob': 1.5}, {'run_bias': -0.1},
        ]
        for kwargs in bad:
            with self.subTest(**{k: str(v) for k, v in kwargs.items()}), self.assertRaises(InputError):
                GenConfig(**kwargs)


class SolutionDocumentTests(SimpleTestCase):

    def stats(self):
        stats = SearchStats(nodes_expanded=7, elapsed=0.0123456)
        stats.prunes['distance'] = 2
        return stats

    def test_sgq_success(self):
        text = write_solution(Solution(('a', 'b', 'q'), 3.0), self.stats(), SgqQuery(q='q', p=3, s=1, k=0))
        self.assertTrue(text.endswith('\n'))
        doc = json.loads(text)
        self.assertEqual(doc['schema'], 'planner.solution/1')
        self.assertEqual(doc['problem'], 'sgq')
        self.assertEqual(doc['status'], 'success')
        self.assertEqual(doc['members'], ['a', 'b', 'q'])
        self.assertEqual(doc['total'], 3.0)
        self.assertIsNone(doc['period'])
        self.assertIsNone(doc['query']['m'])
        self.assertEqual(doc['stats']['nodes_expanded'], 7)
        self.assertEqual(doc['stats']['prunes']['distance'], 2)
        self.assertEqual(doc['stats']['prunes']['availability'], 0)
        self.assertEqual(doc['stats']['elapsed_ms'], 12.346)

    def test_stgq_read_back(self):
        query = StgqQuery(q='q', p=3, s=1, k=0, m=3)
        text = write_solution(Solution(('a', 'b', 'q'), 3.0, SlotRange(2, 4)), self.stats(), query, 'stgselect')
        data = read_solution(text)
        self.assertEqual(data['problem'], 'stgq')
        self.assertEqual(data['algorithm'], 'stgselect')
        self.assertEqual(dict(data['period']), {'start': 2, 'end': 4})
        self.assertEqual(data['query']['m'], 3)

    def test_failure(self):
        text = write_solution(None, SearchStats(), SgqQuery(q='q', p=9, s=1, k=0))
        data = read_solution(text)
        self.assertEqual(data['status'], 'failure')
        self.assertEqual(data['members'], [])
        self.assertIsNone(data['total'])

    def test_rejects_bad_documents(self):
        good = json.loads(write_solution(Solution(('a', 'q'), 1.0), SearchStats(), SgqQuery(q='q', p=2, s=1, k=0)))
        broken = [
            dict(good, schema='planner.solution/0'),
            dict(good, members=['q', 'a']),
            dict(good, status='failure'),
            dict(good, problem='stgq'),
            dict(good, total=None),
        ]
        for doc in broken:
            with self.subTest(doc=doc), self.assertRaises(InputError):
                read_solution(json.dumps(doc))

    def test_not_json(self):
        with self.assertRaises(InputError):
            read_solution('{"schema": ')

    def test_no_auth_apps_needed(self):
        self.assertFalse(apps.is_installed('django.contrib.auth'))
        self.assertFalse(apps.is_installed('django.contrib.contenttypes'))
        text = write_solution(None, SearchStats(), SgqQuery(q='q', p=2, s=1, k=0))
        self.assertEqual(read_solution(text)['status'], 'failure')

    @override_settings(PLANNER_SOLUTION_SCHEMA='planner.solution/2')
    def test_schema_follows_settings(self):
        text = write_solution(None, SearchStats(), SgqQuery(q='q', p=2, s=1, k=0))
        self.assertEqual(read_solution(text)['schema'], 'planner.solution/2')

    def test_format_number(self):
        self.assertEqual(format_number(3.0), '3')
        self.assertEqual(format_number(2.5), '2.5')
        self.assertEqual(format_number(7), '7')
