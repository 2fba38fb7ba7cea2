from unittest import TestCase
import io
import json
import os
import re
import shutil
import tempfile
from citation_thermo.entropy import structure_entropy
from citation_thermo.errors import ValidationError
from citation_thermo.heat import NodeHeatMap, scale
from citation_thermo.skeleton import SkeletonTree
from citation_thermo.thermo import TemperatureRecord
from citation_thermo.topic_io import HEAT_RAMP, NO_HEAT_COLOR, heat_color, ingest, series_frame, \
    tree_payload, tree_to_dot, write_heat_json, write_series_csv, write_topic_file, \
    write_tree_dot, write_tree_json


TOPIC_DOCUMENT = {
    'nodes': [
        {'id': 'p', 'year': 2000, 'pioneer': True, 'title': 'The first one'},
        {'id': 'a', 'year': 2001},
        {'id': 7, 'year': '2002'},
    ],
    'edges': [
        {'citer': 'a', 'cited': 'p'},
        {'citer': '7', 'cited': 'a'},
        {'citer': '7', 'cited': 'p'},
    ],
}


class IOTestCase(TestCase):
    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def path(self, name):
        return os.path.join(self.directory, name)

    def write_document(self, document, name='topic.json'):
        path = self.path(name)
        with io.open(path, 'w', encoding='utf-8') as stream:
            stream.write(json.dumps(document))
        return path

    def write_lines(self, lines, name='topic.jsonl'):
        path = self.path(name)
        with io.open(path, 'w', encoding='utf-8') as stream:
            stream.write(u'\n'.join(lines) + u'\n')
        return path

    def read(self, name):
        with io.open(self.path(name), 'r', encoding='utf-8') as stream:
            return stream.read()


class TestIngest(IOTestCase):
    def test_document(self):
        snapshot = ingest(self.write_document(TOPIC_DOCUMENT))
        self.assertEqual(('7', 'a', 'p'), snapshot.ids)
        self.assertEqual('p', snapshot.pioneer.id)
        self.assertEqual('The first one', snapshot.pioneer.title)
        self.assertEqual(2002, snapshot.node('7').year)
        self.assertEqual(sorted([('p', 'a'), ('a', '7'), ('p', '7')]), sorted(snapshot.edges()))
        self.assertEqual(2002, snapshot.timestamp)

    def test_line_delimited(self):
        lines = [json.dumps(dict(entry, type='node')) for entry in TOPIC_DOCUMENT['nodes']]
        lines.insert(1, '')
        lines += [json.dumps(dict(entry, type='edge')) for entry in TOPIC_DOCUMENT['edges']]
        from_lines = ingest(self.write_lines(lines))
        from_document = ingest(self.write_document(TOPIC_DOCUMENT))
        self.assertEqual(from_document.ids, from_lines.ids)
        self.assertEqual(from_document.edges(), from_lines.edges())

    def test_ndjson_suffix(self):
        lines = [json.dumps({'type': 'node', 'id': 'p', 'year': 2000, 'pioneer': True})]
        self.assertEqual(('p',), ingest(self.write_lines(lines, name='t.ndjson')).ids)

    def assertRejected(self, path, locator):
        with self.assertRaises(ValidationError) as raised:
            ingest(path)
        self.assertIn('(record {})'.format(locator), str(raised.exception))

    def test_duplicate_node(self):
        document = dict(TOPIC_DOCUMENT, nodes=TOPIC_DOCUMENT['nodes'] + [{'id': 'a', 'year': 2003}])
        self.assertRejected(self.write_document(document), 'nodes[3]')

    def test_undeclared_endpoint(self):
        document = dict(TOPIC_DOCUMENT, edges=[{'citer': 'a', 'cited': 'ghost'}])
        self.assertRejected(self.write_document(document), 'edges[0]')

    def test_self_citation(self):
        document = dict(TOPIC_DOCUMENT, edges=[{'citer': 'a', 'cited': 'p'},
                                               {'citer': 'a', 'cited': 'a'}])
        self.assertRejected(self.write_document(document), 'edges[1]')

    def test_missing_field(self):
        document = dict(TOPIC_DOCUMENT, nodes=TOPIC_DOCUMENT['nodes'] + [{'id': 'q'}])
        self.assertRejected(self.write_document(document), 'nodes[3]')

    def test_bad_year(self):
        document = dict(TOPIC_DOCUMENT, nodes=[{'id': 'p', 'year': 1066, 'pioneer': True}],
                        edges=[])
        self.assertRejected(self.write_document(document), 'nodes[0]')

    def test_pioneer_count(self):
        document = dict(TOPIC_DOCUMENT, nodes=[{'id': 'p', 'year': 2000}], edges=[])
        with self.assertRaises(ValidationError):
            ingest(self.write_document(document))
        document = dict(TOPIC_DOCUMENT, nodes=[{'id': 'p', 'year': 2000, 'pioneer': True},
                                               {'id': 'q', 'year': 2000, 'pioneer': True}],
                        edges=[])
        self.assertRejected(self.write_document(document), 'nodes[0], nodes[1]')

    def test_bad_lines(self):
        node = json.dumps({'type': 'node', 'id': 'p', 'year': 2000, 'pioneer': True})
        self.assertRejected(self.write_lines([node, '{not json']), 'line 2')
        self.assertRejected(self.write_lines([node, '', json.dumps({'id': 'q'})]), 'line 3')

    def test_year_message_names_record_once(self):
        document = dict(TOPIC_DOCUMENT, nodes=[{'id': 'p', 'year': 'x', 'pioneer': True}],
                        edges=[])
        with self.assertRaises(ValidationError) as raised:
            ingest(self.write_document(document))
        self.assertEqual('nodes[0]', raised.exception.record)
        self.assertEqual("year 'x' is not an integer (record nodes[0])", str(raised.exception))

    def test_non_finite_year(self):
        path = self.path('huge.json')
        with io.open(path, 'w', encoding='utf-8') as stream:
            stream.write(u'{"nodes": [{"id": "p", "year": 1e400, "pioneer": true}]}')
        self.assertRejected(path, 'nodes[0]')

    def test_fractional_year(self):
        document = dict(TOPIC_DOCUMENT, nodes=[{'id': 'p', 'year': 2000.7, 'pioneer': True}],
                        edges=[])
        self.assertRejected(self.write_document(document), 'nodes[0]')

    def test_invalid_utf8_line(self):
        node = json.dumps({'type': 'node', 'id': 'p', 'year': 2000, 'pioneer': True})
        path = self.path('binary.jsonl')
        with io.open(path, 'wb') as stream:
            stream.write(node.encode('utf-8') + b'\n\xff\xfe\n')
        self.assertRejected(path, 'line 2')

    def test_not_a_document(self):
        with self.assertRaises(ValidationError):
            ingest(self.write_document([1, 2, 3]))


class TestTopicFile(IOTestCase):
    def test_round_trip(self):
        snapshot = ingest(self.write_document(TOPIC_DOCUMENT))
        write_topic_file(snapshot, self.path('out/normalized.json'))
        again = ingest(self.path('out/normalized.json'))
        self.assertEqual(snapshot.nodes, again.nodes)
        self.assertEqual(snapshot.edges(), again.edges())

        # normalized output is stable
        write_topic_file(again, self.path('out/twice.json'))
        self.assertEqual(self.read('out/normalized.json'), self.read('out/twice.json'))


class TestSeriesCsv(IOTestCase):
    def setUp(self):
        super(TestSeriesCsv, self).setUp()
        self.records = [TemperatureRecord(2001, 3, 2, 2.0, 1.23456),
                        TemperatureRecord(2002, 5, 4, 2.5, 2.0, 0.5)]

    def test_frame(self):
        frame = series_frame(self.records)
        self.assertEqual(['year', '|V|', '|E|', 'n', 'V', 'UsefulInfo', 'T_growth', 'T_struct',
                          'T'], list(frame.columns))
        self.assertEqual([1.0, 2.5], frame['n'].tolist())

    def test_csv(self):
        write_series_csv(self.records, self.path('series.csv'))
        self.assertEqual(
            'year,|V|,|E|,n,V,UsefulInfo,T_growth,T_struct,T\n'
            '2001,3,2,1.000,3,2.000,1.235,,1.235\n'
            '2002,5,4,2.500,5,2.500,2.000,0.500,2.500\n',
            self.read('series.csv'))


class TestTreeExport(IOTestCase):
    def setUp(self):
        super(TestTreeExport, self).setUp()
        self.tree = SkeletonTree(['p', 'a', 'b', 'c', 'x'], 'p', {'a': 'p', 'b': 'p', 'c': 'a'})
        self.entropy = structure_entropy(self.tree)
        self.heat = scale(NodeHeatMap(self.tree.nodes, [1.0, 0.5, 0.2, 0.3, 0.0]), 2.0)

    def test_heat_color(self):
        self.assertEqual(NO_HEAT_COLOR, heat_color(None, 2.0))
        self.assertEqual(NO_HEAT_COLOR, heat_color(1.0, None))
        self.assertEqual(HEAT_RAMP[0], heat_color(0.0, 2.0))
        self.assertEqual(HEAT_RAMP[4], heat_color(2.0, 2.0))
        self.assertEqual(HEAT_RAMP[-1], heat_color(4.0, 2.0))
        self.assertEqual(HEAT_RAMP[-1], heat_color(40.0, 2.0))

    def test_dot(self):
        dot = tree_to_dot(self.tree, self.entropy, heat_map=self.heat, name='demo')
        self.assertTrue(dot.startswith('digraph "demo" {\n'))
        self.assertTrue(dot.endswith('}\n'))
        self.assertIn('shape=doublecircle', [line for line in dot.splitlines()
                                             if line.startswith('  "p" [')][0])
        width = 0.3 + 2.0 * self.entropy.per_node['c']
        self.assertIn('"c" [fillcolor="{}", width={:.3f}];'.format(
            heat_color(self.heat.value('c'), 2.0), width), dot)

    def test_dot_without_heat(self):
        dot = tree_to_dot(self.tree, self.entropy)
        self.assertIn('fillcolor="{}"'.format(NO_HEAT_COLOR), dot)

    def test_dot_matches_json(self):
        write_tree_dot(self.tree, self.entropy, self.path('tree.dot'), heat_map=self.heat)
        write_tree_json(self.tree, self.entropy, self.path('tree.json'), heat_map=self.heat)
        dot_edges = re.findall(r'"([^"]+)" -> "([^"]+)";', self.read('tree.dot'))
        payload = json.loads(self.read('tree.json'))
        self.assertEqual(sorted((parent, child) for child, parent in payload['parent_of'].items()),
                         sorted(dot_edges))
        self.assertEqual('p', payload['root'])
        self.assertEqual([['p', 'a', 'c', 'b'], ['x']], payload['components'])
        self.assertAlmostEqual(self.entropy.total, payload['structure_entropy']['total'])
        self.assertEqual(self.heat.scaled_temp(), payload['temperature'])

    def test_quoting(self):
        tree = SkeletonTree(['p', 'say "hi"'], 'p', {'say "hi"': 'p'})
        dot = tree_to_dot(tree, structure_entropy(tree))
        self.assertIn('"p" -> "say \\"hi\\"";', dot)

    def test_payload_without_heat(self):
        self.assertNotIn('temperature', tree_payload(self.tree, self.entropy))

    def test_heat_json(self):
        write_heat_json(self.heat, self.path('heat/2003.json'), inactive={'x', 'b'},
                        extra={'year': 2003})
        payload = json.loads(self.read('heat/2003.json'))
        self.assertEqual(2.0, payload['topic_temperature'])
        self.assertEqual(['b', 'x'], payload['inactive'])
        self.assertEqual(2003, payload['year'])
        self.assertEqual(self.heat.std_temp(), payload['std'])
        self.assertEqual(self.heat.scaled_temp(), payload['scaled'])
