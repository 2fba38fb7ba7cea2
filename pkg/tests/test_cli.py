from unittest import TestCase
import argparse
import io
import json
import os
import shutil
import tempfile
import mock
import numpy as np
from citation_thermo.cli import _years, build_parser, load_config, main
from citation_thermo.topic_io import write_topic_file
from .fixtures import make_snapshot, random_citation_dag


class TestYears(TestCase):
    def test_lists_and_ranges(self):
        self.assertEqual([2001, 2005, 2006, 2007], _years('2001,2005-2007'))
        self.assertEqual([1999], _years(' 1999 ,'))

    def test_invalid(self):
        with self.assertRaises(argparse.ArgumentTypeError):
            _years('2001,soon')


class TestParser(TestCase):
    def test_common_options(self):
        args = build_parser().parse_args(['temperature', 'a.json', 'b.jsonl', '-o', 'out',
                                          '-y', '2001-2002', '-t', 'a', '-w', '3', '-v'])
        self.assertEqual('temperature', args.command)
        self.assertEqual(['a.json', 'b.jsonl'], args.topic_files)
        self.assertEqual('out', args.output_dir)
        self.assertEqual([2001, 2002], args.years)
        self.assertEqual(['a'], args.topics)
        self.assertEqual(3, args.workers)
        self.assertTrue(args.verbose)

    def test_normalize_only_for_validation(self):
        parser = build_parser()
        self.assertTrue(parser.parse_args(['ingest-validate', '--normalize']).normalize)
        with self.assertRaises(SystemExit):
            parser.parse_args(['tree', '--normalize'])

    def test_command_required(self):
        with self.assertRaises(SystemExit):
            build_parser().parse_args([])

    def test_usage_errors_exit_with_one(self):
        for argv in (['tree', '--workers', 'many'], ['bake'], ['all', '-y', '2001,soon']):
            with mock.patch('sys.stderr', new_callable=io.StringIO) as stderr:
                with self.assertRaises(SystemExit) as raised:
                    main(argv)
            self.assertEqual(1, raised.exception.code, msg=argv)
            self.assertIn('error:', stderr.getvalue())


class TestMain(TestCase):
    def setUp(self):
        self.directory = tempfile.mkdtemp()
        years, edges = random_citation_dag(np.random.RandomState(3), 12)
        self.topic = os.path.join(self.directory, 'topic.json')
        write_topic_file(make_snapshot(years, edges), self.topic)

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_load_config(self):
        config_path = os.path.join(self.directory, 'run.json')
        with io.open(config_path, 'w', encoding='utf-8') as stream:
            stream.write(json.dumps({'topics': ['topic.json'], 'stride': 2}))
        extra = os.path.join(self.directory, 'other.json')
        args = build_parser().parse_args(['tree', extra, '-c', config_path, '-o', 'elsewhere'])
        config = load_config(args)
        self.assertEqual(['topic', 'other'], [topic.name for topic in config.topics])
        self.assertEqual(self.topic, config.topic('topic').path)
        self.assertEqual(2, config.stride)
        self.assertEqual('elsewhere', config.output_dir)

    def test_end_to_end(self):
        output = os.path.join(self.directory, 'out')
        self.assertEqual(0, main(['temperature', self.topic, '-o', output, '-w', '1']))
        self.assertTrue(os.path.isfile(os.path.join(output, 'topic', 'series.csv')))
        self.assertTrue(os.path.isfile(os.path.join(output, 'run_metadata.json')))

    def test_dispatch(self):
        with mock.patch('citation_thermo.cli.run_pipeline', return_value=2) as run:
            self.assertEqual(2, main(['ingest-validate', self.topic, '--normalize']))
        config = run.call_args[0][0]
        self.assertEqual(['topic'], [topic.name for topic in config.topics])
        self.assertEqual({'command': 'ingest-validate', 'normalize': True}, run.call_args[1])

    def test_bad_config(self):
        with mock.patch('citation_thermo.cli.run_pipeline') as run:
            self.assertEqual(1, main(['all', '-c', os.path.join(self.directory, 'missing.json')]))
            self.assertEqual(1, main(['all', self.topic, '-t', 'unknown']))
        self.assertFalse(run.called)

    def test_duplicate_topic_names(self):
        copy = os.path.join(self.directory, 'sub', 'topic.json')
        os.makedirs(os.path.dirname(copy))
        shutil.copy(self.topic, copy)
        with mock.patch('citation_thermo.cli.run_pipeline') as run:
            self.assertEqual(1, main(['tree', self.topic, copy]))
        self.assertFalse(run.called)
