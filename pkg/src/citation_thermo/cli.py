import argparse
import logging
import sys
from typing import List, Optional, Sequence
from .config import RunConfig
from .errors import ThermoError, exit_code_for
from .pipeline import STAGES, run_pipeline


logger = logging.getLogger(__name__)


COMMAND_HELP = {
    'ingest-validate': 'parse and validate topic files',
    'tree': 'extract skeleton trees (DOT and JSON)',
    'temperature': 'compute the knowledge temperature series (CSV)',
    'heat': 'temperature series plus per-article heat maps',
    'forest': 'temperature series plus forest helping over the configured groups',
    'all': 'every stage',
}


class UsageErrorParser(argparse.ArgumentParser):
    """Exits with status 1 on usage errors, like an invalid topic."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, '{}: error: {}\n'.format(self.prog, message))


def _years(text):
    # type: (str) -> List[int]

    """Comma-separated years and inclusive ranges, e.g. "2001,2005-2007"."""
    years = []
    for part in text.split(','):
        part = part.strip()
        if not part:
            continue
        try:
            if '-' in part:
                first, last = (int(y) for y in part.split('-', 1))
                years.extend(range(first, last + 1))
            else:
                years.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError('invalid year list {!r}'.format(text))
    return years


def build_parser():
    # type: () -> argparse.ArgumentParser
    common = UsageErrorParser(add_help=False)
    common.add_argument('topic_files', nargs='*', metavar='TOPIC_FILE',
                        help='topic files to process in addition to those of --config')
    common.add_argument('--config', '-c', help='JSON run configuration')
    common.add_argument('--topic', '-t', action='append', dest='topics', metavar='NAME',
                        help='only process this configured topic (repeatable)')
    common.add_argument('--years', '-y', type=_years, help='snapshot years, e.g. 2001,2005-2007')
    common.add_argument('--output', '-o', dest='output_dir', help='output directory')
    common.add_argument('--workers', '-w', type=int, help='size of the topic work pool')
    common.add_argument('--verbose', '-v', action='store_true', help='debug logging')

    parser = UsageErrorParser(
        prog='citation-thermo',
        description='Knowledge temperature of temporal citation networks.')
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True
    for command in STAGES:
        sub = commands.add_parser(command, parents=[common], help=COMMAND_HELP[command])
        if command == 'ingest-validate':
            sub.add_argument('--normalize', action='store_true',
                             help='write each topic back as <output>/<topic>/topic.json')
    return parser


def load_config(args):
    # type: (argparse.Namespace) -> RunConfig
    overrides = {'years': args.years, 'output_dir': args.output_dir, 'workers': args.workers}
    if args.config:
        config = RunConfig.from_file(args.config, **overrides)
    else:
        config = RunConfig(**overrides)
    if args.topic_files:
        extra = RunConfig(topics=args.topic_files).topics
        config.topics.extend(extra)
        # re-check name uniqueness with the added topics
        RunConfig(topics=config.topics, groups=config.groups)
    if args.topics:
        config.select_topics(args.topics)
    return config


def main(argv=None):
    # type: (Optional[Sequence[str]]) -> int
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    try:
        config = load_config(args)
    except (ThermoError, KeyError, OSError) as e:
        logger.error('Invalid configuration: %s', e)
        return exit_code_for(e)
    if not config.topics:
        logger.warning('No topics to process')

    return run_pipeline(config, command=args.command, normalize=getattr(args, 'normalize', False))


if __name__ == '__main__':
    sys.exit(main())
