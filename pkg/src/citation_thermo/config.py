import io
import json
import logging
import os
import psutil
from typing import Any, Dict, List, Mapping, Optional
from .errors import ValidationError


logger = logging.getLogger(__name__)


class TopicSpec(object):
    """A named topic and the file holding its citation graph."""

    def __init__(self, name, path):
        # type: (str, str) -> None
        self.name = str(name)
        self.path = path

    def as_dict(self):
        # type: () -> Dict[str, str]
        return {'name': self.name, 'path': self.path}

    def __repr__(self):
        return 'TopicSpec({!r}, {!r})'.format(self.name, self.path)


class RunConfig(object):
    """
    Settings of a pipeline run. Every attribute below is a documented default that keyword
    arguments (or a JSON config file) override.
    """

    #: Explicit snapshot years; when empty, snapshots are taken every `stride` years
    years = ()  # type: tuple

    #: Years between consecutive snapshots
    stride = 1

    #: Growth-temperature constants; k=None picks 10 or 100 from the final topic size
    R = 8.0
    c = 1.0
    k = None  # type: Optional[float]

    #: Base of the structure-entropy logarithm; None is the natural log
    log_base = None  # type: Optional[float]

    #: Largest topic decomposed densely; larger ones are truncated
    dense_limit = 5000

    #: Eigenvectors kept by a truncated decomposition
    truncation_rank = 512

    #: Topics above this many articles estimate avg_step from sampled sources
    sample_threshold = 5000

    #: Number of sampled sources
    sample_sources = 2000

    #: Seed of every random choice (sampling, truncated eigensolver start vector)
    seed = 0

    #: Follow citation direction when counting hops for avg_step
    avg_step_directed = True

    #: Temperature of free articles before heat diffusion
    initial_temperature = 0.5

    #: Stationary-vector solver settings
    power_tolerance = 1e-12
    power_max_iterations = 100000

    #: Directory receiving every output file
    output_dir = 'output'

    #: Size of the topic work pool; None uses the physical CPU count
    workers = None  # type: Optional[int]

    #: Most-cited child papers whose temperature is tracked across snapshots
    track_top = 5

    _KEYS = ('topics', 'years', 'stride', 'R', 'c', 'k', 'log_base', 'dense_limit',
             'truncation_rank', 'sample_threshold', 'sample_sources', 'seed', 'avg_step_directed',
             'initial_temperature', 'power_tolerance', 'power_max_iterations', 'groups',
             'output_dir', 'workers', 'track_top')

    def __init__(self, **settings):
        unknown = sorted(set(settings) - set(self._KEYS))
        if unknown:
            raise ValidationError('unknown configuration keys: {}'.format(', '.join(unknown)))

        topics = settings.pop('topics', None) or []
        groups = settings.pop('groups', None) or {}
        for key, value in settings.items():
            if value is not None or key in ('k', 'log_base', 'workers'):
                setattr(self, key, value)

        self.topics = [topic if isinstance(topic, TopicSpec) else self._topic(topic)
                       for topic in topics]  # type: List[TopicSpec]
        self.groups = {str(name): [str(member) for member in members]
                       for name, members in groups.items()}  # type: Dict[str, List[str]]
        self.years = tuple(int(year) for year in self.years)
        self._validate()

    @staticmethod
    def _topic(entry):
        # type: (Any) -> TopicSpec
        if isinstance(entry, Mapping) and 'path' in entry:
            path = entry['path']
            return TopicSpec(entry.get('name') or os.path.splitext(os.path.basename(path))[0], path)
        if isinstance(entry, str):
            return TopicSpec(os.path.splitext(os.path.basename(entry))[0], entry)
        raise ValidationError('topic entry needs a "path": {!r}'.format(entry))

    def _validate(self):
        # type: () -> None
        names = [topic.name for topic in self.topics]
        duplicates = sorted(set(name for name in names if names.count(name) > 1))
        if duplicates:
            raise ValidationError('duplicate topic names: {}'.format(', '.join(duplicates)))
        for group, members in self.groups.items():
            missing = [member for member in members if member not in names]
            if missing:
                raise ValidationError('group {} names unknown topics: {}'.format(
                    group, ', '.join(missing)))
        for key in ('R', 'c', 'stride', 'dense_limit', 'truncation_rank', 'sample_sources',
                    'power_max_iterations', 'power_tolerance'):
            if not getattr(self, key) > 0:
                raise ValidationError('{} must be positive'.format(key))
        if self.k is not None and not self.k > 0:
            raise ValidationError('k must be positive')
        if self.workers is not None and self.workers < 1:
            raise ValidationError('workers must be at least 1')

    @classmethod
    def from_file(cls, path, **overrides):
        # type: (str, **Any) -> RunConfig

        """
        Load a JSON config document. Relative topic paths resolve against the file's directory.
        Non-None `overrides` replace file values.
        """
        try:
            with io.open(path, 'r', encoding='utf-8') as stream:
                settings = json.load(stream)
        except ValueError as e:
            raise ValidationError('invalid config file {}: {}'.format(path, e))
        if not isinstance(settings, dict):
            raise ValidationError('config file {} must hold a JSON object'.format(path))

        base = os.path.dirname(os.path.abspath(path))
        topics = []
        for entry in settings.get('topics', []):
            spec = cls._topic(entry)
            if not os.path.isabs(spec.path):
                spec.path = os.path.join(base, spec.path)
            topics.append(spec)
        settings['topics'] = topics
        settings.update((key, value) for key, value in overrides.items() if value is not None)

        logger.info('Loaded configuration from %s', path)
        return cls(**settings)

    @property
    def worker_count(self):
        # type: () -> int
        if self.workers:
            return int(self.workers)
        return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1

    def topic(self, name):
        # type: (str) -> TopicSpec
        for topic in self.topics:
            if topic.name == name:
                return topic
        raise KeyError('Unknown topic {}'.format(name))

    def select_topics(self, names):
        # type: (List[str]) -> None

        """Restrict the run to the named topics, dropping groups that lose a member."""
        chosen = [self.topic(name) for name in names]
        self.topics = chosen
        kept = set(names)
        self.groups = {group: members for group, members in self.groups.items()
                       if set(members) <= kept}

    def as_dict(self):
        # type: () -> Dict[str, Any]
        settings = {key: getattr(self, key) for key in self._KEYS}
        settings['topics'] = [topic.as_dict() for topic in self.topics]
        settings['years'] = list(self.years)
        settings['workers'] = self.worker_count
        return settings
