import datetime
import gevent
import logging
import math
import os
import pandas as pd
import platform
import psutil
from gevent.threadpool import ThreadPool
from typing import Any, Dict, List, Optional
from .config import RunConfig, TopicSpec
from .entropy import StructureEntropy, structure_entropy
from .errors import ThermoError, TopicError, exit_code_for
from .forest import forest_series
from .heat import HeatSystem, NodeHeatMap, inactive_nodes, scale
from .heat_profile import heat_by_age, heat_citation_correlation, heat_sources
from .skeleton import SkeletonResult, extract_skeleton
from .thermo import TemperatureRecord, ThermoConstants, temperature_series
from .topic_graph import TopicSnapshot, build_snapshot, snapshot_years
from . import topic_io


logger = logging.getLogger(__name__)


#: Stages each CLI command runs
STAGES = {
    'ingest-validate': ('ingest',),
    'tree': ('ingest', 'tree'),
    'temperature': ('ingest', 'tree', 'temperature'),
    'heat': ('ingest', 'tree', 'temperature', 'heat'),
    'forest': ('ingest', 'tree', 'temperature', 'forest'),
    'all': ('ingest', 'tree', 'temperature', 'heat', 'forest'),
}

#: Modelling choices reported in the run metadata
DECISIONS = {
    'laplacian': 'symmetrized (L + L^T) / 2, pioneer self-loop, pseudo-inverse degree',
    'embedding': 'eigenvector rows weighted by 1 - eigenvalue, largest-magnitude component positive',
    'parent_distance': 'shortest EmbedDist path on the undirected snapshot',
    'pioneer_in_diff_idx': 'pioneer is its own parent',
    'loop_cut_tie_break': 'largest reduction-index gap, then lowest id pair',
    'prune_tie_break': 'closest reduction index, then oldest year, then lowest id',
    'subtree_volume': 'node count',
    'shrink_order': 'ascending (year, id)',
    'von_neumann_degrees': 'within each strongly connected component',
    'heat_scheme': 'explicit Euler, eta = 1 / max incoming conductivity, pin and clip each step',
    'forest_receiver_denominator': 'sum of receiver masses',
    'csv_decimals': 3,
}


class TopicResult(object):
    """Everything computed for one topic, or the error that stopped it."""

    def __init__(self, spec):
        # type: (TopicSpec) -> None
        self.spec = spec
        self.full = None  # type: Optional[TopicSnapshot]
        self.snapshots = []  # type: List[TopicSnapshot]
        self.skeletons = []  # type: List[SkeletonResult]
        self.entropies = []  # type: List[StructureEntropy]
        self.records = []  # type: List[TemperatureRecord]
        self.heat_maps = []  # type: List[NodeHeatMap]
        self.constants = None  # type: Optional[ThermoConstants]
        self.error = None  # type: Optional[BaseException]

    @property
    def name(self):
        # type: () -> str
        return self.spec.name

    def metadata(self):
        # type: () -> Dict[str, Any]
        meta = {
            'path': self.spec.path,
            'status': 'failed' if self.error is not None else 'ok',
            'years': [snapshot.timestamp for snapshot in self.snapshots],
        }  # type: Dict[str, Any]
        if self.full is not None:
            meta['articles'] = self.full.num_nodes
            meta['citations'] = self.full.num_edges
            meta['pioneer'] = self.full.pioneer.id
        if self.constants is not None:
            meta['constants'] = self.constants.as_dict()
        if self.skeletons:
            meta['skeletons'] = {str(s.snapshot.timestamp): s.metadata() for s in self.skeletons}
        flags = {str(r.t): r.flag for r in self.records if r.flag}
        if flags:
            meta['flags'] = flags
        if self.error is not None:
            meta['error'] = str(self.error)
            meta['exit_code'] = exit_code_for(self.error)
        return meta


def _finite(value):
    # type: (float) -> Optional[float]
    return None if value is None or math.isnan(value) else value


class TopicPipeline(object):
    """
    Runs the configured stages over every topic in a gevent thread pool, then forest helping
    over the declared groups. A failing topic is logged and reported; the others go on.
    """

    def __init__(self, config, command='all', normalize=False):
        # type: (RunConfig, str, bool) -> None

        """
        :param command: Key of STAGES selecting what is computed and exported.
        :param normalize: Also write each ingested topic back as a normalized JSON document.
        """
        if command not in STAGES:
            raise ValueError('Unknown command {}'.format(command))
        self._config = config
        self._command = command
        self._stages = set(STAGES[command])
        self._normalize = normalize
        self._pool = ThreadPool(config.worker_count)
        self.results = {}  # type: Dict[str, TopicResult]

    def stop(self):
        # type: () -> None
        self._pool.kill()

    def __enter__(self):
        return self

    def __exit__(self, exception_type, exception_value, traceback):
        self.stop()

    def _path(self, *parts):
        # type: (*str) -> str
        return os.path.join(self._config.output_dir, *parts)

    def run(self):
        # type: () -> int

        """
        Process every topic and group and write the run metadata.
        :return: CLI exit code: 0, or the highest code of the failures.
        """
        started = datetime.datetime.now().isoformat()
        jobs = []
        for spec in self._config.topics:
            logger.info('Spawning worker for topic %s', spec.name)
            jobs.append(self._pool.spawn(self._run_topic, spec))
        gevent.wait(jobs)
        for job in jobs:
            result = job.get()
            self.results[result.name] = result

        group_errors = []  # type: List[BaseException]
        if 'forest' in self._stages:
            for group in sorted(self._config.groups):
                try:
                    self._run_group(group)
                except ThermoError as e:
                    logger.exception('Forest helping failed for group %s', group)
                    group_errors.append(e)

        self._write_metadata(started)
        failures = [r.error for r in self.results.values() if r.error is not None] + group_errors
        return max([exit_code_for(error) for error in failures] or [0])

    def _run_topic(self, spec):
        # type: (TopicSpec) -> TopicResult
        result = TopicResult(spec)
        try:
            self._compute(result)
            self._export(result)
            logger.info('Finished topic %s', spec.name)
        except Exception as e:
            logger.exception('Topic %s failed', spec.name)
            result.error = e if isinstance(e, (ThermoError, ValueError)) else TopicError(spec.name, e)
        return result

    def _skeleton_options(self):
        # type: () -> Dict[str, Any]
        config = self._config
        return {
            'dense_limit': config.dense_limit,
            'truncation_rank': config.truncation_rank,
            'sample_threshold': config.sample_threshold,
            'sample_sources': config.sample_sources,
            'seed': config.seed,
            'avg_step_directed': config.avg_step_directed,
        }

    def _compute(self, result):
        # type: (TopicResult) -> None
        config = self._config
        try:
            result.full = topic_io.ingest(result.spec.path)
        except ThermoError as e:
            raise TopicError(result.name, e)
        if 'tree' not in self._stages:
            return

        years = snapshot_years(result.full, years=config.years, stride=config.stride)
        logger.info('Topic %s: snapshots %s', result.name, years)
        for year in years:
            try:
                snapshot = build_snapshot(result.full, year)
                skeleton = extract_skeleton(snapshot, **self._skeleton_options())
                entropy = structure_entropy(skeleton.tree, log_base=config.log_base)
            except ThermoError as e:
                raise TopicError(result.name, e, year=year)
            result.snapshots.append(snapshot)
            result.skeletons.append(skeleton)
            result.entropies.append(entropy)
        if 'temperature' not in self._stages:
            return

        result.constants = ThermoConstants.for_topic(result.full.num_nodes, R=config.R,
                                                     c=config.c, k=config.k)
        try:
            result.records = temperature_series(result.snapshots, result.constants,
                                                skeletons=result.skeletons,
                                                log_base=config.log_base,
                                                tolerance=config.power_tolerance,
                                                max_iterations=config.power_max_iterations)
        except TopicError as e:
            raise TopicError(result.name, e.cause, year=e.year)
        if 'heat' not in self._stages:
            return

        prev = None
        for snapshot, skeleton, record in zip(result.snapshots, result.skeletons, result.records):
            try:
                system = HeatSystem.build(snapshot, skeleton, prev=prev,
                                          initial=config.initial_temperature)
                result.heat_maps.append(scale(system.diffuse(), record.t_total))
            except ThermoError as e:
                raise TopicError(result.name, e, year=snapshot.timestamp)
            prev = snapshot

    def _export(self, result):
        # type: (TopicResult) -> None
        name = result.name
        if self._normalize:
            topic_io.write_topic_file(result.full, self._path(name, 'topic.json'))
        if 'tree' in self._stages:
            heat_maps = result.heat_maps or [None] * len(result.skeletons)
            for skeleton, entropy, heat_map in zip(result.skeletons, result.entropies, heat_maps):
                year = str(skeleton.snapshot.timestamp)
                topic_io.write_tree_dot(skeleton.tree, entropy,
                                        self._path(name, 'trees', year + '.dot'),
                                        heat_map=heat_map, name='{} {}'.format(name, year))
                topic_io.write_tree_json(skeleton.tree, entropy,
                                         self._path(name, 'trees', year + '.json'),
                                         heat_map=heat_map)
        if 'temperature' in self._stages:
            topic_io.write_series_csv(result.records, self._path(name, 'series.csv'))
        if result.heat_maps:
            self._export_heat(result)

    def _export_heat(self, result):
        # type: (TopicResult) -> None
        name = result.name
        profiles = []
        prev = None
        for snapshot, skeleton, heat_map in zip(result.snapshots, result.skeletons,
                                                result.heat_maps):
            rho, p_value = heat_citation_correlation(heat_map, snapshot)
            topic_io.write_heat_json(
                heat_map, self._path(name, 'heat', '{}.json'.format(snapshot.timestamp)),
                inactive=inactive_nodes(prev, snapshot),
                extra={
                    'year': snapshot.timestamp,
                    'citation_correlation': {'rho': _finite(rho), 'p_value': _finite(p_value)},
                    'heat_sources': heat_sources(skeleton.tree, heat_map),
                })
            profile = heat_by_age(heat_map, snapshot)
            profile.insert(0, 'year', snapshot.timestamp)
            profiles.append(profile)
            prev = snapshot
        topic_io.write_table_csv(pd.concat(profiles, ignore_index=True),
                                 self._path(name, 'heat_by_age.csv'))
        topic_io.write_json(self.tracked_papers(result), self._path(name, 'tracked.json'))

    def tracked_papers(self, result):
        # type: (TopicResult) -> Dict[str, Dict[str, float]]

        """Scaled temperature per snapshot of the `track_top` most-cited child papers."""
        final = result.snapshots[-1]
        counts = final.citation_counts()
        candidates = [i for i in range(final.num_nodes) if i != final.pioneer_index]
        candidates.sort(key=lambda i: (-counts[i], final.ids[i]))
        chosen = [final.ids[i] for i in candidates[:self._config.track_top]]

        tracked = {}
        for node_id in chosen:
            tracked[node_id] = {str(snapshot.timestamp): heat_map.value(node_id)
                                for snapshot, heat_map in zip(result.snapshots, result.heat_maps)
                                if node_id in snapshot}
        return tracked

    def _run_group(self, group):
        # type: (str) -> None
        members = self._config.groups[group]
        series = {}
        for name in members:
            result = self.results.get(name)
            if result is None or result.error is not None:
                logger.warning('Group %s: topic %s failed; excluded', group, name)
                continue
            series[name] = result.records
        frame = forest_series(group, series, c=self._config.c)
        path = self._path('groups', '{}.csv'.format(group))
        topic_io.write_table_csv(frame, path)
        logger.info('Wrote forest-helping table %s', path)

    def _write_metadata(self, started):
        # type: (str) -> None
        memory = psutil.virtual_memory()
        payload = {
            'command': self._command,
            'started': started,
            'finished': datetime.datetime.now().isoformat(),
            'config': self._config.as_dict(),
            'decisions': DECISIONS,
            'topics': {name: result.metadata() for name, result in sorted(self.results.items())},
            'host': {
                'python': platform.python_version(),
                'cpus': psutil.cpu_count(),
                'memory_bytes': memory.total,
            },
        }
        path = self._path('run_metadata.json')
        topic_io.write_json(payload, path)
        logger.info('Wrote run metadata %s', path)


def run_pipeline(config, command='all', normalize=False):
    # type: (RunConfig, str, bool) -> int
    with TopicPipeline(config, command=command, normalize=normalize) as pipeline:
        return pipeline.run()

