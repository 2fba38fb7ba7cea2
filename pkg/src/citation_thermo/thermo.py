import logging
import math
from typing import Any, Dict, List, Optional, Sequence
from .entropy import POWER_MAX_ITERATIONS, POWER_TOLERANCE, structure_entropy, von_neumann_entropy
from .errors import DegenerateTopic, EntropyStagnant, ThermoError, TopicError
from .shrink import internal_energy, shrink
from .skeleton import DifferenceIndices, SkeletonResult, SkeletonTree, extract_skeleton
from .topic_graph import TopicSnapshot


logger = logging.getLogger(__name__)


#: |dS| below this is treated as no entropy change
ENTROPY_EPSILON = 1e-12

#: Flag recorded when t_structure could not be computed because entropy did not move
FLAG_ENTROPY_STAGNANT = 'entropy-stagnant'


class ThermoConstants(object):
    """Constants of the growth temperature."""

    #: Topics larger than this get the small growth coefficient
    LARGE_TOPIC = 5000

    #: Growth coefficient k for topics up to LARGE_TOPIC articles
    K_SMALL_TOPIC = 100.0

    #: Growth coefficient k for topics above LARGE_TOPIC articles
    K_LARGE_TOPIC = 10.0

    def __init__(self, R=8.0, c=1.0, k=K_SMALL_TOPIC):
        # type: (float, float, float) -> None
        for name, value in (('R', R), ('c', c), ('k', k)):
            if not value > 0:
                raise ValueError('{} must be positive, got {}'.format(name, value))
        self.R = float(R)
        self.c = float(c)
        self.k = float(k)

    @classmethod
    def for_topic(cls, topic_size, R=8.0, c=1.0, k=None):
        # type: (int, float, float, Optional[float]) -> ThermoConstants

        """Constants for a topic of `topic_size` articles; k is picked by size unless given."""
        if k is None:
            k = cls.K_LARGE_TOPIC if topic_size > cls.LARGE_TOPIC else cls.K_SMALL_TOPIC
        return cls(R=R, c=c, k=k)

    def as_dict(self):
        # type: () -> Dict[str, float]
        return {'R': self.R, 'c': self.c, 'k': self.k}

    def __repr__(self):
        return 'ThermoConstants(R={}, c={}, k={})'.format(self.R, self.c, self.k)


class TemperatureRecord(object):
    """One row of a topic's temperature series."""

    __slots__ = ('t', 'node_count', 'edge_count', 'useful_info', 'mass', 't_growth',
                 't_structure', 'flag')

    def __init__(self,
                 t,                  # type: int
                 node_count,         # type: int
                 edge_count,         # type: int
                 useful_info,        # type: float
                 t_growth,           # type: float
                 t_structure=None,   # type: Optional[float]
                 flag=None           # type: Optional[str]
                 ):
        # type: (...) -> None
        self.t = t
        self.node_count = node_count
        self.edge_count = edge_count
        self.useful_info = useful_info
        self.mass = node_count - useful_info
        self.t_growth = t_growth
        self.t_structure = t_structure
        self.flag = flag

    @property
    def volume(self):
        # type: () -> int
        return self.node_count

    @property
    def t_total(self):
        # type: () -> float
        return self.t_growth + (self.t_structure or 0.0)

    def as_dict(self):
        # type: () -> Dict[str, Any]
        return {
            'year': self.t,
            'nodes': self.node_count,
            'edges': self.edge_count,
            'mass': self.mass,
            'volume': self.node_count,
            'useful_info': self.useful_info,
            't_growth': self.t_growth,
            't_structure': self.t_structure,
            't_total': self.t_total,
            'flag': self.flag,
        }

    def __repr__(self):
        return 'TemperatureRecord(t={}, n={:.3f}, V={}, T={:.3f})'.format(
            self.t, self.mass, self.node_count, self.t_total)


def useful_info(tree, diff):
    # type: (SkeletonTree, DifferenceIndices) -> float

    """Sum of DiffIdx over the tree's (cited, citer) edges, normalized by their maximum."""
    edges = tree.edges()
    if not edges:
        return 0.0
    values = [diff.between(cited, citer) for cited, citer in edges]
    top = max(values)
    if top <= 0:
        # every term is 0/0; each counts as 1
        return float(len(values))
    return math.fsum(values) / top


def t_growth_init(S0, n0, V0, consts):
    # type: (float, float, float, ThermoConstants) -> float

    """k * exp(S0 / (c n0)) * (n0 / V0) ** (R / c)"""
    if n0 <= 0 or V0 <= 0:
        raise DegenerateTopic('initial mass {} and volume {} must be positive'.format(n0, V0))
    return consts.k * math.exp(S0 / (consts.c * n0)) * (n0 / float(V0)) ** (consts.R / consts.c)


def t_growth_update(prev_T, n_prev, n_curr, V_prev, V_curr):
    # type: (float, float, float, float, float) -> float

    """Isobaric update: T * (n_prev / n_curr) * (V_curr / V_prev)."""
    if min(n_prev, n_curr, V_prev, V_curr) <= 0:
        raise DegenerateTopic('masses ({}, {}) and volumes ({}, {}) must be positive'.format(
            n_prev, n_curr, V_prev, V_curr))
    return prev_T * (n_prev / float(n_curr)) * (V_curr / float(V_prev))


def t_structure(prev, curr, tolerance=POWER_TOLERANCE, max_iterations=POWER_MAX_ITERATIONS):
    # type: (TopicSnapshot, TopicSnapshot, float, int) -> float

    """
    |dU / dS| / |V_curr|, with U and S the internal energy and von Neumann entropy of `prev`
    and of `curr` shrunk onto `prev`.
    :raises EntropyStagnant: if the entropy change is below ENTROPY_EPSILON.
    """
    shrunk = shrink(prev, curr)
    delta_u = internal_energy(shrunk) - internal_energy(prev)
    delta_s = (von_neumann_entropy(shrunk, tolerance=tolerance, max_iterations=max_iterations) -
               von_neumann_entropy(prev, tolerance=tolerance, max_iterations=max_iterations))
    logger.debug('%s -> %s: dU=%.6g dS=%.6g', prev, curr, delta_u, delta_s)
    if abs(delta_s) < ENTROPY_EPSILON:
        raise EntropyStagnant('entropy did not change between {} and {}'.format(
            prev.timestamp, curr.timestamp))
    return abs(delta_u / delta_s) / curr.num_nodes


def temperature_series(snapshots,                 # type: Sequence[TopicSnapshot]
                       consts,                    # type: ThermoConstants
                       skeletons=None,            # type: Optional[Sequence[SkeletonResult]]
                       log_base=None,             # type: Optional[float]
                       tolerance=POWER_TOLERANCE,             # type: float
                       max_iterations=POWER_MAX_ITERATIONS,   # type: int
                       **skeleton_options
                       ):
    # type: (...) -> List[TemperatureRecord]

    """
    Knowledge temperature of a topic at every snapshot.

    :param snapshots: Strictly increasing in time; the first must have at least one article.
    :param skeletons: Precomputed skeletons, one per snapshot; extracted here when absent.
    :param skeleton_options: Passed to extract_skeleton.
    :raises TopicError: wrapping the failing component's error and the snapshot year.
    """
    if skeletons is not None and len(skeletons) != len(snapshots):
        raise ValueError('expected {} skeletons, got {}'.format(len(snapshots), len(skeletons)))

    records = []  # type: List[TemperatureRecord]
    prev = None  # type: Optional[TopicSnapshot]
    for i, snapshot in enumerate(snapshots):
        topic = snapshot.pioneer.id
        try:
            if prev is not None and snapshot.timestamp <= prev.timestamp:
                raise ValueError('snapshot years must increase: {} after {}'.format(
                    snapshot.timestamp, prev.timestamp))
            skeleton = skeletons[i] if skeletons is not None else \
                extract_skeleton(snapshot, **skeleton_options)
            info = useful_info(skeleton.tree, skeleton.diff)
            record = TemperatureRecord(snapshot.timestamp, snapshot.num_nodes,
                                       snapshot.num_edges, info, 0.0)

            if prev is None:
                entropy = structure_entropy(skeleton.tree, log_base=log_base)
                record.t_growth = t_growth_init(entropy.total, record.mass, record.volume, consts)
            else:
                last = records[-1]
                record.t_growth = t_growth_update(last.t_growth, last.mass, record.mass,
                                                  last.volume, record.volume)
                try:
                    record.t_structure = t_structure(prev, snapshot, tolerance=tolerance,
                                                     max_iterations=max_iterations)
                except EntropyStagnant:
                    logger.warning('Entropy of %s unchanged since %d; recording t_structure 0',
                                   snapshot, prev.timestamp)
                    record.t_structure = 0.0
                    record.flag = FLAG_ENTROPY_STAGNANT
        except (ThermoError, ValueError) as e:
            if isinstance(e, TopicError):
                raise
            raise TopicError(topic, e, year=snapshot.timestamp)

        logger.debug('%r', record)
        records.append(record)
        prev = snapshot
    return records
