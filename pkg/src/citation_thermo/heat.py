import logging
import math
import numpy as np
import scipy.sparse as sp
from typing import Dict, Iterable, Optional, Sequence, Set
from .errors import AllColdTopic
from .skeleton import DifferenceIndices, SkeletonResult
from .topic_graph import TopicSnapshot


logger = logging.getLogger(__name__)


#: Temperature of free nodes before the first step
INITIAL_TEMPERATURE = 0.5

HOT = 1.0
COLD = 0.0


def inactive_nodes(prev, curr):
    # type: (Optional[TopicSnapshot], TopicSnapshot) -> Set[str]

    """
    Articles of `curr` that nobody cites, plus articles of `prev` that gained no citer since.
    The pioneer is never inactive.
    """
    counts = curr.citation_counts()
    inactive = {node_id for node_id, count in zip(curr.ids, counts) if count == 0}
    if prev is not None:
        before = dict(zip(prev.ids, prev.citation_counts()))
        inactive.update(node_id for node_id, count in zip(curr.ids, counts)
                        if node_id in before and count <= before[node_id])
    inactive.discard(curr.pioneer.id)
    return inactive


def conductivity(snapshot, diff):
    # type: (TopicSnapshot, DifferenceIndices) -> sp.csr_matrix

    """
    0.5 + DiffIdx min-max normalized over the existing citations, on the citations only.
    All-equal DiffIdx gives 0.5 everywhere.
    """
    n = snapshot.num_nodes
    rows, cols = snapshot.edge_indices()
    if len(rows) == 0:
        return sp.csr_matrix((n, n))
    values = diff.on_edges(rows, cols)
    low, high = values.min(), values.max()
    if high > low:
        normalized = (values - low) / (high - low)
    else:
        normalized = np.zeros_like(values)
    return sp.csr_matrix((0.5 + normalized, (rows, cols)), shape=(n, n))


class NodeHeatMap(object):
    """Per-article knowledge temperature at one snapshot."""

    def __init__(self, ids, std, scaled=None, topic_temperature=None):
        # type: (Sequence[str], np.ndarray, Optional[np.ndarray], Optional[float]) -> None
        self.ids = tuple(ids)
        self.std = np.asarray(std, dtype=np.float64)
        self.scaled = None if scaled is None else np.asarray(scaled, dtype=np.float64)
        self.topic_temperature = topic_temperature

    def std_temp(self):
        # type: () -> Dict[str, float]
        return dict(zip(self.ids, self.std.tolist()))

    def scaled_temp(self):
        # type: () -> Dict[str, float]
        if self.scaled is None:
            raise ValueError('heat map has not been scaled')
        return dict(zip(self.ids, self.scaled.tolist()))

    def value(self, node_id):
        # type: (str) -> float

        """Scaled temperature when available, standardized otherwise."""
        values = self.std if self.scaled is None else self.scaled
        return float(values[self.ids.index(node_id)])

    def __len__(self):
        return len(self.ids)

    def __repr__(self):
        return 'NodeHeatMap(nodes={}, T={})'.format(len(self.ids), self.topic_temperature)


class HeatSystem(object):
    """
    Heat equation dT_u/dt = sum_i K_iu (T_i - T_u) on a snapshot, with the pioneer held hot
    and inactive articles held cold.
    """

    def __init__(self,
                 ids,                                # type: Sequence[str]
                 conductivity,                       # type: sp.csr_matrix
                 hot,                                # type: Iterable[str]
                 cold,                               # type: Iterable[str]
                 forward_iters,                      # type: int
                 backward_iters=1,                   # type: int
                 initial=INITIAL_TEMPERATURE         # type: float
                 ):
        # type: (...) -> None
        self.ids = tuple(ids)
        self.conductivity = sp.csr_matrix(conductivity)
        index = {node_id: i for i, node_id in enumerate(self.ids)}
        self.hot = np.array(sorted(index[node_id] for node_id in hot), dtype=np.int64)
        self.cold = np.array(sorted(index[node_id] for node_id in cold), dtype=np.int64)
        if np.intersect1d(self.hot, self.cold).size:
            raise ValueError('a node cannot be pinned both hot and cold')
        self.forward_iters = int(forward_iters)
        self.backward_iters = int(backward_iters)
        self.initial = float(initial)

    @classmethod
    def build(cls, snapshot, skeleton, prev=None, initial=INITIAL_TEMPERATURE):
        # type: (TopicSnapshot, SkeletonResult, Optional[TopicSnapshot], float) -> HeatSystem
        return cls(snapshot.ids,
                   conductivity(snapshot, skeleton.diff),
                   hot=[snapshot.pioneer.id],
                   cold=inactive_nodes(prev, snapshot),
                   forward_iters=int(math.floor(skeleton.scales.avg_step)),
                   initial=initial)

    def _pin(self, temperatures):
        # type: (np.ndarray) -> np.ndarray
        temperatures[self.hot] = HOT
        temperatures[self.cold] = COLD
        return np.clip(temperatures, COLD, HOT, out=temperatures)

    @staticmethod
    def _step(kernel, temperatures):
        # type: (sp.csr_matrix, np.ndarray) -> np.ndarray

        """One synchronous explicit-Euler step; heat flows along kernel[i, u] from i into u."""
        incoming = np.asarray(kernel.sum(axis=0)).ravel()
        top = incoming.max() if incoming.size else 0.0
        if top <= 0:
            return temperatures
        eta = 1.0 / top
        return temperatures + eta * (kernel.T.dot(temperatures) - incoming * temperatures)

    def diffuse(self):
        # type: () -> NodeHeatMap

        """Backward steps on the transposed conductivity, then forward steps."""
        temperatures = self._pin(np.full(len(self.ids), self.initial))
        backward = self.conductivity.T.tocsr()
        for _ in range(self.backward_iters):
            temperatures = self._pin(self._step(backward, temperatures))
        for _ in range(self.forward_iters):
            temperatures = self._pin(self._step(self.conductivity, temperatures))

        logger.debug('Diffused heat over %d nodes (%d backward, %d forward steps)',
                     len(self.ids), self.backward_iters, self.forward_iters)
        return NodeHeatMap(self.ids, temperatures)


def scale(heat_map, topic_temperature):
    # type: (NodeHeatMap, float) -> NodeHeatMap

    """
    Rescale standardized temperatures so their mean is the topic temperature.
    :raises AllColdTopic: if every standardized temperature is 0.
    """
    mean = float(heat_map.std.mean()) if len(heat_map) else 0.0
    if mean <= 0:
        raise AllColdTopic('every article of the topic is cold')
    scaled = heat_map.std * (topic_temperature / mean)
    return NodeHeatMap(heat_map.ids, heat_map.std, scaled, topic_temperature=topic_temperature)
