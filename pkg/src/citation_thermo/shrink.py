import logging
import numpy as np
import scipy.sparse as sp
from collections import defaultdict, deque
from itertools import combinations
from typing import Dict, List, Set, Tuple, Union
from .errors import SnapshotOrderError
from .topic_graph import EdgeType, PaperNode, TopicSnapshot


logger = logging.getLogger(__name__)


VirtualEdge = Tuple[str, str, float, str]


class ShrunkGraph(object):
    """
    G^t folded onto the node set of G^{t-1}: the real citations of G^{t-1} at weight 1 plus
    fractional virtual citations induced by the articles that arrived in between.
    """

    def __init__(self,
                 prev,         # type: TopicSnapshot
                 weights,      # type: sp.csr_matrix
                 provenance    # type: Dict[EdgeType, str]
                 ):
        # type: (...) -> None

        """
        :param prev: The earlier snapshot; fixes the node set and index mapping.
        :param weights: Weight matrix over prev's indices; entry (u, v) is "v cites u".
        :param provenance: (cited, citer) of every virtual citation -> id of the new article
            that induced it.
        """
        self._prev = prev
        self._weights = weights
        self._provenance = dict(provenance)

    @property
    def nodes(self):
        # type: () -> Tuple[PaperNode, ...]
        return self._prev.nodes

    @property
    def ids(self):
        # type: () -> Tuple[str, ...]
        return self._prev.ids

    @property
    def weights(self):
        # type: () -> sp.csr_matrix
        return self._weights

    @property
    def provenance(self):
        # type: () -> Dict[EdgeType, str]
        return dict(self._provenance)

    @property
    def num_nodes(self):
        # type: () -> int
        return self._prev.num_nodes

    def weight(self, cited, citer):
        # type: (str, str) -> float
        return float(self._weights[self._prev.index_of(cited), self._prev.index_of(citer)])

    def virtual_edges(self):
        # type: () -> List[VirtualEdge]
        return [(cited, citer, self.weight(cited, citer), source)
                for (cited, citer), source in sorted(self._provenance.items())]

    def __repr__(self):
        return 'ShrunkGraph(t={}, nodes={}, virtual={})'.format(
            self._prev.timestamp, self.num_nodes, len(self._provenance))


class _WeightedDigraph(object):
    """Mutable dict-of-dicts scratch graph used while folding new articles away."""

    def __init__(self, edges):
        # type: (List[EdgeType]) -> None
        self.out_w = defaultdict(dict)  # type: Dict[str, Dict[str, float]]
        self.in_w = defaultdict(dict)  # type: Dict[str, Dict[str, float]]
        self.provenance = {}  # type: Dict[EdgeType, str]
        for cited, citer in edges:
            self.out_w[cited][citer] = 1.0
            self.in_w[citer][cited] = 1.0

    def has_edge(self, cited, citer):
        # type: (str, str) -> bool
        return citer in self.out_w.get(cited, ())

    def add_virtual(self, cited, citer, weight, source):
        # type: (str, str, float, str) -> bool

        """Add a virtual citation unless the pair already carries one (first writer wins)."""
        if cited == citer or self.has_edge(cited, citer):
            return False
        self.out_w[cited][citer] = weight
        self.in_w[citer][cited] = weight
        self.provenance[(cited, citer)] = source
        return True

    def remove_node(self, node):
        # type: (str) -> None
        for citer in self.out_w.pop(node, {}):
            del self.in_w[citer][node]
            self.provenance.pop((node, citer), None)
        for cited in self.in_w.pop(node, {}):
            del self.out_w[cited][node]
            self.provenance.pop((cited, node), None)


def _youngest_ancestors(graph, node, old_ids):
    # type: (_WeightedDigraph, str, Set[str]) -> List[str]

    """First articles of the previous snapshot met on every backward walk from `node`."""
    found = set()
    seen = {node}
    queue = deque(sorted(graph.in_w.get(node, ())))
    seen.update(queue)
    while queue:
        current = queue.popleft()
        if current in old_ids:
            found.add(current)
            continue
        for cited in sorted(graph.in_w.get(current, ())):
            if cited not in seen:
                seen.add(cited)
                queue.append(cited)
    return sorted(found)


def _check_order(prev, curr):
    # type: (TopicSnapshot, TopicSnapshot) -> None
    missing = [node_id for node_id in prev.ids if node_id not in curr]
    if missing:
        raise SnapshotOrderError('node of {} missing from {}'.format(prev, curr), record=missing[0])
    curr_edges = set(curr.edges())
    for edge in prev.edges():
        if edge not in curr_edges:
            raise SnapshotOrderError('citation of {} missing from {}'.format(prev, curr),
                                     record='{}->{}'.format(*edge))


def shrink(prev, curr):
    # type: (TopicSnapshot, TopicSnapshot) -> ShrunkGraph

    """
    Remove the articles of `curr` absent from `prev`, oldest first (ties by id):

    - a new article with one parent hands its citers over to that parent at half weight;
    - a new article with several parents links every pair of its youngest ancestors in `prev`
      that `prev` does not already connect, the younger virtually citing the older with weight
      2 * (sum of its incoming weights) / (m (m - 1)); same-year pairs cite each other at half
      that weight.

    :raises SnapshotOrderError: if `prev` is not contained in `curr`.
    """
    _check_order(prev, curr)

    old_ids = set(prev.ids)
    prev_edges = set(prev.edges())
    years = {node.id: node.year for node in curr.nodes}
    graph = _WeightedDigraph(curr.edges())

    new_nodes = sorted((node for node in curr.nodes if node.id not in old_ids),
                       key=lambda node: (node.year, node.id))
    for node in new_nodes:
        x = node.id
        parents = graph.in_w.get(x, {})
        if len(parents) == 1:
            ancestors = list(parents)
        elif parents:
            ancestors = _youngest_ancestors(graph, x, old_ids)
        else:
            ancestors = []

        if len(ancestors) == 1:
            # single parent, or several parents converging on one ancestor
            anchor = ancestors[0]
            for child, weight in sorted(graph.out_w.get(x, {}).items()):
                graph.add_virtual(anchor, child, 0.5 * weight, x)
        elif len(ancestors) > 1:
            m = len(ancestors)
            weight = 2.0 * sum(parents.values()) / (m * (m - 1))
            ordered = sorted(ancestors, key=lambda a: (years[a], a))
            for older, younger in combinations(ordered, 2):
                if (older, younger) in prev_edges or (younger, older) in prev_edges:
                    continue
                if years[older] < years[younger]:
                    graph.add_virtual(older, younger, weight, x)
                else:
                    graph.add_virtual(older, younger, 0.5 * weight, x)
                    graph.add_virtual(younger, older, 0.5 * weight, x)
        graph.remove_node(x)

    n = prev.num_nodes
    rows, cols, data = [], [], []
    for cited, citers in graph.out_w.items():
        for citer, weight in citers.items():
            rows.append(prev.index_of(cited))
            cols.append(prev.index_of(citer))
            data.append(weight)
    weights = sp.csr_matrix((np.array(data, dtype=np.float64), (rows, cols)), shape=(n, n))
    weights.sort_indices()

    logger.debug('Shrunk %s onto %s: removed %d articles, %d virtual citations',
                 curr, prev, len(new_nodes), len(graph.provenance))
    return ShrunkGraph(prev, weights, graph.provenance)


def internal_energy(graph):
    # type: (Union[ShrunkGraph, TopicSnapshot, sp.spmatrix]) -> float

    """Sum of all edge weights; a snapshot's citations count 1 each."""
    if isinstance(graph, TopicSnapshot):
        return float(graph.num_edges)
    weights = graph.weights if isinstance(graph, ShrunkGraph) else sp.csr_matrix(graph)
    return float(weights.sum())
