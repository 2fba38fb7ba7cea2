import logging
import networkx as nx
import numpy as np
import scipy.sparse as sp
from collections import defaultdict
from scipy.sparse import csgraph
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union
from .errors import ValidationError
from .spectral import DENSE_LIMIT, TRUNCATION_RANK, SpectralEmbedding, embed, embed_dist, edge_embed_dist
from .topic_graph import TopicSnapshot, adjacency_with_pioneer_loop, strongly_connected_components


logger = logging.getLogger(__name__)


#: Topics above this many nodes estimate avg_step from sampled sources
SAMPLE_THRESHOLD = 5000

#: Number of BFS sources sampled above SAMPLE_THRESHOLD
SAMPLE_SOURCES = 2000

#: Rows of the distance matrix materialized at once above DENSE_LIMIT
BLOCK_SIZE = 256

# Stands in for zero-length edges, which a sparse graph would otherwise drop
_MIN_WEIGHT = np.finfo(np.float64).tiny

DistanceLike = Union[np.ndarray, SpectralEmbedding]
IndexEdge = Tuple[int, int]


class GraphScales(object):
    """Scale constants of a snapshot: MaxDist and avgStep."""

    def __init__(self, max_dist, avg_step, sampled=False):
        # type: (float, float, bool) -> None
        self.max_dist = float(max_dist)
        self.avg_step = float(avg_step)
        self.sampled = sampled

    @property
    def fallback(self):
        # type: () -> float

        """Distance assigned to pairs with no connecting path."""
        return self.max_dist * self.avg_step

    def __repr__(self):
        return 'GraphScales(max_dist={:.6g}, avg_step={:.6g})'.format(self.max_dist, self.avg_step)


class DifferenceIndices(object):
    """
    DiffIdx and ReductionIdx of a snapshot.

    Up to the dense limit `matrix` holds the full |V| x |V| DiffIdx. Above it only the values
    on existing edges are kept (`edge_values`, sparse), together with the exact ReductionIdx.
    """

    def __init__(self,
                 ids,               # type: Sequence[str]
                 reduction_idx,     # type: np.ndarray
                 matrix=None,       # type: Optional[np.ndarray]
                 edge_values=None   # type: Optional[sp.csr_matrix]
                 ):
        # type: (...) -> None
        if matrix is None and edge_values is None:
            raise ValueError('either matrix or edge_values is required')
        self.ids = tuple(ids)
        self.reduction_idx = reduction_idx
        self.matrix = matrix
        self.edge_values = edge_values
        self._index = {node_id: i for i, node_id in enumerate(self.ids)}

    @property
    def dense(self):
        # type: () -> bool
        return self.matrix is not None

    def on_edges(self, rows, cols):
        # type: (np.ndarray, np.ndarray) -> np.ndarray
        if self.matrix is not None:
            return self.matrix[rows, cols]
        return np.asarray(self.edge_values[rows, cols]).ravel()

    def between(self, u, v):
        # type: (str, str) -> float

        """DiffIdx[u, v] by node id."""
        i, j = self._index[u], self._index[v]
        return float(self.on_edges(np.array([i]), np.array([j]))[0])

    def reduction(self, node_id):
        # type: (str) -> float
        return float(self.reduction_idx[self._index[node_id]])


class SkeletonTree(object):
    """
    Single-parent forest extracted from a snapshot. The pioneer is the root of the main
    component; other components are rooted at articles that kept no citation.
    """

    def __init__(self, node_ids, root, parent_of):
        # type: (Sequence[str], str, Mapping[str, str]) -> None

        """
        :param node_ids: Every node of the snapshot.
        :param root: The pioneer id.
        :param parent_of: child id -> retained cited id.
        :raises ValidationError: if the parent map contains a cycle or unknown ids.
        """
        self._ids = tuple(node_ids)
        self._root = root
        self._parent_of = dict(parent_of)
        if root in self._parent_of:
            raise ValidationError('the root cannot keep a parent', record=root)
        known = set(self._ids)
        self._children = defaultdict(list)  # type: Dict[str, List[str]]
        for child, parent in sorted(self._parent_of.items()):
            if child not in known or parent not in known:
                raise ValidationError('tree edge names an unknown node', record=child)
            self._children[parent].append(child)

        self._components = self._build_components()
        if sum(len(c) for c in self._components) != len(self._ids):
            raise ValidationError('parent map contains a cycle')

    def _build_components(self):
        # type: () -> List[List[str]]
        roots = [self._root] + sorted(i for i in self._ids
                                      if i not in self._parent_of and i != self._root)
        components = []
        for root in roots:
            order = []
            stack = [root]
            while stack:
                node = stack.pop()
                order.append(node)
                stack.extend(reversed(self._children.get(node, ())))
            components.append(order)
        return components

    @property
    def root(self):
        # type: () -> str
        return self._root

    @property
    def nodes(self):
        # type: () -> Tuple[str, ...]
        return self._ids

    @property
    def parent_of(self):
        # type: () -> Dict[str, str]
        return dict(self._parent_of)

    @property
    def components(self):
        # type: () -> List[List[str]]

        """Weakly-connected trees, each listed in pre-order from its root; pioneer's first."""
        return [list(c) for c in self._components]

    @property
    def num_edges(self):
        # type: () -> int
        return len(self._parent_of)

    def parent(self, node_id):
        # type: (str) -> Optional[str]
        return self._parent_of.get(node_id)

    def children(self, node_id):
        # type: (str) -> List[str]
        return list(self._children.get(node_id, ()))

    def degree(self, node_id):
        # type: (str) -> int

        """Undirected degree within the tree."""
        return len(self._children.get(node_id, ())) + (1 if node_id in self._parent_of else 0)

    def edges(self):
        # type: () -> List[Tuple[str, str]]

        """(parent, child) pairs, i.e. (cited, citer) in the stored orientation."""
        return sorted((parent, child) for child, parent in self._parent_of.items())

    def preorder(self):
        # type: () -> List[str]
        return [node for component in self._components for node in component]

    def __repr__(self):
        return 'SkeletonTree(root={!r}, nodes={}, edges={}, components={})'.format(
            self._root, len(self._ids), self.num_edges, len(self._components))


class SkeletonResult(object):
    """Everything skeleton extraction produces for one snapshot."""

    def __init__(self, snapshot, tree, diff, scales, embedding_meta):
        # type: (TopicSnapshot, SkeletonTree, DifferenceIndices, GraphScales, Dict[str, Any]) -> None
        self.snapshot = snapshot
        self.tree = tree
        self.diff = diff
        self.scales = scales
        self.embedding_meta = embedding_meta

    def metadata(self):
        # type: () -> Dict[str, Any]
        meta = dict(self.embedding_meta)
        meta.update({
            'max_dist': self.scales.max_dist,
            'avg_step': self.scales.avg_step,
            'avg_step_sampled': self.scales.sampled,
            'diff_idx_dense': self.diff.dense,
        })
        return meta


def _edge_distances(snapshot, embed_dist_):
    # type: (TopicSnapshot, DistanceLike) -> np.ndarray
    rows, cols = snapshot.edge_indices()
    if isinstance(embed_dist_, SpectralEmbedding):
        return edge_embed_dist(embed_dist_, rows, cols)
    return np.asarray(embed_dist_)[rows, cols]


def _weight_graph(snapshot, embed_dist_):
    # type: (TopicSnapshot, DistanceLike) -> sp.csr_matrix
    n = snapshot.num_nodes
    rows, cols = snapshot.edge_indices()
    weights = np.maximum(_edge_distances(snapshot, embed_dist_), _MIN_WEIGHT)
    return sp.csr_matrix((weights, (rows, cols)), shape=(n, n))


def avg_step(snapshot,
             directed=True,                     # type: bool
             sample_threshold=SAMPLE_THRESHOLD,  # type: int
             sample_sources=SAMPLE_SOURCES,     # type: int
             seed=0                             # type: int
             ):
    # type: (...) -> Tuple[float, bool]

    """
    Mean hop count of the shortest paths over all ordered reachable pairs (u, v), u != v,
    following the stored edge direction unless `directed` is False.
    :return: (avg_step, sampled). 0 when no pair is reachable.
    """
    n = snapshot.num_nodes
    if n == 0 or snapshot.num_edges == 0:
        return 0.0, False

    sources = None
    if n > sample_threshold:
        rng = np.random.RandomState(seed)
        sources = np.sort(rng.choice(n, size=min(sample_sources, n), replace=False))
        logger.warning('Estimating avg_step of %s from %d sampled sources', snapshot, len(sources))

    hops = csgraph.shortest_path(snapshot.adjacency, method='D', directed=directed,
                                 unweighted=True, indices=sources)
    reachable = np.isfinite(hops) & (hops > 0)
    if not reachable.any():
        return 0.0, sources is not None
    return float(hops[reachable].mean()), sources is not None


def graph_scales(snapshot, embed_dist_, directed=True, sample_threshold=SAMPLE_THRESHOLD,
                 sample_sources=SAMPLE_SOURCES, seed=0):
    # type: (TopicSnapshot, DistanceLike, bool, int, int, int) -> GraphScales
    distances = _edge_distances(snapshot, embed_dist_)
    max_dist = float(distances.max()) if len(distances) else 0.0
    step, sampled = avg_step(snapshot, directed=directed, sample_threshold=sample_threshold,
                             sample_sources=sample_sources, seed=seed)
    return GraphScales(max_dist, step, sampled=sampled)


def shortest_weighted_dist(snapshot, embed_dist_, u, w, scales):
    # type: (TopicSnapshot, DistanceLike, str, str, GraphScales) -> float

    """
    Length of the shortest EmbedDist-weighted path between `u` and `w` on the undirected view
    of the snapshot, or MaxDist x avgStep when they are not connected.
    """
    i, j = snapshot.index_of(u), snapshot.index_of(w)
    if i == j:
        return 0.0
    lengths = csgraph.dijkstra(_weight_graph(snapshot, embed_dist_), directed=False, indices=i)
    return float(lengths[j]) if np.isfinite(lengths[j]) else scales.fallback


def diff_idx(snapshot, embed_dist_, scales, dense_limit=DENSE_LIMIT, block_size=BLOCK_SIZE):
    # type: (TopicSnapshot, DistanceLike, GraphScales, int, int) -> DifferenceIndices

    """
    DiffIdx[u, v] = sum over the parents p of v of d(u, p); the pioneer is its own parent.
    ReductionIdx[u] = sum over v != u of DiffIdx[u, v].
    """
    n = snapshot.num_nodes
    graph = _weight_graph(snapshot, embed_dist_)
    parents = adjacency_with_pioneer_loop(snapshot)
    parents_t = parents.T.tocsr()

    def block_diff(sources):
        lengths = csgraph.dijkstra(graph, directed=False, indices=sources)
        lengths = np.atleast_2d(lengths)
        lengths[~np.isfinite(lengths)] = scales.fallback
        # (d @ A')[u, v] sums d(u, p) over the parents p of v
        return np.asarray(parents_t.dot(lengths.T)).T

    if n <= dense_limit:
        matrix = block_diff(np.arange(n)) if n else np.zeros((0, 0))
        reduction = matrix.sum(axis=1) - np.diag(matrix)
        return DifferenceIndices(snapshot.ids, reduction, matrix=matrix)

    logger.info('Computing DiffIdx of %s in blocks of %d rows', snapshot, block_size)
    rows, cols = snapshot.edge_indices()
    values = np.zeros(len(rows))
    reduction = np.zeros(n)
    for start in range(0, n, block_size):
        stop = min(n, start + block_size)
        sources = np.arange(start, stop)
        block = block_diff(sources)
        reduction[start:stop] = block.sum(axis=1) - block[np.arange(stop - start), sources]
        in_block = (rows >= start) & (rows < stop)
        values[in_block] = block[rows[in_block] - start, cols[in_block]]
    edge_values = sp.csr_matrix((values, (rows, cols)), shape=(n, n))
    return DifferenceIndices(snapshot.ids, reduction, edge_values=edge_values)


def _weakest_cycle_edge(cycle, graph, reduction_idx, ids):
    # type: (List[IndexEdge], nx.DiGraph, np.ndarray, Sequence[str]) -> IndexEdge

    # prefer edges whose citer keeps another citation after the cut
    safe = [edge for edge in cycle if graph.in_degree(edge[1]) > 1]

    def rank(edge):
        a, b = edge
        return -abs(reduction_idx[a] - reduction_idx[b]), ids[a], ids[b]

    return min(safe or cycle, key=rank)


def cut_loops(snapshot, reduction_idx):
    # type: (TopicSnapshot, np.ndarray) -> List[IndexEdge]

    """
    Break every directed cycle by removing, one cycle at a time, the edge whose endpoints have
    the most different reduction indices, avoiding edges that carry a node's last citation.
    :return: The remaining (cited, citer) index pairs, sorted; they form a DAG.
    """
    rows, cols = snapshot.edge_indices()
    graph = nx.DiGraph()
    graph.add_nodes_from(range(snapshot.num_nodes))
    graph.add_edges_from(zip(rows.tolist(), cols.tolist()))

    removed = 0
    for component in strongly_connected_components(snapshot):
        if len(component) < 2:
            continue
        sub = graph.subgraph(component.tolist()).copy()
        while True:
            try:
                cycle = nx.find_cycle(sub)
            except nx.NetworkXNoCycle:
                break
            edge = _weakest_cycle_edge(cycle, graph, reduction_idx, snapshot.ids)
            sub.remove_edge(*edge)
            graph.remove_edge(*edge)
            removed += 1

    logger.debug('Cut %d citations to break loops in %s', removed, snapshot)
    return sorted(graph.edges())


def prune_to_tree(edges, reduction_idx, snapshot):
    # type: (Sequence[IndexEdge], np.ndarray, TopicSnapshot) -> SkeletonTree

    """
    Keep one citation per article: the cited paper whose reduction index is closest to the
    citer's (ties go to the older paper, then the lower id). The pioneer keeps none.
    """
    ids = snapshot.ids
    years = snapshot.years
    pioneer = snapshot.pioneer_index
    candidates = defaultdict(list)  # type: Dict[int, List[int]]
    for cited, citer in edges:
        if citer != pioneer and cited != citer:
            candidates[citer].append(cited)

    parent_of = {}
    for citer, cited in candidates.items():
        best = min(cited, key=lambda p: (abs(reduction_idx[citer] - reduction_idx[p]),
                                         years[p], ids[p]))
        parent_of[ids[citer]] = ids[best]
    return SkeletonTree(ids, ids[pioneer], parent_of)


def extract_skeleton(snapshot,
                     dense_limit=DENSE_LIMIT,            # type: int
                     truncation_rank=TRUNCATION_RANK,    # type: int
                     sample_threshold=SAMPLE_THRESHOLD,  # type: int
                     sample_sources=SAMPLE_SOURCES,      # type: int
                     seed=0,                             # type: int
                     avg_step_directed=True              # type: bool
                     ):
    # type: (...) -> SkeletonResult

    """Embed, measure, and reduce a snapshot to its skeleton tree."""
    embedding = embed(snapshot, dense_limit=dense_limit, truncation_rank=truncation_rank, seed=seed)
    distances = embedding if embedding.truncated else embed_dist(embedding)

    scales = graph_scales(snapshot, distances, directed=avg_step_directed,
                          sample_threshold=sample_threshold, sample_sources=sample_sources,
                          seed=seed)
    diff = diff_idx(snapshot, distances, scales, dense_limit=dense_limit)
    acyclic = cut_loops(snapshot, diff.reduction_idx)
    tree = prune_to_tree(acyclic, diff.reduction_idx, snapshot)

    logger.debug('Skeleton of %s: %r, %r', snapshot, tree, scales)
    return SkeletonResult(snapshot, tree, diff, scales, embedding.metadata())
