import datetime
import logging
import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from typing import Iterable, List, Sequence, Tuple, Union
from .errors import EmptySnapshot, NodeNotFound, ValidationError


logger = logging.getLogger(__name__)


#: Stored edge orientation: (cited, citer), i.e. knowledge flows cited -> citer.
EdgeType = Tuple[str, str]

GraphLike = Union['TopicSnapshot', sp.spmatrix]


class PaperNode(object):
    """
    A single article of a topic. Immutable once built.
    """

    #: Earliest publication year accepted
    MIN_YEAR = 1800

    __slots__ = ('_id', '_year', '_is_pioneer', '_title')

    def __init__(self,
                 ident,             # type: str
                 year,              # type: int
                 is_pioneer=False,  # type: bool
                 title=None         # type: str
                 ):
        # type: (...) -> None

        """
        :param ident: Opaque identifier of the article. Converted with str(ident).
        :param year: Publication year.
        :param is_pioneer: True for the article that founded the topic.
        :param title: Optional title; metadata only.
        """
        if isinstance(year, float) and not year.is_integer():
            raise ValidationError('year {!r} is not an integer'.format(year), record=ident)
        try:
            year = int(year)
        except (TypeError, ValueError, OverflowError):
            raise ValidationError('year {!r} is not an integer'.format(year), record=ident)
        max_year = datetime.date.today().year + 1
        if not self.MIN_YEAR <= year <= max_year:
            raise ValidationError(
                'year {} outside [{}, {}]'.format(year, self.MIN_YEAR, max_year), record=ident)

        self._id = str(ident)
        self._year = year
        self._is_pioneer = bool(is_pioneer)
        self._title = title

    @property
    def id(self):
        # type: () -> str
        return self._id

    @property
    def year(self):
        # type: () -> int
        return self._year

    @property
    def is_pioneer(self):
        # type: () -> bool
        return self._is_pioneer

    @property
    def title(self):
        # type: () -> str
        return self._title

    def __eq__(self, other):
        if not isinstance(other, PaperNode):
            return NotImplemented
        return (self._id, self._year, self._is_pioneer, self._title) == \
               (other._id, other._year, other._is_pioneer, other._title)

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash((self._id, self._year, self._is_pioneer))

    def __str__(self):
        return 'Paper<{}>'.format(self._id)

    def __repr__(self):
        return '{class_name}({id!r}, {year}, is_pioneer={pioneer})'.format(
            class_name=self.__class__.__name__,
            id=self._id,
            year=self._year,
            pioneer=self._is_pioneer
        )


class TopicSnapshot(object):
    """
    The citation graph of a topic restricted to articles published up to `timestamp`.

    Node ids are mapped to dense indices in sorted-id order; every matrix produced by this
    package is addressed through that mapping. `adjacency[u, v] == 1` iff v cites u.
    """

    def __init__(self,
                 nodes,          # type: Iterable[PaperNode]
                 edges,          # type: Iterable[EdgeType]
                 timestamp=None  # type: int
                 ):
        # type: (...) -> None

        """
        :param nodes: The articles of the snapshot. Exactly one must be the pioneer.
        :param edges: (cited, citer) id pairs. Duplicates are collapsed; self-citations
            and pairs naming undeclared articles are rejected.
        :param timestamp: Snapshot year. Defaults to the latest publication year.
        """
        nodes = sorted(nodes, key=lambda node: node.id)
        self._nodes = tuple(nodes)
        self._ids = tuple(node.id for node in nodes)
        self._index = {}
        for i, node in enumerate(nodes):
            if node.id in self._index:
                raise ValidationError('duplicate node id', record=node.id)
            self._index[node.id] = i

        pioneers = [i for i, node in enumerate(nodes) if node.is_pioneer]
        if len(pioneers) != 1:
            raise ValidationError('expected exactly one pioneer, found {}'.format(len(pioneers)))
        self._pioneer_index = pioneers[0]

        self._years = np.array([node.year for node in nodes], dtype=np.int64)
        if timestamp is None:
            timestamp = int(self._years.max())
        self._timestamp = int(timestamp)
        late = [node.id for node in nodes if node.year > self._timestamp]
        if late:
            raise ValidationError(
                'published after snapshot year {}'.format(self._timestamp), record=late[0])

        pairs = set()
        for cited, citer in edges:
            cited, citer = str(cited), str(citer)
            if cited == citer:
                raise ValidationError('self-citation', record=cited)
            try:
                pairs.add((self._index[cited], self._index[citer]))
            except KeyError:
                missing = cited if cited not in self._index else citer
                raise ValidationError('edge endpoint not declared', record=missing)

        n = len(nodes)
        if pairs:
            rows, cols = (np.array(a, dtype=np.int64) for a in zip(*sorted(pairs)))
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
        self._adjacency = sp.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(n, n), dtype=np.float64)
        self._adjacency.sort_indices()

    @property
    def nodes(self):
        # type: () -> Tuple[PaperNode, ...]
        return self._nodes

    @property
    def ids(self):
        # type: () -> Tuple[str, ...]
        return self._ids

    @property
    def years(self):
        # type: () -> np.ndarray
        return self._years

    @property
    def timestamp(self):
        # type: () -> int
        return self._timestamp

    @property
    def adjacency(self):
        # type: () -> sp.csr_matrix

        """Boolean-valued (0/1 floats) sparse matrix, A[u, v] == 1 iff v cites u."""
        return self._adjacency

    @property
    def pioneer(self):
        # type: () -> PaperNode
        return self._nodes[self._pioneer_index]

    @property
    def pioneer_index(self):
        # type: () -> int
        return self._pioneer_index

    @property
    def num_nodes(self):
        # type: () -> int
        return len(self._nodes)

    @property
    def num_edges(self):
        # type: () -> int
        return int(self._adjacency.nnz)

    def __len__(self):
        return len(self._nodes)

    def __contains__(self, node_id):
        return str(node_id) in self._index

    def index_of(self, node_id):
        # type: (str) -> int
        try:
            return self._index[str(node_id)]
        except KeyError:
            raise NodeNotFound('node {} not in snapshot {}'.format(node_id, self._timestamp))

    def node(self, node_id):
        # type: (str) -> PaperNode
        return self._nodes[self.index_of(node_id)]

    def edge_indices(self):
        # type: () -> Tuple[np.ndarray, np.ndarray]

        """(cited, citer) index arrays of every edge, in row-major order."""
        coo = self._adjacency.tocoo()
        return coo.row.astype(np.int64), coo.col.astype(np.int64)

    def edges(self):
        # type: () -> List[EdgeType]
        rows, cols = self.edge_indices()
        return [(self._ids[u], self._ids[v]) for u, v in zip(rows, cols)]

    def parents(self, index):
        # type: (int) -> np.ndarray

        """Indices of the articles cited by the article at `index`."""
        column = self._adjacency.getcol(index)
        return np.sort(column.nonzero()[0])

    def citers(self, index):
        # type: (int) -> np.ndarray

        """Indices of the articles citing the article at `index`."""
        row = self._adjacency.getrow(index)
        return np.sort(row.nonzero()[1])

    def citation_counts(self):
        # type: () -> np.ndarray

        """In-topic citation count of every node (row sums of the adjacency)."""
        return np.asarray(self._adjacency.sum(axis=1)).ravel()

    def __str__(self):
        return 'TopicSnapshot<{}@{}>'.format(self.pioneer.id, self._timestamp)

    def __repr__(self):
        return '{class_name}(pioneer={pioneer!r}, t={t}, nodes={n}, edges={e})'.format(
            class_name=self.__class__.__name__,
            pioneer=self.pioneer.id,
            t=self._timestamp,
            n=self.num_nodes,
            e=self.num_edges
        )


def build_snapshot(full_graph, t):
    # type: (TopicSnapshot, int) -> TopicSnapshot

    """
    Restrict a topic graph to the articles published no later than year `t`.
    :raises EmptySnapshot: if `t` precedes the pioneer's publication year.
    """
    t = int(t)
    if t < full_graph.pioneer.year:
        raise EmptySnapshot('year {} precedes pioneer year {}'.format(t, full_graph.pioneer.year),
                            record=full_graph.pioneer.id)

    keep = full_graph.years <= t
    nodes = [node for node, kept in zip(full_graph.nodes, keep) if kept]
    ids = full_graph.ids
    rows, cols = full_graph.edge_indices()
    mask = keep[rows] & keep[cols]
    edges = [(ids[u], ids[v]) for u, v in zip(rows[mask], cols[mask])]

    logger.debug('Snapshot %s@%d: %d/%d nodes, %d edges',
                 full_graph.pioneer.id, t, len(nodes), full_graph.num_nodes, len(edges))
    return TopicSnapshot(nodes, edges, timestamp=t)


def out_degree(snapshot, node_id):
    # type: (TopicSnapshot, str) -> int

    """
    Number of papers citing `node_id` within the snapshot.
    :raises NodeNotFound: for an id absent from the snapshot.
    """
    index = snapshot.index_of(node_id)
    return int(snapshot.adjacency.getrow(index).nnz)


def _as_matrix(graph):
    # type: (GraphLike) -> sp.csr_matrix
    if isinstance(graph, TopicSnapshot):
        return graph.adjacency
    return sp.csr_matrix(graph)


def _components(matrix, connection):
    # type: (sp.csr_matrix, str) -> List[np.ndarray]
    if matrix.shape[0] == 0:
        return []
    _, labels = csgraph.connected_components(matrix, directed=True, connection=connection)
    order = np.argsort(labels, kind='stable')
    groups = np.split(order, np.flatnonzero(np.diff(labels[order])) + 1)
    # label order depends on traversal; sort on the smallest member for determinism
    groups.sort(key=lambda members: members[0])
    return groups


def strongly_connected_components(graph):
    # type: (GraphLike) -> List[np.ndarray]

    """
    Partition the nodes of a snapshot (or of a square sparse weight matrix) into strongly
    connected components.
    :return: List of sorted index arrays, ordered by their smallest index.
    """
    return _components(_as_matrix(graph), 'strong')


def weakly_connected_components(graph):
    # type: (GraphLike) -> List[np.ndarray]
    return _components(_as_matrix(graph), 'weak')


def snapshot_years(full_graph, years=None, stride=1):
    # type: (TopicSnapshot, Sequence[int], int) -> List[int]

    """
    Choose the snapshot years of a topic: the explicit `years` when given, otherwise
    every `stride` years from the first year with at least two articles up to the last
    publication year (which is always included).
    """
    first_year = int(full_graph.pioneer.year)
    last_year = int(full_graph.years.max())
    ordered = np.sort(full_graph.years)
    if len(ordered) >= 2:
        first_year = max(first_year, int(ordered[1]))

    if years:
        chosen = sorted(set(int(y) for y in years if first_year <= int(y)))
    else:
        chosen = list(range(first_year, last_year + 1, max(1, int(stride))))
        if chosen and chosen[-1] != last_year:
            chosen.append(last_year)
    return chosen


def adjacency_with_pioneer_loop(snapshot):
    # type: (TopicSnapshot) -> sp.csr_matrix

    """The adjacency with a self-loop added on the pioneer (the pioneer is its own parent)."""
    n = snapshot.num_nodes
    p = snapshot.pioneer_index
    loop = sp.csr_matrix(([1.0], ([p], [p])), shape=(n, n))
    return (snapshot.adjacency + loop).tocsr()
