import numpy as np
from citation_thermo.topic_graph import PaperNode, TopicSnapshot


def make_snapshot(years, edges, pioneer=None, timestamp=None):
    """
    :param years: node id -> publication year.
    :param edges: (cited, citer) pairs.
    :param pioneer: Pioneer id; defaults to the oldest node (ties by id).
    """
    if pioneer is None:
        pioneer = min(years, key=lambda node_id: (years[node_id], node_id))
    nodes = [PaperNode(node_id, year, is_pioneer=(node_id == pioneer))
             for node_id, year in years.items()]
    return TopicSnapshot(nodes, edges, timestamp=timestamp)


def node_name(i):
    return 'n{:02d}'.format(i)


def random_digraph(rng, n, density=0.3):
    """Random (cited, citer) pairs among n nodes, self-pairs excluded."""
    mask = rng.rand(n, n) < density
    np.fill_diagonal(mask, False)
    return [(node_name(u), node_name(v)) for u, v in zip(*np.nonzero(mask))]


def random_citation_dag(rng, n, density=0.25, mutual_pairs=0, first_year=2000, per_year=4):
    """
    Every paper cites at least one earlier paper (so the pioneer reaches everything), plus
    random extra earlier citations and `mutual_pairs` citations back to a later paper.
    """
    years = {node_name(i): first_year + i // per_year for i in range(n)}
    edges = set()
    for v in range(1, n):
        edges.add((node_name(int(rng.randint(0, v))), node_name(v)))
        for u in range(v):
            if rng.rand() < density:
                edges.add((node_name(u), node_name(v)))
    dag = sorted(edges)
    for _ in range(mutual_pairs):
        cited, citer = dag[int(rng.randint(0, len(dag)))]
        if cited != node_name(0):
            edges.add((citer, cited))
    return years, sorted(edges)


def random_strongly_connected(rng, n, density=0.4):
    """Weighted adjacency of a strongly connected digraph: a Hamiltonian cycle plus extras."""
    weights = np.zeros((n, n))
    order = rng.permutation(n)
    for i in range(n):
        weights[order[i], order[(i + 1) % n]] = 0.5 + rng.rand()
    extra = (rng.rand(n, n) < density) & (weights == 0)
    np.fill_diagonal(extra, False)
    weights[extra] = 0.5 + rng.rand(int(extra.sum()))
    return weights


def reachability(adjacency):
    """Boolean transitive closure (reflexive) of a dense adjacency matrix."""
    n = adjacency.shape[0]
    reach = (np.asarray(adjacency) > 0) | np.eye(n, dtype=bool)
    for k in range(n):
        reach = reach | (reach[:, [k]] & reach[[k], :])
    return reach
