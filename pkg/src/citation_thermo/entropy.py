import logging
import math
import numpy as np
import scipy.sparse as sp
from typing import Dict, Optional, Union
from .errors import NumericalError
from .skeleton import SkeletonTree
from .topic_graph import TopicSnapshot, strongly_connected_components


logger = logging.getLogger(__name__)


#: L1 residual at which the stationary vector is accepted
POWER_TOLERANCE = 1e-12

#: Iteration budget of each phase (plain, then lazy) of the stationary solver
POWER_MAX_ITERATIONS = 100000

# Plain iteration is abandoned once a window fails to halve the residual
_STALL_WINDOW = 200


class StructureEntropy(object):
    """Per-node structure entropy of a skeleton tree. Roots are absent from `per_node`."""

    def __init__(self, per_node, total):
        # type: (Dict[str, float], float) -> None
        self.per_node = per_node
        self.total = total

    def __repr__(self):
        return 'StructureEntropy(total={:.6g}, nodes={})'.format(self.total, len(self.per_node))


def structure_entropy(tree, log_base=None):
    # type: (SkeletonTree, Optional[float]) -> StructureEntropy

    """
    S_u = -(g_u / 2|E|) log(V_u / V_parent(u)) for every non-root node u, where V_u is the node
    count of u's subtree and g_u the sum of the tree degrees inside it.
    :param log_base: Logarithm base; natural log when None.
    """
    num_edges = tree.num_edges
    if num_edges == 0:
        return StructureEntropy({}, 0.0)
    scale = 1.0 if log_base is None else math.log(log_base)

    size = {}  # type: Dict[str, int]
    cut = {}  # type: Dict[str, int]
    for component in tree.components:
        for node in reversed(component):
            children = tree.children(node)
            size[node] = 1 + sum(size[child] for child in children)
            cut[node] = tree.degree(node) + sum(cut[child] for child in children)

    per_node = {}
    for child, parent in tree.parent_of.items():
        ratio = size[child] / float(size[parent])
        per_node[child] = -(cut[child] / (2.0 * num_edges)) * math.log(ratio) / scale

    # fixed summation order keeps totals reproducible
    total = math.fsum(per_node[node] for node in sorted(per_node))
    return StructureEntropy(per_node, total)


def _weights_of(graph):
    # type: (object) -> sp.csr_matrix
    if isinstance(graph, TopicSnapshot):
        return graph.adjacency
    weights = getattr(graph, 'weights', graph)
    return sp.csr_matrix(weights, dtype=np.float64)


def transition_matrix(weights):
    # type: (Union[np.ndarray, sp.spmatrix]) -> sp.csr_matrix

    """Row-normalize a weight matrix by out-degree (row sum); empty rows stay zero."""
    weights = sp.csr_matrix(weights, dtype=np.float64)
    degree = np.asarray(weights.sum(axis=1)).ravel()
    inverse = np.zeros_like(degree)
    inverse[degree > 0] = 1.0 / degree[degree > 0]
    return sp.diags(inverse).dot(weights).tocsr()


def _iterate(step, phi, tolerance, max_iterations, stall_window=None):
    residual = float('inf')
    checkpoint = float('inf')
    for iteration in range(1, max_iterations + 1):
        updated = step(phi)
        updated /= updated.sum()
        residual = float(np.abs(updated - phi).sum())
        phi = updated
        if residual < tolerance:
            return phi, residual, iteration, True
        if stall_window and iteration % stall_window == 0:
            if residual > 0.5 * checkpoint:
                break
            checkpoint = residual
    return phi, residual, iteration, False


def stationary_left_vector(transition,
                           tolerance=POWER_TOLERANCE,             # type: float
                           max_iterations=POWER_MAX_ITERATIONS,   # type: int
                           label=None                             # type: object
                           ):
    # type: (...) -> np.ndarray

    """
    Left eigenvector phi of an irreducible row-stochastic matrix (phi P = phi, phi > 0,
    sum 1). Plain power iteration runs first; if it stalls (periodic chains) the lazy
    chain (I + P) / 2, whose stationary vector is the same, takes over.
    :param label: Identifies the component in error messages.
    :raises NumericalError: if neither iteration reaches `tolerance`.
    """
    transition_t = sp.csr_matrix(transition).T.tocsr()
    n = transition_t.shape[0]
    phi = np.full(n, 1.0 / n)

    phi, residual, iterations, converged = _iterate(
        transition_t.dot, phi, tolerance, max_iterations, stall_window=_STALL_WINDOW)
    if not converged:
        logger.warning('Power iteration stalled on component %s (residual %.3g); '
                       'switching to the lazy chain', label, residual)
        phi, residual, iterations, converged = _iterate(
            lambda x: 0.5 * (x + transition_t.dot(x)), phi, tolerance, max_iterations)
    if not converged:
        raise NumericalError('stationary vector of component {} did not converge '
                             '(residual {:.3g})'.format(label, residual))
    if (phi <= 0).any():
        raise NumericalError('stationary vector of component {} is not positive'.format(label))

    logger.debug('Stationary vector of component %s: %d iterations, residual %.3g',
                 label, iterations, residual)
    return phi


def _component_entropy(weights, label, tolerance, max_iterations):
    # type: (sp.csr_matrix, int, float, int) -> float
    m = weights.shape[0]
    if m == 1 and weights[0, 0] == 0:
        return 0.0

    transition = transition_matrix(weights)
    phi = stationary_left_vector(transition, tolerance=tolerance,
                                 max_iterations=max_iterations, label=label)

    coo = transition.tocoo()
    rows, cols, p = coo.row, coo.col, coo.data

    # bidirectional pairs, self-pairs excluded
    reverse = np.asarray(transition[cols, rows]).ravel()
    mutual = (rows != cols) & (reverse > 0)
    first = float(np.sum(p[mutual] * reverse[mutual]))

    second = float(np.sum(phi[rows] / phi[cols] * p ** 2))
    return 1.0 - 1.0 / m - (first + second) / (2.0 * m * m)


def von_neumann_entropy(graph,
                        tolerance=POWER_TOLERANCE,            # type: float
                        max_iterations=POWER_MAX_ITERATIONS   # type: int
                        ):
    # type: (...) -> float

    """
    Quadratic approximation of the von Neumann entropy of a weighted digraph, summed over its
    strongly connected components (degrees are taken inside each component).
    :param graph: A TopicSnapshot, anything with a `weights` matrix, or a square matrix
        where entry (u, v) is the weight of "v cites u".
    """
    weights = _weights_of(graph)
    total = 0.0
    for label, component in enumerate(strongly_connected_components(weights)):
        sub = weights[component][:, component]
        total += _component_entropy(sub.tocsr(), label, tolerance, max_iterations)
    return total
