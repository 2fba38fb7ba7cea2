import logging
import numpy as np
import psutil
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg
from scipy.spatial.distance import pdist, squareform
from typing import Any, Dict, Union
from .errors import NumericalError
from .topic_graph import TopicSnapshot, adjacency_with_pioneer_loop


logger = logging.getLogger(__name__)


#: Largest topic decomposed densely (all eigenpairs)
DENSE_LIMIT = 5000

#: Number of smallest-eigenvalue eigenvectors kept above DENSE_LIMIT
TRUNCATION_RANK = 512

#: Working copies a dense symmetric eigensolve needs, in units of one n x n float matrix
_DENSE_FOOTPRINT = 4


class SpectralEmbedding(object):
    """
    Eigen-decomposition of a snapshot's (symmetrized) normalized Laplacian. `vectors` holds the
    unit eigenvectors as columns; row u of `coordinates` is the embedding of node u.
    """

    def __init__(self,
                 laplacian,        # type: Union[np.ndarray, sp.spmatrix]
                 eigenvalues,      # type: np.ndarray
                 vectors,          # type: np.ndarray
                 truncated=False   # type: bool
                 ):
        # type: (...) -> None
        self.laplacian = laplacian
        self.eigenvalues = eigenvalues
        self.vectors = vectors
        self.truncated = truncated

    @property
    def coordinates(self):
        # type: () -> np.ndarray

        """Eigenvectors weighted by 1 - eigenvalue; nodes with identical neighbourhoods coincide."""
        return self.vectors * (1.0 - self.eigenvalues)

    @property
    def rank(self):
        # type: () -> int
        return self.vectors.shape[1]

    def metadata(self):
        # type: () -> Dict[str, Any]
        return {
            'nodes': int(self.vectors.shape[0]),
            'rank': int(self.rank),
            'truncated': bool(self.truncated),
            'symmetrized': True,
            'weighting': '1 - eigenvalue',
        }


def normalized_laplacian(snapshot, dense=True):
    # type: (TopicSnapshot, bool) -> Union[np.ndarray, sp.csr_matrix]

    """
    D^-1/2 (D - A') D^-1/2, where A' is the adjacency with a self-loop on the pioneer and
    D holds the row sums of A'. Rows and columns of nodes nobody cites are zero.
    :param dense: Return a numpy array (default) or a sparse CSR matrix.
    """
    n = snapshot.num_nodes
    adjacency = adjacency_with_pioneer_loop(snapshot)

    degree = np.asarray(adjacency.sum(axis=1)).ravel()
    inv_sqrt = np.zeros(n)
    cited = degree > 0
    inv_sqrt[cited] = 1.0 / np.sqrt(degree[cited])
    scaling = sp.diags(inv_sqrt)

    laplacian = (scaling @ (sp.diags(degree) - adjacency) @ scaling).tocsr()
    return laplacian.toarray() if dense else laplacian


def _fix_signs(vectors):
    # type: (np.ndarray) -> np.ndarray

    """Flip every eigenvector so its largest-magnitude component is positive."""
    if vectors.size == 0:
        return vectors
    top = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[top, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def dense_fits_in_memory(n):
    # type: (int) -> bool
    needed = _DENSE_FOOTPRINT * 8 * n * n
    return needed < psutil.virtual_memory().available


def embed(snapshot, dense_limit=DENSE_LIMIT, truncation_rank=TRUNCATION_RANK, seed=0):
    # type: (TopicSnapshot, int, int, int) -> SpectralEmbedding

    """
    Full spectral decomposition of the symmetrized normalized Laplacian.

    Topics larger than `dense_limit` (or too large for the memory currently available)
    keep only the `truncation_rank` smallest-eigenvalue eigenvectors; the returned
    embedding reports this through its `truncated` flag.
    :raises NumericalError: if the eigensolver fails.
    """
    n = snapshot.num_nodes
    laplacian = normalized_laplacian(snapshot, dense=False)
    symmetric = ((laplacian + laplacian.T) * 0.5).tocsr()

    truncate = n > dense_limit
    if not truncate and not dense_fits_in_memory(n):
        logger.warning('Not enough memory for a dense %dx%d eigensolve; truncating', n, n)
        truncate = True
    rank = min(int(truncation_rank), n - 1)
    if truncate and rank < 1:
        truncate = False

    try:
        if not truncate:
            dense = symmetric.toarray()
            values, vectors = scipy.linalg.eigh(dense)
            stored = laplacian.toarray()
        else:
            logger.warning('Truncating spectral embedding of %s to %d of %d eigenvectors',
                           snapshot, rank, n)
            start = np.random.RandomState(seed).rand(n)
            values, vectors = scipy.sparse.linalg.eigsh(symmetric, k=rank, which='SA', v0=start)
            order = np.argsort(values, kind='stable')
            values, vectors = values[order], vectors[:, order]
            stored = laplacian
    except (np.linalg.LinAlgError, scipy.sparse.linalg.ArpackError, ValueError) as e:
        raise NumericalError('spectral decomposition of {} failed: {}'.format(snapshot, e))

    logger.debug('Embedded %s: rank %d, smallest eigenvalue %.3g', snapshot, vectors.shape[1],
                 values[0] if len(values) else float('nan'))
    return SpectralEmbedding(stored, values, _fix_signs(vectors), truncated=truncate)


def embed_dist(embedding):
    # type: (SpectralEmbedding) -> np.ndarray

    """Pairwise Euclidean distances between the embedding coordinates of all nodes (|V| x |V|)."""
    return squareform(pdist(embedding.coordinates, metric='euclidean'))


def edge_embed_dist(embedding, rows, cols):
    # type: (SpectralEmbedding, np.ndarray, np.ndarray) -> np.ndarray

    """EmbedDist for the listed node pairs only; used when the full matrix is too big."""
    coordinates = embedding.coordinates
    return np.linalg.norm(coordinates[rows] - coordinates[cols], axis=1)
