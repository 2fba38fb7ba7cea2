from unittest import TestCase
import math
import numpy as np
import scipy.linalg
import scipy.sparse as sp
from citation_thermo.entropy import stationary_left_vector, structure_entropy, transition_matrix, \
    von_neumann_entropy
from citation_thermo.errors import NumericalError
from citation_thermo.skeleton import SkeletonTree
from .fixtures import make_snapshot, random_strongly_connected


def stationary_oracle(transition):
    values, vectors = np.linalg.eig(transition.T)
    phi = np.real(vectors[:, np.argmin(np.abs(values - 1.0))])
    return phi / phi.sum()


def laplacian_trace_oracle(weights):
    """1 - tr(L^2) / m^2 for the symmetrized normalized Laplacian of a strongly connected graph."""
    m = weights.shape[0]
    transition = weights / weights.sum(axis=1, keepdims=True)
    phi = stationary_oracle(transition)
    root = np.diag(np.sqrt(phi))
    inv_root = np.diag(1.0 / np.sqrt(phi))
    laplacian = np.eye(m) - (root.dot(transition).dot(inv_root) +
                             inv_root.dot(transition.T).dot(root)) / 2.0
    return 1.0 - np.trace(laplacian.dot(laplacian)) / float(m * m)


def brute_structure_entropy(tree):
    """Structure entropy from explicit descendant sets."""
    num_edges = tree.num_edges

    def subtree(node):
        members = [node]
        for child in tree.children(node):
            members.extend(subtree(child))
        return members

    total = 0.0
    for child, parent in tree.parent_of.items():
        members = subtree(child)
        volume = sum(tree.degree(m) for m in members)
        total -= volume / (2.0 * num_edges) * math.log(len(members) / float(len(subtree(parent))))
    return total


class TestStructureEntropy(TestCase):
    def test_single_node(self):
        entropy = structure_entropy(SkeletonTree(['p'], 'p', {}))
        self.assertEqual(0.0, entropy.total)
        self.assertEqual({}, entropy.per_node)

    def test_root_and_child(self):
        entropy = structure_entropy(SkeletonTree(['p', 'a'], 'p', {'a': 'p'}))
        self.assertAlmostEqual(0.5 * math.log(2.0), entropy.total)
        self.assertAlmostEqual(0.3466, entropy.per_node['a'], places=4)
        self.assertNotIn('p', entropy.per_node)

    def test_binary_tree(self):
        parent_of = {'b': 'a', 'c': 'a', 'd': 'b', 'e': 'b', 'f': 'c', 'g': 'c'}
        tree = SkeletonTree('abcdefg', 'a', parent_of)
        entropy = structure_entropy(tree)
        self.assertAlmostEqual(brute_structure_entropy(tree), entropy.total)
        # a leaf: degree 1 of 12, subtree 1 of 3
        self.assertAlmostEqual(-(1.0 / 12.0) * math.log(1.0 / 3.0), entropy.per_node['d'])
        # an inner node: degree sum 5 of 12, subtree 3 of 7
        self.assertAlmostEqual(-(5.0 / 12.0) * math.log(3.0 / 7.0), entropy.per_node['b'])

    def test_forest(self):
        tree = SkeletonTree(['p', 'a', 'b', 'x', 'y'], 'p', {'a': 'p', 'b': 'a', 'y': 'x'})
        entropy = structure_entropy(tree)
        self.assertAlmostEqual(brute_structure_entropy(tree), entropy.total)
        self.assertEqual({'a', 'b', 'y'}, set(entropy.per_node))

    def test_log_base(self):
        tree = SkeletonTree(['p', 'a', 'b'], 'p', {'a': 'p', 'b': 'p'})
        natural = structure_entropy(tree).total
        self.assertAlmostEqual(natural / math.log(2.0), structure_entropy(tree, log_base=2).total)

    def test_nonnegative(self):
        rng = np.random.RandomState(3)
        for _ in range(30):
            n = int(rng.randint(2, 25))
            ids = ['n{:02d}'.format(i) for i in range(n)]
            parent_of = dict((ids[i], ids[int(rng.randint(0, i))]) for i in range(1, n))
            tree = SkeletonTree(ids, ids[0], parent_of)
            entropy = structure_entropy(tree)
            self.assertTrue(all(value >= 0 for value in entropy.per_node.values()))
            self.assertAlmostEqual(brute_structure_entropy(tree), entropy.total)


class TestStationaryVector(TestCase):
    def test_random_chains(self):
        rng = np.random.RandomState(17)
        for _ in range(10):
            weights = random_strongly_connected(rng, int(rng.randint(2, 9)))
            transition = transition_matrix(weights)
            phi = stationary_left_vector(transition)
            np.testing.assert_allclose(stationary_oracle(transition.toarray()), phi, atol=1e-9)
            self.assertAlmostEqual(1.0, phi.sum())

    def test_periodic_chain(self):
        # a star with two leaves alternates between hub and leaves
        transition = np.array([[0.0, 0.5, 0.5], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        with self.assertLogs('citation_thermo.entropy', level='WARNING'):
            phi = stationary_left_vector(transition)
        np.testing.assert_allclose([0.5, 0.25, 0.25], phi, atol=1e-10)

    def test_not_converged(self):
        transition = np.array([[0.0, 0.5, 0.5], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        with self.assertRaises(NumericalError):
            stationary_left_vector(transition, max_iterations=1, label='star')

    def test_transition_rows(self):
        transition = transition_matrix(np.array([[0.0, 2.0, 6.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
        np.testing.assert_allclose([[0.0, 0.25, 0.75], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
                                   transition.toarray())


class TestVonNeumannEntropy(TestCase):
    def test_symmetric_two_cycle(self):
        self.assertAlmostEqual(0.0, von_neumann_entropy(np.array([[0.0, 1.0], [1.0, 0.0]])))

    def test_dag_is_zero(self):
        snapshot = make_snapshot({'p': 2000, 'a': 2001, 'b': 2002}, [('p', 'a'), ('a', 'b'),
                                                                     ('p', 'b')])
        self.assertEqual(0.0, von_neumann_entropy(snapshot))

    def random_graphs(self, count=100):
        rng = np.random.RandomState(5)
        return [random_strongly_connected(rng, int(rng.randint(3, 9))) for _ in range(count)]

    def test_against_laplacian_trace(self):
        for weights in self.random_graphs():
            self.assertAlmostEqual(laplacian_trace_oracle(weights), von_neumann_entropy(weights),
                                   delta=1e-9)

    def test_trace_identity(self):
        for weights in self.random_graphs():
            m = weights.shape[0]
            transition = weights / weights.sum(axis=1, keepdims=True)
            phi = stationary_oracle(transition)
            lhs = m + 0.5 * (np.trace(transition.dot(transition)) +
                             np.trace(transition.dot(np.diag(1.0 / phi)).dot(transition.T)
                                      .dot(np.diag(phi))))
            self.assertAlmostEqual(m * m * (1.0 - laplacian_trace_oracle(weights)), lhs,
                                   delta=1e-9)

    def test_additive_over_components(self):
        rng = np.random.RandomState(13)
        first = random_strongly_connected(rng, 4)
        second = random_strongly_connected(rng, 5)
        combined = scipy.linalg.block_diag(first, second)
        # a one-way bridge joins the blocks without merging their components
        combined[0, 4] = 1.0
        expected = von_neumann_entropy(first) + von_neumann_entropy(second)
        self.assertAlmostEqual(expected, von_neumann_entropy(sp.csr_matrix(combined)))

    def test_bounded(self):
        rng = np.random.RandomState(21)
        for _ in range(10):
            value = von_neumann_entropy(random_strongly_connected(rng, int(rng.randint(3, 12))))
            self.assertGreaterEqual(value, 0.0)
            self.assertLess(value, 1.0)

    def test_weights_attribute(self):
        class Weighted(object):
            weights = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))

        self.assertAlmostEqual(0.0, von_neumann_entropy(Weighted()))
