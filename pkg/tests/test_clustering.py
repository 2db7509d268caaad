"""Tests for spectral clustering and the eigensolver wrapper."""

import numpy as np
import pytest

from homf.clustering import spectral_cluster, symmetric_eigen
from homf.evaluation import misclassification
from homf.exceptions import SingularKernelWarning


def _block_kernel(sizes, noise=0.0, seed=0):
    """Block-diagonal kernel from known memberships, optionally perturbed."""
    n = sum(sizes)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    H = np.zeros((n, len(sizes)))
    H[np.arange(n), labels] = 1.0
    if noise > 0:
        rng = np.random.default_rng(seed)
        H = np.clip(H + rng.uniform(0, noise, H.shape), 0, 1)
    G = H @ H.T
    return (G + G.T) / 2.0, labels


# ---------------------------------------------------------------------------
# symmetric_eigen
# ---------------------------------------------------------------------------


def test_eigen_identity():
    values, _ = symmetric_eigen(np.eye(3))
    assert np.allclose(values, 1.0)


def test_eigen_diagonal():
    values, vectors = symmetric_eigen(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(values, [1.0, 2.0, 3.0])
    assert np.allclose(np.abs(vectors), np.eye(3)[:, [1, 2, 0]])


def test_eigen_reconstruction():
    rng = np.random.default_rng(4)
    A = rng.normal(size=(6, 6))
    A = (A + A.T) / 2.0
    values, vectors = symmetric_eigen(A)
    recon = vectors @ np.diag(values) @ vectors.T
    assert np.linalg.norm(recon - A) < 1e-6 * max(1.0, np.linalg.norm(A))
    assert np.allclose(vectors.T @ vectors, np.eye(6), atol=1e-8)
    assert (np.diff(values) >= -1e-12).all()


def test_eigen_rejects_asymmetric():
    with pytest.raises(ValueError):
        symmetric_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))


# ---------------------------------------------------------------------------
# spectral_cluster
# ---------------------------------------------------------------------------


def test_exact_blocks_recovered():
    G, truth = _block_kernel([8, 12])
    labels = spectral_cluster(G, 2, seed=0)
    assert misclassification(labels, truth) == 0.0


def test_three_blocks_recovered():
    G, truth = _block_kernel([10, 7, 13])
    labels = spectral_cluster(G, 3, seed=1)
    assert misclassification(labels, truth) == 0.0


def test_single_cluster():
    G, _ = _block_kernel([9, 6])
    assert (spectral_cluster(G, 1, seed=0) == 0).all()


def test_noisy_two_line_kernel():
    # kernel built from ground-truth memberships plus 1% noise
    G, truth = _block_kernel([120, 80], noise=0.01, seed=3)
    labels = spectral_cluster(G, 2, seed=0)
    assert misclassification(labels, truth) <= 1.0


def test_permutation_invariance():
    G, truth = _block_kernel([15, 10], noise=0.05, seed=5)
    labels = spectral_cluster(G, 2, seed=7)
    rng = np.random.default_rng(9)
    perm = rng.permutation(len(truth))
    permuted = spectral_cluster(G[np.ix_(perm, perm)], 2, seed=7)
    undone = np.empty_like(permuted)
    undone[perm] = permuted
    assert misclassification(undone, labels) == 0.0


def test_deterministic_given_seed():
    G, _ = _block_kernel([20, 20], noise=0.2, seed=6)
    a = spectral_cluster(G, 2, seed=11)
    b = spectral_cluster(G, 2, seed=11)
    assert np.array_equal(a, b)


def test_isolated_vertices_assigned():
    G, truth = _block_kernel([8, 8])
    n = len(truth)
    G = np.pad(G, ((0, 2), (0, 2)))  # two isolated vertices, zero rows
    labels = spectral_cluster(G, 2, seed=0)
    assert labels.shape == (n + 2,)
    assert set(labels[-2:].tolist()) <= {0, 1}
    assert misclassification(labels[:n], truth) == 0.0


def test_rank_deficient_kernel_warns():
    H = np.ones((10, 1))
    G = H @ H.T
    with pytest.warns(SingularKernelWarning):
        spectral_cluster(G, 3, seed=0)


def test_validates_inputs():
    G, _ = _block_kernel([4, 4])
    with pytest.raises(ValueError):
        spectral_cluster(G, 0, seed=0)
    with pytest.raises(ValueError):
        spectral_cluster(G, 9, seed=0)
    with pytest.raises(ValueError):
        spectral_cluster(np.triu(np.ones((4, 4))), 2, seed=0)
