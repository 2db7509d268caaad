"""Shared synthetic-data generators used as oracles across the suite."""

from __future__ import annotations

import numpy as np
import pytest


def make_homography_correspondences(H, n, seed, noise=0.0, box=(0.0, 100.0)):
    """Exact (or noisy) correspondences under a known homography."""
    rng = np.random.default_rng(seed)
    p1 = rng.uniform(box[0], box[1], size=(n, 2))
    hom = np.column_stack([p1, np.ones(n)]) @ np.asarray(H).T
    p2 = hom[:, :2] / hom[:, 2:3]
    if noise > 0:
        p2 = p2 + rng.normal(0.0, noise, size=p2.shape)
    return np.column_stack([p1, p2])


def make_camera_pair(n, seed, noise=0.0):
    """Correspondences from a synthetic two-view camera rig.

    Returns (correspondences, F) where F is the fundamental matrix computed
    analytically from the rig (unit Frobenius norm).
    """
    rng = np.random.default_rng(seed)
    K = np.array([[800.0, 0.0, 320.0], [0.0, 800.0, 240.0], [0.0, 0.0, 1.0]])
    angle = 0.0872
    R = np.array(
        [
            [np.cos(angle), 0.0, np.sin(angle)],
            [0.0, 1.0, 0.0],
            [-np.sin(angle), 0.0, np.cos(angle)],
        ]
    )
    t = np.array([1.0, 0.2, 0.1])
    P1 = K @ np.hstack([np.eye(3), np.zeros((3, 1))])
    P2 = K @ np.hstack([R, t[:, None]])
    X = np.column_stack(
        [
            rng.uniform(-2, 2, n),
            rng.uniform(-2, 2, n),
            rng.uniform(4, 8, n),
            np.ones(n),
        ]
    )
    x1 = X @ P1.T
    x1 = x1[:, :2] / x1[:, 2:3]
    x2 = X @ P2.T
    x2 = x2[:, :2] / x2[:, 2:3]
    if noise > 0:
        x1 = x1 + rng.normal(0.0, noise, x1.shape)
        x2 = x2 + rng.normal(0.0, noise, x2.shape)
    t_cross = np.array([[0, -t[2], t[1]], [t[2], 0, -t[0]], [-t[1], t[0], 0]])
    F = np.linalg.inv(K).T @ t_cross @ R @ np.linalg.inv(K)
    return np.column_stack([x1, x2]), F / np.linalg.norm(F)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
