"""
Test configuration and fixtures for the Random Walk Initialization toolkit
"""

import gzip
import os
import sys

import numpy as np
import pytest
import structlog

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from data_io import encode_idx
from deep_net import OutputActivation, init_network
from numeric_core import Rng


@pytest.fixture(autouse=True)
def _reset_structlog():
    """Drop logging config bound to a test's captured stream once it closes"""
    yield
    structlog.reset_defaults()


@pytest.fixture
def rng():
    """Seeded stream shared by a single test"""
    return Rng(12345)


@pytest.fixture
def small_tanh_net():
    """tanh network with widths [5, 4, 3] and a softmax output"""
    return init_network([5, 4, 3], 1.1, "tanh", OutputActivation.SOFTMAX, seed=7)


@pytest.fixture
def idx_cube_bytes():
    """Hand-encoded 2x2x2 unsigned-byte IDX tensor holding 1..8"""
    header = bytes([0x00, 0x00, 0x08, 0x03])
    dims = bytes([0, 0, 0, 2]) * 3
    return header + dims + bytes(range(1, 9))


@pytest.fixture
def mnist_dir(tmp_path):
    """Tiny MNIST-shaped directory: 40 gzipped training images and labels"""
    generator = np.random.default_rng(3)
    images = generator.integers(0, 256, size=(40, 28, 28), dtype=np.uint8)
    labels = (np.arange(40) % 10).astype(np.uint8)
    (tmp_path / "train-images-idx3-ubyte.gz").write_bytes(gzip.compress(encode_idx(images)))
    (tmp_path / "train-labels-idx1-ubyte.gz").write_bytes(gzip.compress(encode_idx(labels)))
    return tmp_path
