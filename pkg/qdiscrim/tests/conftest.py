import json

import numpy as np
import pytest

from app.quantum.channels import channel_to_json, dephasing, two_pauli
from app.quantum.rng import make_rng


@pytest.fixture
def rng():
    return make_rng(1234)


@pytest.fixture
def two_pauli_half():
    return two_pauli(0.5)


def random_hermitian(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2


@pytest.fixture
def hermitian_factory(rng):
    return lambda dim: random_hermitian(rng, dim)


@pytest.fixture
def channel_file(tmp_path):
    path = tmp_path / "dephasing.json"
    path.write_text(json.dumps(channel_to_json(dephasing(0.7))))
    return path


@pytest.fixture
def broken_channel_file(tmp_path):
    spec = channel_to_json(dephasing(0.7))
    # sqrt(1.1) I instead of sqrt(0.7) I: sum A^dagger A = 1.4 I
    root = float(np.sqrt(1.1))
    spec["operators"][0] = [[[root, 0.0], [0.0, 0.0]], [[0.0, 0.0], [root, 0.0]]]
    spec["name"] = "broken"
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(spec))
    return path
