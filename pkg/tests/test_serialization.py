import logging

import numpy as np
import pytest
import yaml

from conftest import random_network
from errors import InvariantViolationError, SerializationError
from model import load_network, save_network


def test_save_load_is_exact(tmp_path):
    net = random_network((12, 5, 3), seed=4)
    net.metadata = {"depth": 2, "usage": [[1, 2, 3, 4, 5], [7, 8, 9]]}
    path = tmp_path / "net.yaml"
    save_network(str(path), net, {"seed": 4})
    loaded = load_network(str(path))
    assert loaded.widths == net.widths
    for a, b in zip(loaded.phi, net.phi):
        assert np.array_equal(a, b)
    assert np.array_equal(loaded.r, net.r)
    assert loaded.metadata == net.metadata


def test_equal_networks_give_equal_files(tmp_path):
    net = random_network((8, 3), seed=1)
    save_network(str(tmp_path / "a.yaml"), net)
    save_network(str(tmp_path / "b.yaml"), net.copy())
    assert (tmp_path / "a.yaml").read_bytes() == (tmp_path / "b.yaml").read_bytes()


def _document(tmp_path):
    path = tmp_path / "net.yaml"
    save_network(str(path), random_network((4, 2), seed=2))
    return path, yaml.safe_load(path.read_text())


def test_off_simplex_column_is_an_invariant_violation(tmp_path):
    path, doc = _document(tmp_path)
    doc["layers"][0]["columns"][1] = [0.3, 0.3, 0.2, 0.1]
    path.write_text(yaml.safe_dump(doc))
    with pytest.raises(InvariantViolationError):
        load_network(str(path))


def test_unknown_version_is_rejected(tmp_path):
    path, doc = _document(tmp_path)
    doc["version"] = 2
    path.write_text(yaml.safe_dump(doc))
    with pytest.raises(SerializationError):
        load_network(str(path))


def test_width_mismatch_is_rejected(tmp_path):
    path, doc = _document(tmp_path)
    doc["widths"] = [4, 3]
    path.write_text(yaml.safe_dump(doc))
    with pytest.raises(SerializationError) as info:
        load_network(str(path))
    assert not isinstance(info.value, InvariantViolationError)


def test_unknown_keys_are_ignored_with_a_warning(tmp_path, caplog):
    path, doc = _document(tmp_path)
    doc["comment"] = "hand edited"
    path.write_text(yaml.safe_dump(doc))
    with caplog.at_level(logging.WARNING):
        net = load_network(str(path))
    assert net.widths == (4, 2)
    assert "comment" in caplog.text


def test_missing_file_is_a_serialization_error(tmp_path):
    with pytest.raises(SerializationError):
        load_network(str(tmp_path / "absent.yaml"))
