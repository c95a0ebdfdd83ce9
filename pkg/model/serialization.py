"""
Network files: versioned YAML with explicit widths, one list per Phi column.

    format: gbn-network
    version: 1
    widths: [V, K_1, ..., K_T]
    gamma0: ...
    c0: ...
    r: [...]
    layers:
      - columns: [[phi_1k ...], ...]   # K_t columns of length K_{t-1}
    metadata: {...}
    config: {...}                      # resolved run configuration

Floats are written with `repr`, so a load reproduces every value exactly.
Nothing time-dependent is written, so equal networks give equal files.
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import yaml

from errors import InvariantViolationError, ModelError, SerializationError
from model.network import Network

logger = logging.getLogger(__name__)

FORMAT_NAME = "gbn-network"
FORMAT_VERSION = 1
KNOWN_KEYS = ("format", "version", "widths", "gamma0", "c0", "r", "layers", "metadata", "config")


def to_plain(value: Any) -> Any:
    """Convert numpy scalars and arrays (nested in dicts/lists) to YAML-safe Python values."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    return value


def network_document(network: Network, config_echo: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "widths": list(network.widths),
        "gamma0": float(network.gamma0),
        "c0": float(network.c0),
        "r": network.r.tolist(),
        "layers": [{"columns": phi.T.tolist()} for phi in network.phi],
        "metadata": to_plain(network.metadata),
        "config": to_plain(config_echo or {}),
    }


def save_network(path: str, network: Network, config_echo: Optional[Dict[str, Any]] = None) -> None:
    """Write `network` (and the run configuration it came from) to `path`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = yaml.safe_dump(network_document(network, config_echo), sort_keys=False, default_flow_style=None, width=1000)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Saved depth-{network.depth} network with widths {network.widths} to {path}")


def _require(doc: Dict[str, Any], key: str, path: Path):
    if key not in doc:
        raise SerializationError(f"{path}: missing field {key!r}")
    return doc[key]


def load_network(path: str) -> Network:
    """
    Read a network file.

    Raises:
        SerializationError: unreadable file, wrong format or version, or
            dimensions that disagree with the stated widths
        InvariantViolationError: a Phi column off the simplex, or r not positive
    """
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise SerializationError(f"cannot read network file {path}: {e}") from e
    except yaml.YAMLError as e:
        raise SerializationError(f"{path} is not valid YAML: {e}") from e
    if not isinstance(doc, dict):
        raise SerializationError(f"{path} does not hold a network document")
    if doc.get("format") != FORMAT_NAME:
        raise SerializationError(f"{path}: format {doc.get('format')!r}, expected {FORMAT_NAME!r}")
    if doc.get("version") != FORMAT_VERSION:
        raise SerializationError(f"{path}: version {doc.get('version')!r} is not supported (expected {FORMAT_VERSION})")
    unknown = [k for k in doc if k not in KNOWN_KEYS]
    if unknown:
        logger.warning(f"Ignoring unknown fields in {path}: {', '.join(map(str, unknown))}")

    widths = [int(w) for w in _require(doc, "widths", path)]
    layers = _require(doc, "layers", path)
    if len(widths) < 2 or len(layers) != len(widths) - 1:
        raise SerializationError(f"{path}: {len(layers)} layers do not match widths {widths}")
    phi = []
    for t, layer in enumerate(layers, start=1):
        try:
            columns = np.asarray(layer["columns"], dtype=float)
        except (KeyError, TypeError, ValueError) as e:
            raise SerializationError(f"{path}: layer {t} has no readable columns") from e
        if columns.shape != (widths[t], widths[t - 1]):
            raise SerializationError(
                f"{path}: layer {t} holds {columns.shape} values, widths say {widths[t]} columns of {widths[t - 1]}"
            )
        phi.append(columns.T.copy())
    try:
        r = np.asarray(_require(doc, "r", path), dtype=float)
    except (TypeError, ValueError) as e:
        raise SerializationError(f"{path}: r is not a list of numbers") from e
    if r.shape != (widths[-1],):
        raise SerializationError(f"{path}: r has {r.size} entries, widths say {widths[-1]}")

    try:
        network = Network(
            phi=phi,
            r=r,
            gamma0=float(_require(doc, "gamma0", path)),
            c0=float(_require(doc, "c0", path)),
            metadata=dict(doc.get("metadata") or {}),
        )
    except ModelError as e:
        raise InvariantViolationError(f"{path}: {e}") from e
    logger.info(f"Loaded depth-{network.depth} network with widths {network.widths} from {path}")
    return network
