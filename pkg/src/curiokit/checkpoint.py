"""Model checkpoints: a versioned JSON document with parameters, optimizer
state and free-form metadata.

Float values round-trip exactly (json uses shortest repr for doubles).
"""

import json
from dataclasses import dataclass

import numpy as np

from .autodiff import FLOAT

FORMAT_TAG = "curio-ckpt-v1"


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    params: dict  # name -> float64 ndarray
    optimizer: dict | None
    meta: dict


def _encode_array(arr):
    return {"shape": list(arr.shape), "values": [float(v) for v in arr.reshape(-1)]}


def _decode_array(doc, name):
    shape = tuple(doc["shape"])
    values = np.asarray(doc["values"], dtype=FLOAT)
    expected = int(np.prod(shape)) if shape else 1
    if values.size != expected:
        raise CheckpointError(f"{name}: value count does not match shape {shape}")
    return values.reshape(shape)


def save_checkpoint(path, params, optimizer=None, meta=None):
    """Write a checkpoint.  ``params`` maps name -> ndarray; ``optimizer``
    is an Adam state dict (or None); ``meta`` is any JSON-compatible dict."""
    doc = {
        "format": FORMAT_TAG,
        "meta": meta or {},
        "params": {name: _encode_array(np.asarray(a, dtype=FLOAT)) for name, a in params.items()},
    }
    if optimizer is not None:
        doc["optimizer"] = {
            "learning_rate": optimizer["learning_rate"],
            "beta1": optimizer["beta1"],
            "beta2": optimizer["beta2"],
            "eps": optimizer["eps"],
            "step_count": optimizer["step_count"],
            "m": {k: _encode_array(np.asarray(v, dtype=FLOAT)) for k, v in optimizer["m"].items()},
            "v": {k: _encode_array(np.asarray(v, dtype=FLOAT)) for k, v in optimizer["v"].items()},
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_checkpoint(path):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    tag = doc.get("format")
    if tag != FORMAT_TAG:
        raise CheckpointError(f"unsupported checkpoint format: {tag!r}")
    params = {name: _decode_array(d, name) for name, d in doc["params"].items()}
    optimizer = None
    if "optimizer" in doc:
        o = doc["optimizer"]
        optimizer = {
            "learning_rate": o["learning_rate"],
            "beta1": o["beta1"],
            "beta2": o["beta2"],
            "eps": o["eps"],
            "step_count": o["step_count"],
            "m": {k: _decode_array(d, k) for k, d in o["m"].items()},
            "v": {k: _decode_array(d, k) for k, d in o["v"].items()},
        }
    return Checkpoint(params=params, optimizer=optimizer, meta=doc.get("meta", {}))
