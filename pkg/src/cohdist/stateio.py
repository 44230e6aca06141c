"""JSON state files.

Schema: {"kind": "pure"|"mixed", "dim": d, "data": ...} where data is
a list of [re, im] pairs for pure states and a d x d nested array of
such pairs for mixed ones.  Floats are serialized with Python's repr,
which round-trips exactly.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import InvalidStateFile
from .linalg import DensityMatrix, StateVector


def _pairs_to_complex(data, shape):
    arr = np.asarray(data, dtype=np.float64)
    if arr.shape != shape + (2,):
        raise InvalidStateFile(
            "data has shape %s, expected %s" % (arr.shape, shape + (2,))
        )
    return arr[..., 0] + 1j * arr[..., 1]


def _complex_to_pairs(arr):
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def state_from_json(obj):
    """Build a validated state from a decoded state-file object."""
    if not isinstance(obj, dict):
        raise InvalidStateFile("state file root must be an object")
    kind = obj.get("kind")
    if kind not in ("pure", "mixed"):
        raise InvalidStateFile("kind must be 'pure' or 'mixed', got %r" % (kind,))
    try:
        dim = int(obj["dim"])
    except (KeyError, TypeError, ValueError):
        raise InvalidStateFile("missing or non-integer dim") from None
    if dim < 1:
        raise InvalidStateFile("dim must be positive")
    if "data" not in obj:
        raise InvalidStateFile("missing data")
    try:
        if kind == "pure":
            amps = _pairs_to_complex(obj["data"], (dim,))
            return StateVector(amps)
        mat = _pairs_to_complex(obj["data"], (dim, dim))
        return DensityMatrix(mat)
    except InvalidStateFile:
        raise
    except Exception as exc:
        raise InvalidStateFile("state validation failed: %s" % exc) from exc


def state_to_json(state):
    if isinstance(state, StateVector):
        return {
            "kind": "pure",
            "dim": state.dim,
            "data": _complex_to_pairs(state.amps),
        }
    if isinstance(state, DensityMatrix):
        return {
            "kind": "mixed",
            "dim": state.dim,
            "data": _complex_to_pairs(state.mat),
        }
    raise TypeError("expected StateVector or DensityMatrix, got %r" % type(state))


def load_state_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InvalidStateFile("cannot read %s: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise InvalidStateFile("%s is not valid JSON: %s" % (path, exc)) from exc
    return state_from_json(obj)


def save_state_file(path, state):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_json(state), fh)
        fh.write("\n")
