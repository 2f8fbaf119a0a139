"""JSON instance files.

A file holds one object with exactly the keys ``n, Q0, b0, Q1, b1, c1, Q2,
b2, c2``. Matrices are lists of rows. Numbers are written with Python's
shortest round-trip repr, so reading back what was written gives the same
doubles.
"""
import json
import logging
import math
from importlib import resources

import numpy as np

from .errors import InstanceFormatError
from .model import Qc2qpInstance

log = logging.getLogger(__name__)

KEYS = ("n", "Q0", "b0", "Q1", "b1", "c1", "Q2", "b2", "c2")

INSTANCE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": list(KEYS),
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        **{k: {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
           for k in ("Q0", "Q1", "Q2")},
        **{k: {"type": "array", "items": {"type": "number"}} for k in ("b0", "b1", "b2")},
        "c1": {"type": "number"},
        "c2": {"type": "number"},
    },
}


def _number(v, where, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InstanceFormatError(path, f"{where}: expected a number, got {type(v).__name__}")
    v = float(v)
    if not math.isfinite(v):
        raise InstanceFormatError(path, f"{where}: must be finite")
    return v


def _vector(v, n, where, path):
    if not isinstance(v, list):
        raise InstanceFormatError(path, f"{where}: expected a list")
    if len(v) != n:
        raise InstanceFormatError(path, f"{where}: expected {n} entries, got {len(v)}")
    return [_number(x, f"{where}[{i}]", path) for i, x in enumerate(v)]


def _matrix(v, n, where, path):
    if not isinstance(v, list):
        raise InstanceFormatError(path, f"{where}: expected a list of rows")
    if len(v) != n:
        raise InstanceFormatError(path, f"{where}: expected {n} rows, got {len(v)}")
    A = np.array([_vector(row, n, f"{where}[{i}]", path) for i, row in enumerate(v)])
    if not np.array_equal(A, A.T):
        log.warning("%s: %s is not symmetric; using (A + A')/2", path, where)
        A = (A + A.T) / 2
    return A


def instance_from_dict(doc, path="<dict>"):
    if not isinstance(doc, dict):
        raise InstanceFormatError(path, "top level must be an object")
    missing = [k for k in KEYS if k not in doc]
    if missing:
        raise InstanceFormatError(path, f"missing keys: {', '.join(missing)}")
    extra = sorted(set(doc) - set(KEYS))
    if extra:
        raise InstanceFormatError(path, f"unknown keys: {', '.join(extra)}")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InstanceFormatError(path, "n: expected a positive integer")
    f = {k: _matrix(doc[k], n, k, path) for k in ("Q0", "Q1", "Q2")}
    f.update({k: _vector(doc[k], n, k, path) for k in ("b0", "b1", "b2")})
    f.update({k: _number(doc[k], k, path) for k in ("c1", "c2")})
    return Qc2qpInstance(**f)


def parse_instance(path):
    """Read and validate an instance file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(path, f"invalid JSON: {exc}") from exc
    return instance_from_dict(doc, str(path))


def instance_to_dict(inst):
    doc = {"n": inst.n}
    for k in KEYS[1:]:
        v = getattr(inst, k)
        doc[k] = v.tolist() if isinstance(v, np.ndarray) else float(v)
    return doc


def emit_instance(inst, path):
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=1)
        fh.write("\n")


def bundled(name):
    """One of the shipped instances, ``"ex51"`` or ``"ex52"``."""
    text = resources.files("qc2qp").joinpath("data", f"{name}.json").read_text()
    return instance_from_dict(json.loads(text), name)
