"""Content hashing for reproducibility metadata."""

import dataclasses
import hashlib
import json


def canonical_json(obj):
    """Deterministic JSON encoding (sorted keys, no whitespace drift)."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = dataclasses.asdict(obj)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      default=str)


def content_hash(obj):
    """Git-style SHA-1 hex digest of the canonical JSON encoding."""
    return hashlib.sha1(canonical_json(obj).encode()).hexdigest()
