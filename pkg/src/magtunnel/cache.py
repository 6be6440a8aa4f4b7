"""Content-addressed cache for the expensive pipeline artifacts.

Keys are sha256 digests of the canonicalized inputs that determine the
artifact (config subsections plus a code version tag); values round-trip
bit-identically because floats are serialized as hex.
"""

from __future__ import annotations

import hashlib
import json
import os
import warnings

CACHE_VERSION = "magtunnel-cache-1"


def content_key(payload):
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:24]


class Cache:
    def __init__(self, directory):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)

    def path(self, kind, key):
        return os.path.join(self.directory, f"{kind}-{key}.json")

    def load(self, kind, key, loader):
        path = self.path(kind, key)
        if not os.path.exists(path):
            return None
        try:
            with open(path) as fh:
                payload = json.load(fh)
            if payload.get("cache_version") != CACHE_VERSION:
                warnings.warn(f"cache version mismatch for {path}; recomputing",
                              RuntimeWarning, stacklevel=2)
                return None
            return loader(payload["data"])
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            warnings.warn(f"corrupted cache file {path} ({exc}); recomputing",
                          RuntimeWarning, stacklevel=2)
            return None

    def store(self, kind, key, data):
        path = self.path(kind, key)
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump({"cache_version": CACHE_VERSION, "data": data}, fh,
                      sort_keys=True, indent=1)
        os.replace(tmp, path)
