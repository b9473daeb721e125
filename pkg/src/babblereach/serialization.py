"""Versioned JSON artifact files.

Floats are written with ``repr`` precision, so numeric arrays round-trip
bit-exactly.
"""

import hashlib
import json
from pathlib import Path

from .errors import ConfigurationError


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    path.write_text(text + "\n")
    return content_hash(text)


def read_json(path):
    return json.loads(Path(path).read_text())


def content_hash(payload):
    """SHA-256 of a canonical JSON dump (or of an already dumped string)."""
    if not isinstance(payload, str):
        payload = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def check_header(d, fmt, version):
    if d.get("format") != fmt:
        raise ConfigurationError(f"expected a {fmt!r} file, got {d.get('format')!r}")
    if d.get("version") != version:
        raise ConfigurationError(f"unsupported {fmt} version {d.get('version')!r}")
