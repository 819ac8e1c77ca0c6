"""Single-file training checkpoints.

Layout: one ASCII tag line (``PGFS-CKPT-1``), one JSON metadata line, then
the raw C-order bytes of every array concatenated in manifest order.  The
metadata carries an array manifest (name, dtype, shape) and a SHA-256 of the
payload, so loads detect truncation and corruption; a stored environment
registry hash lets callers refuse to resume against different chemistry.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile

import numpy as np

__all__ = [
    "CHECKPOINT_TAG",
    "CheckpointError",
    "CorruptCheckpointError",
    "RegistryMismatchError",
    "UnsupportedVersionError",
    "load_checkpoint",
    "save_checkpoint",
]

CHECKPOINT_TAG = "PGFS-CKPT-1"


class CheckpointError(Exception):
    """Base class for checkpoint read/write failures."""


class UnsupportedVersionError(CheckpointError):
    """The file's tag line is not a version this code reads."""


class CorruptCheckpointError(CheckpointError):
    """The file is truncated or its payload checksum does not match."""


class RegistryMismatchError(CheckpointError):
    """The checkpoint was written against different chemistry (blocks,
    templates, or normalization)."""


def save_checkpoint(
    path: str, metadata: dict, arrays: dict[str, np.ndarray]
) -> None:
    """Write atomically (temp file + rename).  ``metadata`` must be
    JSON-serializable; ``arrays`` values are stored as raw C-order bytes in
    insertion order."""
    manifest = []
    chunks = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        manifest.append(
            {"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape)}
        )
        chunks.append(arr.tobytes())
    payload = b"".join(chunks)
    meta = dict(metadata)
    meta["arrays"] = manifest
    meta["payload_sha256"] = hashlib.sha256(payload).hexdigest()

    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ckpt-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(CHECKPOINT_TAG.encode("ascii") + b"\n")
            fh.write(json.dumps(meta, sort_keys=True).encode("utf-8") + b"\n")
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(
    path: str, expect_registry_hash: str | None = None
) -> tuple[dict, dict[str, np.ndarray]]:
    """Read and verify a checkpoint, returning (metadata, arrays).

    Raises :class:`UnsupportedVersionError` on a foreign tag line,
    :class:`CorruptCheckpointError` on truncation or checksum mismatch, and
    :class:`RegistryMismatchError` when ``expect_registry_hash`` is given and
    differs from the stored one.
    """
    with open(path, "rb") as fh:
        tag = fh.readline().rstrip(b"\n")
        if tag != CHECKPOINT_TAG.encode("ascii"):
            raise UnsupportedVersionError(
                f"{path}: expected tag {CHECKPOINT_TAG!r}, "
                f"found {tag[:64]!r}"
            )
        meta_line = fh.readline()
        if not meta_line.endswith(b"\n"):
            raise CorruptCheckpointError(f"{path}: truncated metadata line")
        try:
            meta = json.loads(meta_line)
        except json.JSONDecodeError as exc:
            raise CorruptCheckpointError(f"{path}: bad metadata JSON: {exc}")
        payload = fh.read()

    digest = hashlib.sha256(payload).hexdigest()
    if digest != meta.get("payload_sha256"):
        raise CorruptCheckpointError(
            f"{path}: payload checksum mismatch "
            f"(stored {meta.get('payload_sha256')!r}, computed {digest!r})"
        )
    if expect_registry_hash is not None:
        stored = meta.get("registry_hash")
        if stored != expect_registry_hash:
            raise RegistryMismatchError(
                f"{path}: checkpoint registry hash {stored!r} does not match "
                f"the current environment {expect_registry_hash!r}"
            )

    arrays: dict[str, np.ndarray] = {}
    offset = 0
    for entry in meta["arrays"]:
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        nbytes = dtype.itemsize * int(np.prod(shape, dtype=np.int64))
        if offset + nbytes > len(payload):
            raise CorruptCheckpointError(
                f"{path}: payload too short for array {entry['name']!r}"
            )
        arrays[entry["name"]] = (
            np.frombuffer(payload, dtype=dtype, count=int(np.prod(shape, dtype=np.int64)), offset=offset)
            .reshape(shape)
            .copy()
        )
        offset += nbytes
    if offset != len(payload):
        raise CorruptCheckpointError(
            f"{path}: {len(payload) - offset} trailing payload bytes"
        )
    return meta, arrays
