"""
"VROC1" checkpoint container.

Layout (little-endian):
    5s   magic b"VROC1"
    I    config length, then config JSON (sorted keys, UTF-8)
    32s  sha256 of the config JSON
    I    meta length, then meta JSON (epoch, val accuracy, ...)
    I    RNG state length, then RNG state JSON
    Q    optimizer step
    I    tensor count, then per tensor in name order:
         H name length, name (UTF-8), B ndim, ndim x I dims,
         float32 weights, float32 first moment, float32 second moment
"""
import hashlib
import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from core.errors import CheckpointFormatError, ConfigMismatchError, PipelineIOError

logger = logging.getLogger(__name__)

MAGIC = b"VROC1"


def _dump_json(payload: Dict[str, Any]) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def config_hash(config: Dict[str, Any]) -> str:
    return hashlib.sha256(_dump_json(config)).hexdigest()


class Checkpoint:
    """
    Weights, optimizer moments and run state of one training step.

    Arrays are stored as float32; values loaded from a file are exactly the
    float32 values written, so save -> load -> save reproduces the bytes.
    """

    def __init__(
        self,
        config: Dict[str, Any],
        params: Dict[str, np.ndarray],
        m: Dict[str, np.ndarray],
        v: Dict[str, np.ndarray],
        step: int = 0,
        rng_state: Optional[Dict[str, Any]] = None,
        meta: Optional[Dict[str, Any]] = None
    ):
        self.config = config
        self.params = {name: np.asarray(params[name], dtype=np.float32) for name in sorted(params)}
        self.m = {name: np.asarray(m[name], dtype=np.float32) for name in self.params}
        self.v = {name: np.asarray(v[name], dtype=np.float32) for name in self.params}
        self.step = step
        self.rng_state = rng_state or {}
        self.meta = meta or {}

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    def to_bytes(self) -> bytes:
        config = _dump_json(self.config)
        meta = _dump_json(self.meta)
        rng = _dump_json(self.rng_state)
        parts = [
            MAGIC,
            struct.pack("<I", len(config)), config,
            hashlib.sha256(config).digest(),
            struct.pack("<I", len(meta)), meta,
            struct.pack("<I", len(rng)), rng,
            struct.pack("<Q", self.step),
            struct.pack("<I", len(self.params)),
        ]
        for name, value in self.params.items():
            encoded = name.encode("utf-8")
            parts.append(struct.pack("<H", len(encoded)))
            parts.append(encoded)
            parts.append(struct.pack(f"<B{value.ndim}I", value.ndim, *value.shape))
            for array in (value, self.m[name], self.v[name]):
                parts.append(np.ascontiguousarray(array, dtype="<f4").tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, raw: bytes, expected_config_hash: Optional[str] = None) -> "Checkpoint":
        """
        Raises:
            CheckpointFormatError: bad magic, truncated data or corrupt config
            ConfigMismatchError: config hash differs from expected_config_hash
        """
        if raw[:len(MAGIC)] != MAGIC:
            raise CheckpointFormatError("not a VROC1 checkpoint")
        try:
            offset = len(MAGIC)
            config_bytes, offset = _read_block(raw, offset)
            digest = raw[offset:offset + 32]
            offset += 32
            if hashlib.sha256(config_bytes).digest() != digest:
                raise CheckpointFormatError("config block does not match its stored hash")
            meta_bytes, offset = _read_block(raw, offset)
            rng_bytes, offset = _read_block(raw, offset)
            (step,) = struct.unpack_from("<Q", raw, offset)
            offset += 8
            (count,) = struct.unpack_from("<I", raw, offset)
            offset += 4
            params, m, v = {}, {}, {}
            for _ in range(count):
                (name_len,) = struct.unpack_from("<H", raw, offset)
                offset += 2
                name = raw[offset:offset + name_len].decode("utf-8")
                offset += name_len
                (ndim,) = struct.unpack_from("<B", raw, offset)
                offset += 1
                shape = struct.unpack_from(f"<{ndim}I", raw, offset)
                offset += 4 * ndim
                for target in (params, m, v):
                    target[name], offset = _read_array(raw, offset, shape)
            if offset != len(raw):
                raise CheckpointFormatError(f"{len(raw) - offset} trailing bytes")
            config = json.loads(config_bytes)
            meta = json.loads(meta_bytes)
            rng_state = json.loads(rng_bytes)
        except (struct.error, ValueError, UnicodeDecodeError) as e:
            raise CheckpointFormatError(f"malformed checkpoint: {e}")

        checkpoint = cls(config, params, m, v, step, rng_state, meta)
        if expected_config_hash is not None and checkpoint.config_hash != expected_config_hash:
            raise ConfigMismatchError(
                f"checkpoint config {checkpoint.config_hash[:12]} != expected {expected_config_hash[:12]}"
            )
        return checkpoint


def _read_block(raw: bytes, offset: int) -> Tuple[bytes, int]:
    (length,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    if offset + length > len(raw):
        raise CheckpointFormatError("truncated block")
    return raw[offset:offset + length], offset + length


def _read_array(raw: bytes, offset: int, shape: Tuple[int, ...]) -> Tuple[np.ndarray, int]:
    size = int(np.prod(shape, dtype=np.int64)) * 4
    if offset + size > len(raw):
        raise CheckpointFormatError("truncated tensor data")
    array = np.frombuffer(raw, dtype="<f4", count=size // 4, offset=offset).reshape(shape).astype(np.float32)
    return array, offset + size


def save_checkpoint(checkpoint: Checkpoint, path: Path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(checkpoint.to_bytes())
    except OSError as e:
        raise PipelineIOError(f"cannot write checkpoint {path}: {e}")
    logger.info(f"Checkpoint saved: {path} (step {checkpoint.step})")


def load_checkpoint(path: Path, expected_config_hash: Optional[str] = None) -> Checkpoint:
    """
    Read a checkpoint file.

    Args:
        path: Checkpoint path
        expected_config_hash: Reject checkpoints written under another config

    Raises:
        PipelineIOError: unreadable file
        CheckpointFormatError: malformed content
        ConfigMismatchError: config hash mismatch
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise PipelineIOError(f"cannot read checkpoint {path}: {e}")
    return Checkpoint.from_bytes(raw, expected_config_hash)
