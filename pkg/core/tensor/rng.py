"""Named, seedable generators (Philox counter-based) and JSON-safe state snapshots"""
import zlib
from typing import Any, Dict

import numpy as np

_MASK64 = (1 << 64) - 1


def _stream_key(stream) -> int:
    if isinstance(stream, str):
        return zlib.crc32(stream.encode("utf-8"))
    return int(stream) & _MASK64


def make_rng(seed: int, *streams) -> np.random.Generator:
    """
    Philox generator for `seed`, optionally split into named sub-streams.

    make_rng(7, "dropout") and make_rng(7, "sampling") are independent and both
    reproducible from the run seed alone.
    """
    entropy = [int(seed) & _MASK64] + [_stream_key(s) for s in streams]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return {"__ndarray__": [int(v) for v in value.reshape(-1)], "dtype": str(value.dtype), "shape": list(value.shape)}
    if isinstance(value, dict):
        return {k: _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, np.integer):
        return int(value)
    return value


def _from_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        if "__ndarray__" in value:
            return np.array(value["__ndarray__"], dtype=value["dtype"]).reshape(value["shape"])
        return {k: _from_jsonable(v) for k, v in value.items()}
    return value


def rng_state(rng: np.random.Generator) -> Dict[str, Any]:
    """Snapshot of the bit generator state, safe for json.dumps"""
    return _to_jsonable(rng.bit_generator.state)


def restore_rng(state: Dict[str, Any]) -> np.random.Generator:
    """Generator positioned exactly where `rng_state` captured it"""
    bit_generator = np.random.Philox()
    bit_generator.state = _from_jsonable(state)
    return np.random.Generator(bit_generator)
