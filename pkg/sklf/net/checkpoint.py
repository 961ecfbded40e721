"""
Binary container for network parameters and training state.

Layout (all integers little-endian)::

    8 bytes   magic b"SKLFCKPT"
    uint32    format version
    uint32    header length H
    H bytes   UTF-8 JSON header, sorted keys
    ...       raw float32 arrays, in header table order, C order
    uint32    CRC32 of all preceding bytes

The header holds an ``"arrays"`` table of ``{"name", "shape"}`` entries and an
arbitrary JSON-serializable ``"state"`` dictionary.
"""

import json
import os
import struct
import zlib
from typing import Any, Union

import numpy as np

from sklf.exceptions import CheckpointVersionError, CorruptCheckpointError

MAGIC = b"SKLFCKPT"
FORMAT_VERSION = 1

_PREFIX = struct.Struct("<8sII")
_CRC = struct.Struct("<I")
_DTYPE = np.dtype("<f4")


def write_container(
    path: Union[str, os.PathLike], arrays: dict[str, np.ndarray], state: dict
) -> None:
    """
    Write named float arrays and a JSON state dictionary to ``path``.

    Arrays are stored as little-endian float32, so float64 arrays lose precision.
    Array order follows the insertion order of ``arrays``.
    """
    table = [
        {"name": name, "shape": list(np.shape(arr))} for name, arr in arrays.items()
    ]
    header = json.dumps(
        {"arrays": table, "state": state}, sort_keys=True, separators=(",", ":")
    ).encode("utf-8")

    body = bytearray(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(header)))
    body += header
    for arr in arrays.values():
        body += np.ascontiguousarray(arr, dtype=_DTYPE).tobytes()
    body += _CRC.pack(zlib.crc32(bytes(body)))

    with open(path, "wb") as file:
        file.write(bytes(body))


def read_container(
    path: Union[str, os.PathLike],
) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    """
    Read a file written by :func:`write_container`.

    Returns
    -------
    arrays : dict
        Named float32 arrays, in stored order.

    state : dict
        The JSON state dictionary.
    """
    with open(path, "rb") as file:
        data = file.read()

    if len(data) < _PREFIX.size + _CRC.size:
        raise CorruptCheckpointError(f"Checkpoint {path} is truncated")

    magic, version, header_len = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise CorruptCheckpointError(f"File {path} is not a checkpoint, bad magic")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"Checkpoint {path} has format version {version}, "
            f"only version {FORMAT_VERSION} is supported"
        )

    (stored_crc,) = _CRC.unpack_from(data, len(data) - _CRC.size)
    if zlib.crc32(data[: -_CRC.size]) != stored_crc:
        raise CorruptCheckpointError(f"Checkpoint {path} fails its checksum")

    offset = _PREFIX.size
    try:
        header = json.loads(data[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CorruptCheckpointError(f"Checkpoint {path} has a broken header") from e
    offset += header_len

    arrays = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        end = offset + count * _DTYPE.itemsize
        if end > len(data) - _CRC.size:
            raise CorruptCheckpointError(
                f"Checkpoint {path} is truncated at array {entry['name']}"
            )
        arr = np.frombuffer(data, dtype=_DTYPE, count=count, offset=offset)
        arrays[entry["name"]] = arr.reshape(shape).astype(np.float32)
        offset = end

    if offset != len(data) - _CRC.size:
        raise CorruptCheckpointError(f"Checkpoint {path} has trailing bytes")

    return arrays, header["state"]
