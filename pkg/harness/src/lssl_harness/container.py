"""Reader for the "UNH1" binary tensor container.

Independent of the producing library: parses the 4-byte magic, the 4-byte
little-endian header length, the JSON header, and the packed row-major
little-endian payload. Only reading is supported; the harness consumes
exported initialization banks and never writes containers.
"""

from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"UNH1"
FORMAT_VERSION = 1

_DTYPES = {"f64": np.dtype("<f8"), "f32": np.dtype("<f4")}


class ContainerError(ValueError):
    """The file is not a valid container."""


def read_container(path):
    """Return (tensors, meta) from a container file.

    Tensors come back as an insertion-ordered dict of numpy arrays.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8 or blob[:4] != MAGIC:
        raise ContainerError(f"{path}: bad magic {blob[:4]!r}")
    (header_len,) = struct.unpack("<I", blob[4:8])
    if len(blob) < 8 + header_len:
        raise ContainerError(f"{path}: truncated header")
    try:
        header = json.loads(blob[8 : 8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerError(f"{path}: header is not valid JSON ({exc})") from None
    if header.get("format_version") != FORMAT_VERSION:
        raise ContainerError(f"{path}: unsupported format_version {header.get('format_version')}")
    payload = blob[8 + header_len :]
    tensors = {}
    offset = 0
    for entry in header.get("tensors", []):
        name = entry["name"]
        dtype = _DTYPES.get(entry["dtype"])
        if dtype is None:
            raise ContainerError(f"{path}: tensor {name!r} has unknown dtype {entry['dtype']!r}")
        shape = tuple(entry["shape"])
        length = int(np.prod(shape)) * dtype.itemsize
        if entry["length"] != length or entry["offset"] != offset:
            raise ContainerError(f"{path}: tensor {name!r} has inconsistent layout")
        if offset + length > len(payload):
            raise ContainerError(f"{path}: payload truncated at tensor {name!r}")
        tensors[name] = np.frombuffer(payload, dtype, count=int(np.prod(shape)), offset=offset
                                      ).reshape(shape).copy()
        offset += length
    if offset != len(payload):
        raise ContainerError(f"{path}: {len(payload) - offset} unclaimed payload bytes")
    return tensors, header.get("meta", {})


def load_bank(path):
    """Load an initialization bank: list of (A_k, B_k) pairs plus meta."""
    tensors, meta = read_container(path)
    if meta.get("content") != "init_bank":
        raise ContainerError(f"{path}: not an initialization bank")
    n, t_max = meta["n"], meta["t_max"]
    pairs = []
    for k in range(1, t_max + 1):
        a, b = tensors[f"A_{k}"], tensors[f"B_{k}"]
        if a.shape != (n, n) or b.shape != (n,):
            raise ContainerError(f"{path}: step {k} tensor shapes do not match n={n}")
        pairs.append((a, b))
    return pairs, meta


def select_timescales(pairs, h: int, t_min: float, t_max: float):
    """Pick h pairs at log-uniformly spaced timescales, index = floor(t)."""
    if h == 1:
        ts = np.array([t_min])
    else:
        ts = t_min * (t_max / t_min) ** (np.arange(h) / (h - 1))
    if not 1 <= t_min <= t_max <= len(pairs):
        raise ContainerError(f"timescale range [{t_min}, {t_max}] outside bank of {len(pairs)}")
    return [pairs[int(np.floor(t)) - 1] for t in ts]
