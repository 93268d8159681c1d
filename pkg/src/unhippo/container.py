"""Bit-exact binary tensor container ("UNH1" format).

Layout: 4 magic bytes "UNH1", a 4-byte little-endian unsigned header length,
a UTF-8 JSON header, then the payload of concatenated row-major little-endian
tensors. The header lists tensors in payload order with name, shape, dtype
("f64" or "f32"), byte offset and byte length, plus a "meta" map and a
"format_version". Payload bytes round-trip exactly, including NaN payloads.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

from .kalman import InitBank
from .ssm import LsslLayer, SsmCore

MAGIC = b"UNH1"
FORMAT_VERSION = 1

_DTYPES = {"f64": np.dtype("<f8"), "f32": np.dtype("<f4")}
_DTYPE_NAMES = {np.dtype(np.float64): "f64", np.dtype(np.float32): "f32"}


class ContainerFormatError(ValueError):
    """The file does not satisfy the container format."""


def write_container(path, tensors, meta=None) -> None:
    """Write named tensors and a JSON-compatible meta map to ``path``.

    ``tensors`` maps unique names to float32/float64 arrays with nonzero
    shapes, serialized in iteration order. The file is written to a temporary
    sibling and renamed, so readers never observe a partial write.
    """
    entries = []
    chunks = []
    offset = 0
    for name, array in tensors.items():
        array = np.ascontiguousarray(array)
        if array.dtype not in _DTYPE_NAMES:
            raise ValueError(f"tensor {name!r}: unsupported dtype {array.dtype}")
        if array.size == 0:
            raise ValueError(f"tensor {name!r}: zero-size shapes are not allowed")
        data = array.astype(array.dtype.newbyteorder("<"), copy=False).tobytes(order="C")
        entries.append(
            {
                "name": str(name),
                "shape": list(array.shape),
                "dtype": _DTYPE_NAMES[array.dtype],
                "offset": offset,
                "length": len(data),
            }
        )
        chunks.append(data)
        offset += len(data)
    header = {
        "format_version": FORMAT_VERSION,
        "tensors": entries,
        "meta": dict(meta) if meta else {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(header_bytes)))
            fh.write(header_bytes)
            for chunk in chunks:
                fh.write(chunk)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def read_container(path):
    """Read a container, validating magic, header and payload layout.

    Returns (tensors, meta) with tensors as an insertion-ordered dict of
    arrays. Violations raise ContainerFormatError naming the first bad field.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8 or blob[:4] != MAGIC:
        raise ContainerFormatError(f"magic: expected {MAGIC!r}, got {blob[:4]!r}")
    (header_len,) = struct.unpack("<I", blob[4:8])
    if len(blob) < 8 + header_len:
        raise ContainerFormatError(f"header_len: header of {header_len} bytes is truncated")
    try:
        header = json.loads(blob[8 : 8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerFormatError(f"header: not valid UTF-8 JSON ({exc})") from None
    if header.get("format_version") != FORMAT_VERSION:
        raise ContainerFormatError(
            f"format_version: expected {FORMAT_VERSION}, got {header.get('format_version')}"
        )
    entries = header.get("tensors")
    if not isinstance(entries, list):
        raise ContainerFormatError("tensors: missing or not a list")
    payload = blob[8 + header_len :]
    tensors = {}
    expected_offset = 0
    for idx, entry in enumerate(entries):
        where = f"tensors[{idx}]"
        name = entry.get("name")
        if not isinstance(name, str) or name in tensors:
            raise ContainerFormatError(f"{where}.name: missing or duplicate ({name!r})")
        dtype = _DTYPES.get(entry.get("dtype"))
        if dtype is None:
            raise ContainerFormatError(f"{where}.dtype: unknown dtype {entry.get('dtype')!r}")
        shape = entry.get("shape")
        if (
            not isinstance(shape, list)
            or not shape
            or any(not isinstance(d, int) or d < 1 for d in shape)
        ):
            raise ContainerFormatError(f"{where}.shape: invalid shape {shape!r}")
        length = entry.get("length")
        expected_length = int(np.prod(shape)) * dtype.itemsize
        if length != expected_length:
            raise ContainerFormatError(
                f"{where}.length: {length} does not match shape {shape} "
                f"({expected_length} bytes)"
            )
        if entry.get("offset") != expected_offset:
            raise ContainerFormatError(
                f"{where}.offset: {entry.get('offset')} is not the running offset "
                f"{expected_offset}"
            )
        if expected_offset + length > len(payload):
            raise ContainerFormatError(f"{where}: payload truncated")
        raw = payload[expected_offset : expected_offset + length]
        tensors[name] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
        expected_offset += length
    if expected_offset != len(payload):
        raise ContainerFormatError(
            f"payload: {len(payload)} bytes but tensors declare {expected_offset}"
        )
    meta = header.get("meta")
    if not isinstance(meta, dict):
        raise ContainerFormatError("meta: missing or not a map")
    return tensors, meta


def save_bank(path, bank: InitBank) -> None:
    """Serialize an initialization bank: tensors A_1..A_T then B_1..B_T."""
    tensors = {}
    for k, (a_bar, _) in enumerate(bank.pairs, start=1):
        tensors[f"A_{k}"] = np.asarray(a_bar, dtype=np.float64)
    for k, (_, b_bar) in enumerate(bank.pairs, start=1):
        tensors[f"B_{k}"] = np.asarray(b_bar, dtype=np.float64)
    meta = dict(bank.meta)
    meta.update({"content": "init_bank", "kind": bank.kind, "n": bank.n, "t_max": bank.t_max})
    write_container(path, tensors, meta)


def load_bank(path) -> InitBank:
    tensors, meta = read_container(path)
    if meta.get("content") != "init_bank":
        raise ContainerFormatError(
            f"meta.content: expected 'init_bank', got {meta.get('content')!r}"
        )
    n, t_max, kind = meta.get("n"), meta.get("t_max"), meta.get("kind")
    pairs = []
    for k in range(1, t_max + 1):
        try:
            a_bar, b_bar = tensors[f"A_{k}"], tensors[f"B_{k}"]
        except KeyError as exc:
            raise ContainerFormatError(f"tensors: bank is missing {exc}") from None
        if a_bar.shape != (n, n) or b_bar.shape != (n,):
            raise ContainerFormatError(
                f"tensors: step {k} shapes {a_bar.shape}, {b_bar.shape} do not match n={n}"
            )
        pairs.append((a_bar.astype(np.float64), b_bar.astype(np.float64)))
    return InitBank(n, t_max, kind, pairs, meta)


def save_layer(path, layer: LsslLayer, meta=None) -> None:
    """Serialize layer parameters: per-core a/b/c/d plus the mixer."""
    tensors = {}
    for j, core in enumerate(layer.cores):
        tensors[f"core{j}.a"] = core.a
        tensors[f"core{j}.b"] = core.b
        tensors[f"core{j}.c"] = core.c
        tensors[f"core{j}.d"] = core.d
    tensors["mix_weights"] = layer.mix_weights
    tensors["mix_bias"] = layer.mix_bias
    full_meta = dict(meta) if meta else {}
    full_meta.update(
        {"content": "lssl_layer", "h": layer.h, "n": layer.n, "m": layer.m, "tool": "unhippo"}
    )
    write_container(path, tensors, full_meta)


def load_layer(path) -> LsslLayer:
    tensors, meta = read_container(path)
    if meta.get("content") != "lssl_layer":
        raise ContainerFormatError(
            f"meta.content: expected 'lssl_layer', got {meta.get('content')!r}"
        )
    h = meta.get("h")
    try:
        cores = tuple(
            SsmCore(
                tensors[f"core{j}.a"],
                tensors[f"core{j}.b"],
                tensors[f"core{j}.c"],
                tensors[f"core{j}.d"],
            )
            for j in range(h)
        )
        return LsslLayer(cores, tensors["mix_weights"], tensors["mix_bias"])
    except KeyError as exc:
        raise ContainerFormatError(f"tensors: layer is missing {exc}") from None
