"""On-disk formats: embeddings, graphs, matchings, batches, traces, manifests.

Embedding matrices travel either as JSON ({"dim", "rows", "values"} with a
flat row-major values array) or as raw binary with a 16-byte header: the
magic "MGAL", u32 row count, u32 dimension, u32 format version, all
little-endian, followed by rows*dim float32 values. JSON written here is
byte-stable across reruns (sorted keys, fixed separators); wall-clock
timings live only in manifests.
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
import struct
from pathlib import Path

import numpy as np

from ._version import __version__
from .barycenter import TripletBatch
from .errors import FormatError
from .graphs import StructuredGraph, pool_embeddings

MAGIC = b"MGAL"
BINARY_VERSION = 1


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(_dump_json(obj))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# -- embedding matrices ------------------------------------------------------

def save_embeddings_json(path, matrix) -> None:
    arr = np.asarray(matrix, dtype=float)
    write_json(
        path,
        {"rows": arr.shape[0], "dim": arr.shape[1], "values": arr.ravel().tolist()},
    )


def save_embeddings_binary(path, matrix) -> None:
    arr = np.asarray(matrix, dtype=np.float32)
    header = MAGIC + struct.pack("<III", arr.shape[0], arr.shape[1], BINARY_VERSION)
    Path(path).write_bytes(header + arr.astype("<f4").tobytes())


def load_embeddings(path) -> np.ndarray:
    """Load a matrix from either supported format, sniffing the magic bytes."""
    raw = Path(path).read_bytes()
    if raw[:4] == MAGIC:
        return _parse_binary(path, raw)
    data = read_json(path)
    if not isinstance(data, dict) or not {"rows", "dim", "values"} <= set(data):
        raise FormatError(f"{path}: embedding JSON needs rows, dim, values")
    rows, dim = int(data["rows"]), int(data["dim"])
    values = data["values"]
    if rows < 1 or dim < 1:
        raise FormatError(f"{path}: rows and dim must be positive")
    if not isinstance(values, list) or len(values) != rows * dim:
        raise FormatError(
            f"{path}: values must be a flat row-major list of length rows*dim"
        )
    arr = np.asarray(values, dtype=float).reshape(rows, dim)
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{path}: non-finite embedding values")
    return arr


def _parse_binary(path, raw: bytes) -> np.ndarray:
    if len(raw) < 16:
        raise FormatError(f"{path}: truncated binary header")
    rows, dim, version = struct.unpack("<III", raw[4:16])
    if version != BINARY_VERSION:
        raise FormatError(f"{path}: unsupported binary version {version}")
    expected = 16 + rows * dim * 4
    if rows < 1 or dim < 1 or len(raw) != expected:
        raise FormatError(
            f"{path}: expected {expected} bytes for {rows}x{dim}, got {len(raw)}"
        )
    flat = np.frombuffer(raw, dtype="<f4", offset=16)
    arr = flat.reshape(rows, dim).astype(float)
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{path}: non-finite embedding values")
    return arr


# -- graphs ------------------------------------------------------------------

def graph_to_dict(g: StructuredGraph, include_features: bool = True) -> dict:
    out = {"n": g.n_nodes, "edges": sorted([int(i), int(j)] for i, j in g.edges)}
    if include_features:
        out["features"] = g.features.tolist()
    return out


def save_graph(path, g: StructuredGraph, include_features: bool = True) -> None:
    write_json(path, graph_to_dict(g, include_features))


# -- triplet batches (JSON lines) --------------------------------------------

def load_triplet_batch(path) -> tuple:
    """Read one record per line; multi-round answer lists are pooled here.

    Returns (batch, ids) with record order preserved.
    """
    ids, v_rows, a_rows, ae_rows = [], [], [], []
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: not valid JSON ({exc})") from exc
            try:
                ids.append(record["id"])
                v_rows.append(np.asarray(record["v"], dtype=float))
                a_rows.append(pool_embeddings(record["a"]))
                ae_rows.append(pool_embeddings(record["ae"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{lineno}: bad record ({exc})") from exc
    if not ids:
        raise FormatError(f"{path}: no records")
    try:
        batch = TripletBatch.from_arrays(np.array(v_rows), np.array(a_rows), np.array(ae_rows))
    except Exception as exc:
        raise FormatError(f"{path}: inconsistent record shapes ({exc})") from exc
    return batch, ids


def save_triplet_batch(path, batch: TripletBatch, ids=None) -> None:
    """Write records as JSON lines; single-round lists wrap the pooled rows."""
    ids = ids if ids is not None else list(range(batch.size))
    with open(path, "w") as handle:
        for i in range(batch.size):
            record = {
                "id": ids[i],
                "v": batch.views["v"][i].tolist(),
                "a": [batch.views["a"][i].tolist()],
                "ae": [batch.views["ae"][i].tolist()],
            }
            handle.write(json.dumps(record, sort_keys=True) + "\n")


# -- training artifacts --------------------------------------------------------

def save_checkpoint(path, encoders, decoders, epoch: int, seeds: dict) -> None:
    write_json(
        path,
        {
            "epoch": epoch,
            "rng_state": seeds,
            "encoders": {
                s: {"weight": encoders.weights[s].tolist(), "bias": encoders.biases[s].tolist()}
                for s in encoders.modalities
            },
            "decoders": {
                s: {"weight": decoders.weights[s].tolist(), "bias": decoders.biases[s].tolist()}
                for s in decoders.weights
            },
        },
    )


def load_checkpoint(path):
    from .training import DecoderSet, EncoderSet

    data = read_json(path)
    enc = data["encoders"]
    encoders = EncoderSet(
        {s: np.asarray(e["weight"], dtype=float) for s, e in enc.items()},
        {s: np.asarray(e["bias"], dtype=float) for s, e in enc.items()},
    )
    dec = data.get("decoders", {})
    decoders = DecoderSet(
        {s: np.asarray(e["weight"], dtype=float) for s, e in dec.items()},
        {s: np.asarray(e["bias"], dtype=float) for s, e in dec.items()},
    )
    return encoders, decoders, int(data["epoch"]), data.get("rng_state", {})


def save_trace_csv(path, trace, manifest_name: str | None = None) -> None:
    with open(path, "w", newline="") as handle:
        if manifest_name:
            handle.write(f"# manifest: {manifest_name}\n")
        writer = csv.writer(handle)
        writer.writerow(["epoch", "batch", "hamming", "surrogate", "accuracy"])
        for row in trace:
            writer.writerow(list(row.as_tuple()))


# -- run manifests -------------------------------------------------------------

def build_manifest(command: str, config: dict, inputs, seed: int, timings: dict) -> dict:
    """Record of one CLI run: config snapshot, input digests, environment."""
    return {
        "command": command,
        "config": config,
        "inputs": {str(p): file_digest(p) for p in inputs},
        "seed": seed,
        "tool_version": __version__,
        "platform": {
            "python": platform.python_version(),
            "machine": platform.machine(),
            "system": platform.system(),
        },
        "timings": timings,
    }


def manifest_path(out_path) -> Path:
    out = Path(out_path)
    return out.with_name(out.name + ".manifest.json")


def write_output_with_manifest(out_path, payload: dict, manifest: dict) -> None:
    """Write a JSON artifact that names its manifest, then the manifest."""
    mpath = manifest_path(out_path)
    payload = dict(payload)
    payload["manifest"] = mpath.name
    write_json(out_path, payload)
    manifest = dict(manifest)
    manifest["outputs"] = [Path(out_path).name]
    write_json(mpath, manifest)
