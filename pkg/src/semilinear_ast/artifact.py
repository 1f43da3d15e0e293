"""Binary partition artifacts.

Layout (all little-endian)::

    magic      4s   b"AST1"
    p, alpha, omega, k             4 x uint32
    variant    uint8   0 = asl, 1 = agl
    ncoef      uint32, then ncoef x uint32   defining polynomial, constant term first
    classes    uint32, then classes x uint64 class sizes
    runs       uint64, then runs x uint16 values, runs x uint32 lengths

The label payload is the flattened cube L[x, y, z] (x slowest),
run-length encoded.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .action import GroupSpec, TriplePartition, VARIANTS, label_dtype
from .gf import build_tower

MAGIC = b"AST1"
_HEAD = struct.Struct("<4sIIIIB")


class ArtifactError(ValueError):
    pass


def rle_encode(flat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if flat.size == 0:
        return flat[:0], np.zeros(0, dtype=np.int64)
    starts = np.r_[0, np.flatnonzero(np.diff(flat)) + 1]
    lengths = np.diff(np.r_[starts, flat.size])
    return flat[starts], lengths


def rle_decode(values: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    return np.repeat(values, lengths)


def to_bytes(spec: GroupSpec, partition: TriplePartition) -> bytes:
    t = spec.tower
    parts = [_HEAD.pack(MAGIC, t.p, t.alpha, t.omega, spec.k, VARIANTS.index(spec.variant))]
    parts.append(struct.pack("<I", len(t.poly)))
    parts.append(np.asarray(t.poly, dtype="<u4").tobytes())
    sizes = partition.class_sizes
    parts.append(struct.pack("<I", sizes.size))
    parts.append(sizes.astype("<u8").tobytes())
    values, lengths = rle_encode(partition.labels.ravel())
    parts.append(struct.pack("<Q", values.size))
    parts.append(values.astype("<u2").tobytes())
    parts.append(lengths.astype("<u4").tobytes())
    return b"".join(parts)


def from_bytes(data: bytes) -> tuple[GroupSpec, TriplePartition]:
    try:
        magic, p, alpha, omega, k, variant = _HEAD.unpack_from(data, 0)
    except struct.error as exc:
        raise ArtifactError("truncated header") from exc
    if magic != MAGIC:
        raise ArtifactError(f"bad magic {magic!r}")
    if variant >= len(VARIANTS):
        raise ArtifactError(f"bad variant byte {variant}")
    off = _HEAD.size
    try:
        (ncoef,) = struct.unpack_from("<I", data, off)
        off += 4
        poly = tuple(int(c) for c in np.frombuffer(data, "<u4", ncoef, off))
        off += 4 * ncoef
        (ncls,) = struct.unpack_from("<I", data, off)
        off += 4
        sizes = np.frombuffer(data, "<u8", ncls, off)
        off += 8 * ncls
        (nruns,) = struct.unpack_from("<Q", data, off)
        off += 8
        values = np.frombuffer(data, "<u2", nruns, off)
        off += 2 * nruns
        lengths = np.frombuffer(data, "<u4", nruns, off)
        off += 4 * nruns
    except (struct.error, ValueError) as exc:
        raise ArtifactError("truncated payload") from exc
    if off != len(data):
        raise ArtifactError("trailing bytes after payload")

    tower = build_tower(p, alpha, omega)
    if tower.poly != poly:
        raise ArtifactError("stored polynomial differs from the Conway polynomial")
    spec = GroupSpec(VARIANTS[variant], k, tower)
    N = spec.domain_size
    flat = rle_decode(values, lengths)
    if flat.size != N**3:
        raise ArtifactError(f"payload has {flat.size} labels, expected {N**3}")
    labels = flat.astype(label_dtype(ncls)).reshape(N, N, N)
    partition = TriplePartition(labels)
    if not np.array_equal(partition.class_sizes, sizes):
        raise ArtifactError("class sizes in header do not match the payload")
    return spec, partition


def write_artifact(path, spec: GroupSpec, partition: TriplePartition) -> None:
    Path(path).write_bytes(to_bytes(spec, partition))


def read_artifact(path) -> tuple[GroupSpec, TriplePartition]:
    return from_bytes(Path(path).read_bytes())
