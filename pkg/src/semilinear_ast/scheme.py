"""Association-scheme-on-triples axioms, valencies and intersection numbers.

All checks work on a dense label cube ``L[x, y, z]`` and report the
encoding-minimal counterexample when an axiom fails.  A failed axiom is
returned as data (``ConditionResult.passed = False``), never raised.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .action import TriplePartition

#: S3 acting on triple slots; sigma maps (t1, t2, t3) to (t[s[0]], t[s[1]], t[s[2]]).
S3 = tuple(itertools.permutations(range(3)))

DEFAULT_SAMPLES = 32
DEFAULT_SEED = 20240101
FULL_REGULARITY_LIMIT = 64


@dataclass
class ConditionResult:
    name: str
    passed: bool
    value: Any = None
    witness: dict | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        out = {"condition": self.name, "passed": self.passed}
        if self.detail:
            out["detail"] = self.detail
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class VerificationReport:
    conditions: list[ConditionResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "conditions": [c.to_dict() for c in self.conditions]}


def _cube(partition) -> np.ndarray:
    return partition.labels if isinstance(partition, TriplePartition) else np.asarray(partition)


def _triple(idx: int, N: int) -> list[int]:
    return [idx // (N * N), (idx // N) % N, idx % N]


# ---------------------------------------------------------------------------
# condition 4: the trivial relations


def trivial_pattern(N: int) -> np.ndarray:
    """Expected id (0-3) for triples with a repeated coordinate, -1 elsewhere."""
    x = np.arange(N)[:, None, None]
    y = np.arange(N)[None, :, None]
    z = np.arange(N)[None, None, :]
    out = np.full((N, N, N), -1, dtype=np.int8)
    out[np.broadcast_to(x == y, out.shape)] = 3
    out[np.broadcast_to(x == z, out.shape)] = 2
    out[np.broadcast_to(y == z, out.shape)] = 1
    out[np.broadcast_to((x == y) & (y == z), out.shape)] = 0
    return out


def verify_trivial_relations(partition) -> ConditionResult:
    L = _cube(partition)
    N = L.shape[0]
    name = "trivial_relations"
    if N < 3:
        return ConditionResult(name, False, detail=f"|Omega| = {N} < 3")
    sizes = np.bincount(L.ravel())
    if np.any(sizes == 0):
        empty = int(np.flatnonzero(sizes == 0)[0])
        return ConditionResult(name, False, witness={"empty_class": empty}, detail="class ids are not contiguous")
    if sizes.size < 5:
        return ConditionResult(name, False, detail=f"only {sizes.size} classes; m >= 4 required")
    expected = trivial_pattern(N)
    lab = L.astype(np.int64)
    bad = np.where(expected >= 0, lab != expected, lab < 4)
    if bad.any():
        idx = int(np.flatnonzero(bad.ravel())[0])
        t = _triple(idx, N)
        return ConditionResult(
            name,
            False,
            witness={"triple": t, "label": int(lab.ravel()[idx]), "expected": int(expected.ravel()[idx])},
            detail="ids 0-3 do not match the four defining sets",
        )
    return ConditionResult(name, True)


# ---------------------------------------------------------------------------
# condition 1 (and its S3 images): valencies


def _slot_counts(slice2d: np.ndarray, M: int) -> np.ndarray:
    """For an (N, N) array indexed [other, free], count labels along ``free``."""
    N = slice2d.shape[0]
    idx = np.arange(N)[:, None] * M + slice2d.astype(np.int64)
    return np.bincount(idx.ravel(), minlength=N * M).reshape(N, M)


def verify_valency_condition(partition) -> ConditionResult:
    """Constant n^(1), n^(2), n^(3) over all ordered pairs of distinct points.

    ``value`` is an (m+1, 3) array with columns n^(1), n^(2), n^(3).
    """
    L = _cube(partition)
    N = L.shape[0]
    M = int(L.max()) + 1
    ref = None
    for x in range(N):
        per_slot = (
            _slot_counts(L[:, x, :].T, M),  # (z, x, y): rows y
            _slot_counts(L[x, :, :].T, M),  # (x, z, y): rows y
            _slot_counts(L[x, :, :], M),  # (x, y, z): rows y
        )
        counts = np.stack(per_slot, axis=-1)  # (y, class, slot)
        mask = np.arange(N) != x
        if ref is None:
            ref = counts[1 if x == 0 else 0].copy()
        diff = np.any(counts != ref[None], axis=(1, 2)) & mask
        if diff.any():
            y = int(np.flatnonzero(diff)[0])
            cls, slot = map(int, np.argwhere(counts[y] != ref)[0])
            return ConditionResult(
                "valency",
                False,
                witness={
                    "pair": [x, y],
                    "class": cls,
                    "slot": slot + 1,
                    "expected": int(ref[cls, slot]),
                    "found": int(counts[y, cls, slot]),
                },
                detail="valency is not constant over ordered pairs",
            )
    return ConditionResult("valency", True, value=ref)


# ---------------------------------------------------------------------------
# condition 3: closure under S3


def permuted_cube(L: np.ndarray, sigma: tuple[int, int, int]) -> np.ndarray:
    """P[t] = L[t[sigma[0]], t[sigma[1]], t[sigma[2]]]."""
    inv = [sigma.index(m) for m in range(3)]
    return L.transpose(inv)


def verify_s3_closure(partition) -> ConditionResult:
    """``value[i, s]`` is the class onto which S3[s] carries class i."""
    L = _cube(partition).astype(np.int64)
    M = int(L.max()) + 1
    table = np.zeros((M, len(S3)), dtype=np.int64)
    for s, sigma in enumerate(S3):
        P = permuted_cube(L, sigma)
        pairs = np.unique((L * M + P).ravel())
        src, dst = pairs // M, pairs % M
        if src.size != M or np.unique(dst).size != M:
            # class i splits over several images, or two classes share an image
            _, cnt = np.unique(src, return_counts=True)
            if np.any(cnt > 1):
                i = int(src[np.flatnonzero(np.r_[False, src[1:] == src[:-1]])[0]])
            else:
                _, inverse, cnt = np.unique(dst, return_inverse=True, return_counts=True)
                i = int(src[np.flatnonzero(cnt[inverse] > 1)[0]])
            idx = int(np.flatnonzero((L == i).ravel())[0])
            return ConditionResult(
                "s3_closure",
                False,
                witness={"class": i, "sigma": list(sigma), "images": sorted(set(dst[src == i].tolist())),
                         "triple": _triple(idx, L.shape[0])},
                detail="a permuted class is not a single class",
            )
        table[src, s] = dst
    return ConditionResult("s3_closure", True, value=table)


# ---------------------------------------------------------------------------
# condition 2: principal regularity


@dataclass
class IntersectionTensor:
    """Sparse p_{ijk}^l; missing keys are zero."""

    class_count: int
    values: dict[tuple[int, int, int, int], int]

    def __getitem__(self, key) -> int:
        return self.values.get(tuple(key), 0)

    def row(self, i: int, j: int, k: int) -> np.ndarray:
        out = np.zeros(self.class_count, dtype=np.int64)
        for l in range(self.class_count):
            out[l] = self.values.get((i, j, k, l), 0)
        return out

    def items(self):
        return sorted(self.values.items())

    def __eq__(self, other):
        return isinstance(other, IntersectionTensor) and self.values == other.values


def _w_histograms(L: np.ndarray, xs, ys, zs, M: int):
    """For each triple b, counts of codes (i*M + j)*M + k over all w.

    Returns flat arrays (b, code, count) sorted by (b, code).
    """
    N = L.shape[0]
    w = np.arange(N)[None, :]
    xs, ys, zs = (np.asarray(a, dtype=np.int64)[:, None] for a in (xs, ys, zs))
    code = (L[w, ys, zs].astype(np.int64) * M + L[xs, w, zs]) * M + L[xs, ys, w]
    key = np.arange(code.shape[0], dtype=np.int64)[:, None] * M**3 + code
    uniq, counts = np.unique(key.ravel(), return_counts=True)
    return uniq // M**3, uniq % M**3, counts


def representative_tensor(partition) -> IntersectionTensor:
    """p_{ijk}^l counted at the encoding-minimal triple of each class."""
    L = _cube(partition)
    N = L.shape[0]
    M = int(L.max()) + 1
    flat = L.ravel()
    _, first = np.unique(flat, return_index=True)
    reps = np.array([_triple(int(i), N) for i in first])
    b, code, cnt = _w_histograms(L, reps[:, 0], reps[:, 1], reps[:, 2], M)
    values = {}
    for bb, c, n in zip(b.tolist(), code.tolist(), cnt.tolist()):
        i, r = divmod(c, M * M)
        j, k = divmod(r, M)
        values[(i, j, k, bb)] = n
    return IntersectionTensor(M, values)


def _tensor_lookup(tensor: IntersectionTensor, M: int):
    """Sorted keys l*M^3 + (i*M + j)*M + k and their values."""
    items = sorted(((l * M + i) * M + j) * M + k for (i, j, k, l) in tensor.values)
    keys = np.array(items, dtype=np.int64)
    vals = np.empty(keys.size, dtype=np.int64)
    for n, key in enumerate(items):
        l, r = divmod(key, M**3)
        i, r = divmod(r, M * M)
        j, k = divmod(r, M)
        vals[n] = tensor.values[(i, j, k, l)]
    return keys, vals


def _check_triples(L, lookup, xs, ys, zs, M):
    """Index (into the batch) of the first triple whose w-counts disagree, else None.

    Only the observed codes are compared: observed and expected counts both
    sum to |Omega|, so agreement on the observed support forces equality.
    """
    keys, vals = lookup
    b, code, cnt = _w_histograms(L, xs, ys, zs, M)
    cls = L[np.asarray(xs)[b], np.asarray(ys)[b], np.asarray(zs)[b]].astype(np.int64)
    want = cls * M**3 + code
    pos = np.clip(np.searchsorted(keys, want), 0, keys.size - 1)
    ok = (keys[pos] == want) & (vals[pos] == cnt)
    if ok.all():
        return None
    return int(b[np.flatnonzero(~ok)[0]])


def _witness(L, tensor, x, y, z, M):
    b, code, cnt = _w_histograms(L, [x], [y], [z], M)
    l = int(L[x, y, z])
    found = {int(c): int(n) for c, n in zip(code, cnt)}
    expected = {((i * M + j) * M + k): v for (i, j, k, ll), v in tensor.values.items() if ll == l}
    for c in sorted(set(found) | set(expected)):
        if found.get(c, 0) != expected.get(c, 0):
            i, r = divmod(c, M * M)
            j, k = divmod(r, M)
            return {"triple": [x, y, z], "class": l, "ijk": [i, j, k],
                    "expected": expected.get(c, 0), "found": found.get(c, 0)}
    return {"triple": [x, y, z], "class": l}


def verify_principal_regularity(
    partition,
    mode: str = "full",
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> ConditionResult:
    """Constancy of the w-counts over each class.

    The reference p_{ijk}^l is taken at each class's minimal triple.  Mode
    ``full`` re-counts at every triple of V^3.  Mode ``sampled`` re-counts
    at every triple of R_0 and of the smallest nontrivial class, plus
    ``samples`` seeded random triples of each remaining class.  The
    resulting tensor does not depend on the seed.
    """
    L = _cube(partition)
    N = L.shape[0]
    M = int(L.max()) + 1
    tensor = representative_tensor(L)
    lookup = _tensor_lookup(tensor, M)
    name = "principal_regularity"

    if mode == "full":
        yy, zz = np.divmod(np.arange(N * N), N)
        for x in range(N):
            xs = np.full(N * N, x)
            bad = _check_triples(L, lookup, xs, yy, zz, M)
            if bad is not None:
                return ConditionResult(name, False, witness=_witness(L, tensor, x, int(yy[bad]), int(zz[bad]), M),
                                       detail="intersection count differs within a class (full sweep)")
        return ConditionResult(name, True, value=tensor, detail="full")

    if mode != "sampled":
        raise ValueError(f"unknown regularity mode {mode!r}")
    sizes = np.bincount(L.ravel(), minlength=M)
    smallest = 4 + int(np.argmin(sizes[4:])) if M > 4 else 0
    rng = np.random.default_rng(seed)
    flat = L.ravel()
    chosen = []
    for c in range(M):
        members = np.flatnonzero(flat == c)
        if c in (0, smallest) or members.size <= samples:
            chosen.append(members)
        else:
            chosen.append(np.sort(rng.choice(members, size=samples, replace=False)))
    idx = np.sort(np.concatenate(chosen))
    batch = 4096
    for start in range(0, idx.size, batch):
        part = idx[start : start + batch]
        xs, ys, zs = part // (N * N), (part // N) % N, part % N
        bad = _check_triples(L, lookup, xs, ys, zs, M)
        if bad is not None:
            return ConditionResult(name, False, witness=_witness(L, tensor, int(xs[bad]), int(ys[bad]), int(zs[bad]), M),
                                   detail="intersection count differs within a class (sampled)")
    return ConditionResult(name, True, value=tensor, detail="sampled")


def default_regularity_mode(omega_size: int) -> str:
    return "full" if omega_size <= FULL_REGULARITY_LIMIT else "sampled"


def verify_ast(partition, mode: str | None = None, samples: int = DEFAULT_SAMPLES,
               seed: int = DEFAULT_SEED) -> VerificationReport:
    """Run all four axioms; later checks are skipped once the trivial ids are wrong."""
    L = _cube(partition)
    if mode is None:
        mode = default_regularity_mode(L.shape[0])
    report = VerificationReport()
    report.conditions.append(verify_trivial_relations(L))
    if not report.conditions[0].passed:
        return report
    report.conditions.append(verify_valency_condition(L))
    report.conditions.append(verify_principal_regularity(L, mode, samples, seed))
    report.conditions.append(verify_s3_closure(L))
    return report


# ---------------------------------------------------------------------------
# comparing partitions


@dataclass
class Comparison:
    verdict: str  # "equal", "a_refines_b", "b_refines_a", "incomparable"
    witness: dict | None = None

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _split_class(src: np.ndarray, dst: np.ndarray):
    """First class of ``src`` that meets two or more classes of ``dst``."""
    _, cnt = np.unique(src, return_counts=True)
    dup = np.flatnonzero(cnt > 1)
    if dup.size == 0:
        return None
    c = int(np.unique(src)[dup[0]])
    return c, sorted(set(dst[src == c].tolist()))


def compare_partitions(a, b) -> Comparison:
    A, B = _cube(a).astype(np.int64), _cube(b).astype(np.int64)
    if A.shape != B.shape:
        raise ValueError(f"partitions live on different sets: {A.shape[0]} vs {B.shape[0]} points")
    Mb = int(B.max()) + 1
    pairs = np.unique((A * Mb + B).ravel())
    pa, pb = pairs // Mb, pairs % Mb
    a_split = _split_class(pa, pb)  # an A class meeting several B classes
    b_split = _split_class(pb, pa)  # a B class meeting several A classes
    if a_split is None and b_split is None:
        return Comparison("equal")
    if a_split is None:
        return Comparison("a_refines_b", {"b_class": b_split[0], "a_classes": b_split[1]})
    if b_split is None:
        return Comparison("b_refines_a", {"a_class": a_split[0], "b_classes": a_split[1]})
    return Comparison("incomparable", {"a_class": a_split[0], "b_classes": a_split[1]})
