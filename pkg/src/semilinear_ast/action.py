"""Affine (special) semilinear groups acting on V = GF(n)^k, and triple labeling.

Vectors are encoded densely as ``sum(v[i] * n**i)`` so that the vector
(a, 0, ..., 0) has encoding ``a``; in particular the base pair
(0-vector, 1-vector) is encoded as (0, 1).

The orbit partition of V^3 is computed from two ingredients:

* the orbits of the two-point stabilizer of (0, 1) on V, and
* a transporter x, y -> (0, 1) built from SL(k, n) alone.

Relation ids 0-3 are the trivial relations, ``4 + s`` is the relation
whose base-pair slice is stabilizer orbit ``s``.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .gf import FieldTower, GaloisSubgroup

logger = logging.getLogger(__name__)

VARIANTS = ("asl", "agl")
MAX_LABEL_DOMAIN = 256
MAX_ORACLE_DOMAIN = 64

ZERO_ORBIT = -1
ONE_ORBIT = -2


class ResourceLimitError(RuntimeError):
    """The requested computation exceeds a documented size bound."""


# ---------------------------------------------------------------------------
# vectors and matrices over GF(n)


def encode(coords: Sequence[int], n: int) -> int:
    return sum(int(c) * n**i for i, c in enumerate(coords))


def decode(v: int, n: int, k: int) -> tuple[int, ...]:
    out = []
    for _ in range(k):
        v, c = divmod(v, n)
        out.append(c)
    return tuple(out)


def all_coords(n: int, k: int) -> np.ndarray:
    """(n**k, k) array; row v holds the coordinates of encoding v."""
    idx = np.arange(n**k, dtype=np.int64)
    return (idx[:, None] // (n ** np.arange(k, dtype=np.int64))) % n


def encode_array(coords: np.ndarray, n: int) -> np.ndarray:
    k = coords.shape[-1]
    return coords @ (n ** np.arange(k, dtype=np.int64))


def identity_matrix(k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(i == j) for j in range(k)) for i in range(k))


def mat_vec(F: FieldTower, A, v) -> tuple[int, ...]:
    out = []
    for row in A:
        acc = 0
        for a, x in zip(row, v):
            acc = F.add(acc, F.mul(a, x))
        out.append(acc)
    return tuple(out)


def mat_mul(F: FieldTower, A, B) -> tuple[tuple[int, ...], ...]:
    cols = list(zip(*B))
    return tuple(tuple(mat_vec(F, [row], c)[0] for c in cols) for row in A)


def _row_reduce(F: FieldTower, A, B=None):
    """Gauss-Jordan on [A | B]; returns (det(A), reduced B or None)."""
    k = len(A)
    M = [list(row) + (list(B[i]) if B is not None else []) for i, row in enumerate(A)]
    det = 1
    for col in range(k):
        piv = next((r for r in range(col, k) if M[r][col]), None)
        if piv is None:
            return 0, None
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = F.neg(det)
        pv = M[col][col]
        det = F.mul(det, pv)
        inv = F.inv(pv)
        M[col] = [F.mul(inv, x) for x in M[col]]
        for r in range(k):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [F.sub(x, F.mul(f, y)) for x, y in zip(M[r], M[col])]
    if B is None:
        return det, None
    return det, tuple(tuple(row[k:]) for row in M)


def det(F: FieldTower, A) -> int:
    return _row_reduce(F, A)[0]


def mat_inv(F: FieldTower, A):
    d, inv = _row_reduce(F, A, identity_matrix(len(A)))
    if d == 0:
        raise ZeroDivisionError("singular matrix")
    return inv


# ---------------------------------------------------------------------------
# semilinear maps


@dataclass(frozen=True)
class SemilinearMap:
    """v -> A phi(v) + b, where phi(x) = x^(p^frob) coordinatewise."""

    matrix: tuple[tuple[int, ...], ...]
    translation: tuple[int, ...]
    frob: int
    field: FieldTower = field(compare=False, repr=False)

    @property
    def k(self) -> int:
        return len(self.translation)

    def __call__(self, v: Sequence[int]) -> tuple[int, ...]:
        return apply(self, v)

    def compose(self, other: SemilinearMap) -> SemilinearMap:
        """self o other (apply ``other`` first)."""
        F = self.field
        fa = lambda a: F.frobenius(self.frob, a)  # noqa: E731
        A2 = tuple(tuple(fa(a) for a in row) for row in other.matrix)
        b2 = tuple(fa(b) for b in other.translation)
        A = mat_mul(F, self.matrix, A2)
        b = tuple(F.add(x, y) for x, y in zip(mat_vec(F, self.matrix, b2), self.translation))
        return SemilinearMap(A, b, (self.frob + other.frob) % F.alpha, F)

    def det(self) -> int:
        return det(self.field, self.matrix)

    def permutation(self, coords: np.ndarray | None = None) -> np.ndarray:
        """Image encoding of every vector of V, as an int array of length n**k."""
        F, k = self.field, self.k
        if coords is None:
            coords = all_coords(F.n, k)
        img = image_coords(F, self.matrix, F.frob[self.frob % F.alpha][coords])
        img = F.vadd(img, np.asarray(self.translation, dtype=np.int64)[None, :])
        return encode_array(img, F.n)


def image_coords(F: FieldTower, A, coords: np.ndarray) -> np.ndarray:
    """A applied to each row of ``coords``."""
    k = len(A)
    out = np.zeros_like(coords)
    for i in range(k):
        acc = np.zeros(coords.shape[0], dtype=np.int64)
        for j in range(k):
            if A[i][j]:
                acc = F.vadd(acc, F.vmul(A[i][j], coords[:, j]))
        out[:, i] = acc
    return out


def apply(g: SemilinearMap, v: Sequence[int]) -> tuple[int, ...]:
    if len(v) != g.k:
        raise ValueError(f"vector of length {len(v)} for a map on GF(n)^{g.k}")
    F = g.field
    phv = [F.frobenius(g.frob, x) for x in v]
    return tuple(F.add(x, b) for x, b in zip(mat_vec(F, g.matrix, phv), g.translation))


def identity_map(F: FieldTower, k: int) -> SemilinearMap:
    return SemilinearMap(identity_matrix(k), (0,) * k, 0, F)


def elementary(F: FieldTower, k: int, i: int, j: int, lam: int) -> SemilinearMap:
    """Transvection I + lam * E_ij."""
    A = [list(r) for r in identity_matrix(k)]
    A[i][j] = lam
    return SemilinearMap(tuple(map(tuple, A)), (0,) * k, 0, F)


def diagonal(F: FieldTower, entries: Sequence[int]) -> SemilinearMap:
    k = len(entries)
    A = tuple(tuple(entries[i] if i == j else 0 for j in range(k)) for i in range(k))
    return SemilinearMap(A, (0,) * k, 0, F)


def translation(F: FieldTower, b: Sequence[int]) -> SemilinearMap:
    return SemilinearMap(identity_matrix(len(b)), tuple(b), 0, F)


def frobenius_map(F: FieldTower, k: int, exponent: int) -> SemilinearMap:
    return SemilinearMap(identity_matrix(k), (0,) * k, exponent % F.alpha, F)


# ---------------------------------------------------------------------------
# group parameters


@dataclass(frozen=True)
class GroupSpec:
    """ASL_H(k, n) (variant "asl") or AGL_H(k, n) (variant "agl"), H = Gal(GF(n)/GF(q))."""

    variant: str
    k: int
    tower: FieldTower

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.k < 2:
            raise ValueError("dimension k must be at least 2")

    @property
    def H(self) -> GaloisSubgroup:
        return self.tower.subgroup

    @property
    def n(self) -> int:
        return self.tower.n

    @property
    def domain_size(self) -> int:
        return self.tower.n**self.k

    def describe(self) -> str:
        t = self.tower
        return f"{self.variant.upper()}_H({self.k},{t.n}) with H=Gal(GF({t.n})/GF({t.q}))"

    @cached_property
    def coords(self) -> np.ndarray:
        c = all_coords(self.n, self.k)
        c.setflags(write=False)
        return c

    def contains_matrix(self, A) -> bool:
        d = det(self.tower, A)
        return d == 1 if self.variant == "asl" else d != 0


def additive_basis(F: FieldTower) -> list[int]:
    """x^0, ..., x^(alpha-1): a GF(p)-basis of GF(n)."""
    return [F.p**i for i in range(F.alpha)]


def group_generators(spec: GroupSpec) -> list[SemilinearMap]:
    """A generating set for the whole group.

    Transvections E_ij(lambda) with lambda in an additive basis generate
    SL(k, n); diag(g, 1, ..., 1) with g primitive extends this to GL(k, n).
    Translations by the standard basis are conjugated by SL onto every
    nonzero vector, and the Frobenius x -> x^q generates H.
    """
    F, k = spec.tower, spec.k
    gens = [
        elementary(F, k, i, j, lam)
        for i, j in itertools.permutations(range(k), 2)
        for lam in additive_basis(F)
    ]
    if spec.variant == "agl" and F.n > 2:
        gens.append(diagonal(F, [F.generator] + [1] * (k - 1)))
    gens.extend(translation(F, [int(i == j) for j in range(k)]) for i in range(k))
    if spec.H.order > 1:
        gens.append(frobenius_map(F, k, F.omega))
    return gens


# ---------------------------------------------------------------------------
# two-point stabilizer of (0-vector, 1-vector)


def _gl_order(m: int, n: int) -> int:
    out = 1
    for i in range(m):
        out *= n**m - n**i
    return out


class TwoPointStabilizer:
    """All g in the group with g(0) = 0 and g(e1) = e1.

    Such g have the form v -> A phi(v) with A e1 = e1, i.e.
    A = [[1, r], [0, B]] with r in GF(n)^(k-1) and B in SL(k-1, n)
    (resp. GL(k-1, n)), and phi in H.  For k = 2 and ASL this is the
    family of unitriangular matrices [[1, c], [0, 1]].
    """

    def __init__(self, spec: GroupSpec):
        self.spec = spec

    def __len__(self) -> int:
        F, k = self.spec.tower, self.spec.k
        lower = _gl_order(k - 1, F.n)
        if self.spec.variant == "asl":
            lower //= F.n - 1
        return F.n ** (k - 1) * lower * self.spec.H.order

    def _lower_blocks(self) -> Iterator[tuple[tuple[int, ...], ...]]:
        F, m = self.spec.tower, self.spec.k - 1
        for entries in itertools.product(range(F.n), repeat=m * m):
            B = tuple(tuple(entries[i * m : (i + 1) * m]) for i in range(m))
            d = det(F, B)
            if (d == 1) if self.spec.variant == "asl" else (d != 0):
                yield B

    def __iter__(self) -> Iterator[SemilinearMap]:
        F, k = self.spec.tower, self.spec.k
        for e in self.spec.H.exponents:
            for B in self._lower_blocks():
                for r in itertools.product(range(F.n), repeat=k - 1):
                    A = ((1,) + r,) + tuple((0,) + row for row in B)
                    yield SemilinearMap(A, (0,) * k, e, F)

    def generators(self) -> list[SemilinearMap]:
        """Generators: E_1j(lambda), transvections inside the lower block,
        a primitive diagonal entry for AGL, and the Frobenius of H."""
        F, k = self.spec.tower, self.spec.k
        basis = additive_basis(F)
        gens = [elementary(F, k, 0, j, lam) for j in range(1, k) for lam in basis]
        gens += [
            elementary(F, k, i, j, lam)
            for i, j in itertools.permutations(range(1, k), 2)
            for lam in basis
        ]
        if self.spec.variant == "agl" and F.n > 2:
            gens.append(diagonal(F, [1] * (k - 1) + [F.generator]))
        if self.spec.H.order > 1:
            gens.append(frobenius_map(F, k, F.omega))
        return gens


def two_point_stabilizer(spec: GroupSpec) -> TwoPointStabilizer:
    return TwoPointStabilizer(spec)


def _components(perms: list[np.ndarray], size: int) -> np.ndarray:
    """Connected components of the graph v -- perm[v], labelled by minimum member."""
    if perms:
        src = np.concatenate([np.arange(size)] * len(perms))
        dst = np.concatenate(perms)
    else:
        src = dst = np.arange(size)
    graph = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(size, size))
    _, comp = connected_components(graph, directed=True, connection="weak")
    # relabel each component by its minimum member
    first = np.full(comp.max() + 1, size, dtype=np.int64)
    np.minimum.at(first, comp, np.arange(size))
    return first[comp]


@dataclass(frozen=True)
class StabilizerOrbits:
    """Orbits of the two-point stabilizer on V minus {0, e1}.

    ``orbit_of[v]`` is the orbit id (0-based, ordered by minimum member) or
    ZERO_ORBIT / ONE_ORBIT for the base pair.
    """

    orbit_of: np.ndarray
    representatives: tuple[int, ...]
    sizes: tuple[int, ...]

    def __len__(self):
        return len(self.representatives)

    def members(self, s: int) -> np.ndarray:
        return np.flatnonzero(self.orbit_of == s)


def stabilizer_orbits_on_domain(spec: GroupSpec) -> StabilizerOrbits:
    N = spec.domain_size
    perms = [g.permutation(spec.coords) for g in two_point_stabilizer(spec).generators()]
    for perm in perms:
        assert perm[0] == 0 and perm[1] == 1
    mins = _components(perms, N)
    reps = sorted(set(mins[2:].tolist()))
    index = {r: i for i, r in enumerate(reps)}
    orbit_of = np.array([index.get(int(m), 0) for m in mins], dtype=np.int64)
    orbit_of[0], orbit_of[1] = ZERO_ORBIT, ONE_ORBIT
    sizes = tuple(int(c) for c in np.bincount(orbit_of[2:], minlength=len(reps)))
    orbit_of.setflags(write=False)
    return StabilizerOrbits(orbit_of, tuple(reps), sizes)


# ---------------------------------------------------------------------------
# transporters


def sl_matrix_to_e1(F: FieldTower, u: Sequence[int]):
    """A in SL(k, n) with A u = e1, for u nonzero."""
    k = len(u)
    r = next((i for i, c in enumerate(u) if c), None)
    if r is None:
        raise ValueError("zero vector cannot be moved to e1")
    # M = [u | e_j for j != r] is invertible; rescale one column to force det 1.
    others = [j for j in range(k) if j != r]
    cols = [list(u)] + [[int(i == j) for i in range(k)] for j in others]
    d = det(F, tuple(zip(*cols)))
    dinv = F.inv(d)
    cols[1] = [F.mul(dinv, c) for c in cols[1]]
    M = tuple(zip(*cols))
    return mat_inv(F, M)


def transporter_to_base(spec: GroupSpec, x: Sequence[int], y: Sequence[int]) -> SemilinearMap:
    """g with g(x) = 0 and g(y) = e1, built as v -> A(v - x) with A in SL(k, n)."""
    F = spec.tower
    x, y = tuple(x), tuple(y)
    if x == y:
        raise ValueError("transporter needs two distinct points")
    u = tuple(F.sub(b, a) for a, b in zip(x, y))
    A = sl_matrix_to_e1(F, u)
    b = tuple(F.neg(c) for c in mat_vec(F, A, x))
    return SemilinearMap(A, b, 0, F)


# ---------------------------------------------------------------------------
# triple partitions


@dataclass(frozen=True)
class TriplePartition:
    """Labels of V^3 indexed ``labels[x, y, z]`` by vector encodings."""

    labels: np.ndarray

    def __post_init__(self):
        L = self.labels
        if L.ndim != 3 or not (L.shape[0] == L.shape[1] == L.shape[2]):
            raise ValueError("labels must be a cube")

    @property
    def omega_size(self) -> int:
        return self.labels.shape[0]

    @cached_property
    def class_count(self) -> int:
        return int(self.labels.max()) + 1

    @cached_property
    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.class_count)

    def label(self, x: int, y: int, z: int) -> int:
        return int(self.labels[x, y, z])

    def representative(self, cls: int) -> tuple[int, int, int]:
        """Encoding-minimal triple of a class."""
        idx = int(np.argmax(self.labels.ravel() == cls))
        N = self.omega_size
        return idx // (N * N), (idx // N) % N, idx % N

    def tobytes(self) -> bytes:
        return self.labels.tobytes()


def label_dtype(count: int):
    return np.uint8 if count <= 256 else np.uint16


def _subtraction_table(spec: GroupSpec) -> np.ndarray:
    """sub[v, x] = encoding of v - x."""
    F, C = spec.tower, spec.coords
    diff = F.vsub(C[:, None, :], C[None, :, :])
    return encode_array(diff, F.n)


def base_slice(spec: GroupSpec, orbits: StabilizerOrbits | None = None) -> np.ndarray:
    """Relation id of (0, u, w) for all u, w, via the SL transporter of (0, u)."""
    if orbits is None:
        orbits = stabilizer_orbits_on_domain(spec)
    F, N, C = spec.tower, spec.domain_size, spec.coords
    dtype = label_dtype(4 + len(orbits))
    S = np.empty((N, N), dtype=dtype)
    S[0, :] = 3  # (0, 0, w): z differs from x = y
    S[0, 0] = 0
    for u in range(1, N):
        A = sl_matrix_to_e1(F, C[u].tolist())
        img = encode_array(image_coords(F, A, C), F.n)
        row = 4 + orbits.orbit_of[img]
        row[0] = 2  # (0, u, 0)
        row[u] = 1  # (0, u, u)
        S[u] = row
    return S


def label_all_triples(
    spec: GroupSpec, workers: int = 1, max_domain: int = MAX_LABEL_DOMAIN
) -> TriplePartition:
    """Orbit partition of V^3 via stabilizer orbits and transporters.

    Translation invariance gives label(x, y, z) = label(0, y - x, z - x),
    so each x-slice is a gather from the base slice.  Slices are disjoint,
    so the output does not depend on ``workers``.
    """
    N = spec.domain_size
    if N > max_domain:
        raise ResourceLimitError(f"|V| = {N} exceeds the labeling bound {max_domain}")
    orbits = stabilizer_orbits_on_domain(spec)
    S = base_slice(spec, orbits)
    sub = _subtraction_table(spec)
    labels = np.empty((N, N, N), dtype=S.dtype)

    def fill(xs):
        for x in xs:
            d = sub[:, x]
            labels[x] = S[d[:, None], d[None, :]]

    step = max(1, N // (4 * max(workers, 1)))
    chunks = [range(i, min(i + step, N)) for i in range(0, N, step)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(fill, chunks))
    else:
        for c in chunks:
            fill(c)
    labels.setflags(write=False)
    logger.debug("labelled %d triples into %d classes", N**3, 4 + len(orbits))
    return TriplePartition(labels)


def canonical_relabel(raw: np.ndarray, N: int) -> np.ndarray:
    """Renumber an arbitrary labelling of V^3: trivial classes get 0-3 by their
    defining triples, the rest are numbered by minimal member."""
    flat = raw.ravel()
    anchors = [0, N + 1, N * N + 1, 1]  # (0,0,0), (0,1,1), (1,0,1), (0,0,1)
    order = [int(flat[a]) for a in anchors]
    _, first = np.unique(flat, return_index=True)
    rest = [int(flat[i]) for i in sorted(first) if int(flat[i]) not in order]
    mapping = np.zeros(int(flat.max()) + 1, dtype=np.int64)
    for new, old in enumerate(order + rest):
        mapping[old] = new
    return mapping[raw].astype(label_dtype(len(order) + len(rest)))


def bfs_orbit_oracle(spec: GroupSpec, max_domain: int = MAX_ORACLE_DOMAIN) -> TriplePartition:
    """Orbits of V^3 under the diagonal action of ``group_generators``.

    Independent of the stabilizer/transporter path: it only closes the
    triple set under the generators (connected components of the Schreier
    graph) and then numbers the classes canonically.
    """
    N = spec.domain_size
    if N > max_domain:
        raise ResourceLimitError(f"|V| = {N} exceeds the oracle bound {max_domain}")
    perms = [g.permutation(spec.coords) for g in group_generators(spec)]
    idx = np.arange(N**3, dtype=np.int64)
    x, y, z = idx // (N * N), (idx // N) % N, idx % N
    triple_perms = [(P[x] * N + P[y]) * N + P[z] for P in perms]
    comp = _components(triple_perms, N**3).reshape(N, N, N)
    labels = canonical_relabel(comp, N)
    labels.setflags(write=False)
    return TriplePartition(labels)
