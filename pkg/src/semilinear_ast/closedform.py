"""Closed-form parameters of ASL_H(k, n) schemes and their brute-force crosscheck.

For k = 2 every nontrivial relation is named by a transversal element:

* ``R^a``  (type 1, a != 0, 1): the class of (0, e1, (a, 0)),
* ``^aR``  (type 2, a != 0):    the class of (0, e1, (0, a)),

and for k >= 3 the type-2 family collapses to a single class ``BIG``, the
class of (0, e1, e2).

The set-cardinality formulas are evaluated by enumerating triples of
automorphisms in H, which is exact and cheap (|H| <= alpha).  Where the
stated formula disagrees with direct orbit counting, a ``corrected``
evaluation is available; the crosscheck reports both.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .action import GroupSpec, TriplePartition, encode, label_all_triples
from .gf import FieldTower, burnside_orbit_count, degree_over_subfield, h_orbit_transversal
from .scheme import (
    FULL_REGULARITY_LIMIT,
    DEFAULT_SEED,
    compare_partitions,
    representative_tensor,
    verify_principal_regularity,
)

CROSSCHECK_FULL_LIMIT = 128


class NoClosedForm(ValueError):
    """The operand pattern is not covered by any closed form; use brute force."""


@dataclass(frozen=True, order=True)
class RelationName:
    kind: str  # "trivial", "type1", "type2", "big"
    value: int = 0  # trivial index, or the transversal element

    @property
    def label(self) -> str:
        if self.kind == "trivial":
            return f"R{self.value}"
        if self.kind == "type1":
            return f"R^{self.value}"
        if self.kind == "type2":
            return f"^{self.value}R"
        return "BIG"

    def __str__(self):
        return self.label

    @property
    def trivial(self) -> bool:
        return self.kind == "trivial"


TRIVIAL = tuple(RelationName("trivial", i) for i in range(4))


def type1(a: int) -> RelationName:
    return RelationName("type1", a)


def type2(a: int) -> RelationName:
    return RelationName("type2", a)


BIG = RelationName("big")


def expected_names(spec: GroupSpec) -> list[RelationName]:
    """Nontrivial names for ASL_H(k, n), in relation-id order."""
    T = h_orbit_transversal(spec.tower)
    names = [type1(a) for a in T if a != 1]
    if spec.k == 2:
        names += [type2(a) for a in T]
    else:
        names.append(BIG)
    return names


def base_vector(spec: GroupSpec, name: RelationName) -> int:
    """Encoding of z with (0, e1, z) in the named class."""
    n, k = spec.n, spec.k
    if name.kind == "type1":
        return name.value
    if name.kind == "type2":
        return encode((0, name.value) + (0,) * (k - 2), n)
    if name.kind == "big":
        return encode((0, 1) + (0,) * (k - 2), n)
    raise ValueError(f"{name} has no base vector")


def name_relations(spec: GroupSpec, partition: TriplePartition) -> dict[int, RelationName]:
    """Match every relation id of ``partition`` with its name.

    Raises ValueError unless the matching is a bijection.
    """
    names = dict(enumerate(TRIVIAL))
    for name in expected_names(spec):
        rid = partition.label(0, 1, base_vector(spec, name))
        if rid in names:
            raise ValueError(f"{name} and {names[rid]} fall in the same class {rid}")
        names[rid] = name
    if len(names) != partition.class_count:
        raise ValueError(f"{partition.class_count} classes but {len(names)} names")
    return names


# ---------------------------------------------------------------------------
# relation counts and third valencies


@dataclass(frozen=True)
class RelationCounts:
    type1: int
    type2: int  # 0 when k >= 3
    big: int  # 1 when k >= 3

    @property
    def nontrivial(self) -> int:
        return self.type1 + self.type2 + self.big


def predict_relation_counts(spec: GroupSpec) -> RelationCounts:
    if spec.variant != "asl":
        raise ValueError("closed forms are stated for ASL_H only")
    B = burnside_orbit_count(spec.tower)
    if spec.k == 2:
        return RelationCounts(B - 2, B - 1, 0)
    return RelationCounts(B - 2, 0, 1)


def predict_third_valencies(spec: GroupSpec) -> dict[RelationName, int]:
    if spec.variant != "asl":
        raise ValueError("closed forms are stated for ASL_H only")
    F = spec.tower
    out = {}
    for name in expected_names(spec):
        if name.kind == "type1":
            out[name] = degree_over_subfield(F, name.value)
        elif name.kind == "type2":
            out[name] = F.n * degree_over_subfield(F, name.value)
        else:
            out[name] = F.n**spec.k - F.n
    return out


# ---------------------------------------------------------------------------
# products of three nontrivial relations (k = 2)


class _Ops:
    """Field shorthands bound to one tower."""

    def __init__(self, F: FieldTower):
        self.F = F
        self.H = F.subgroup
        self.T = h_orbit_transversal(F).representatives

    def conj(self, a: int) -> list[int]:
        return self.H.images(a)

    def add(self, *xs):
        out = 0
        for x in xs:
            out = self.F.add(out, x)
        return out

    def sub(self, a, b):
        return self.F.sub(a, b)

    def mul(self, a, b):
        return self.F.mul(a, b)

    def div(self, a, b):
        return self.F.div(a, b)

    def neg(self, a):
        return self.F.neg(a)


def _pattern(names: Iterable[RelationName]) -> str:
    return "".join("1" if n.kind == "type1" else "2" for n in names)


def predict_nontrivial_products(
    spec: GroupSpec, i: RelationName, j: RelationName, k: RelationName, corrected: bool = False
) -> dict[RelationName, int]:
    """Coefficient map l -> p_{ijk}^l for three nontrivial relations of ASL_H(2, n).

    Outputs outside the returned map are zero.  Type-1 coefficients are
    indexed by T minus {1}, type-2 coefficients by T, and every index of the
    summation range is present (zeros included).
    """
    if spec.k != 2:
        raise NoClosedForm("product formulas are stated for k = 2")
    if any(r.kind not in ("type1", "type2") for r in (i, j, k)):
        raise NoClosedForm("all three operands must be nontrivial")
    op = _Ops(spec.tower)
    F = spec.tower
    T1 = [l for l in op.T if l != 1]
    pat = _pattern((i, j, k))

    if pat == "111":
        a, b, c = i.value, j.value, k.value
        out = {}
        for l in T1:
            hits = {
                g for g in op.conj(c)
                if any(op.add(op.mul(op.sub(1, g), ta), g) == l for ta in op.conj(a))
                and any(op.mul(g, sb) == l for sb in op.conj(b))
            }
            out[type1(l)] = len(hits)
        return out

    if pat in ("112", "121", "211"):
        return {}

    if pat == "221":
        A, Bf, c = i.value, j.value, k.value
        out = {}
        for l in op.T:
            hits = set()
            for g in op.conj(c):
                if g == 1:
                    continue
                if any(op.div(ta, op.sub(1, g)) == l for ta in op.conj(A)) and any(
                    op.div(sb, g) == l for sb in op.conj(Bf)
                ):
                    hits.add(g)
            out[type2(l)] = len(hits)
        return out

    if pat == "212":
        A, c, Bf = i.value, j.value, k.value
        out = {}
        for l in op.T:
            hits = {
                sb for sb in op.conj(Bf)
                if any(op.mul(sb, g) == l for g in op.conj(c))
                and any(op.add(ta, sb) == l for ta in op.conj(A))
            }
            out[type2(l)] = len(hits)
        return out

    if pat == "122":
        c, A, Bf = i.value, j.value, k.value
        out = {}
        for l in op.T:
            hits = set()
            for sb in op.conj(Bf):
                for g in op.conj(c):
                    if op.mul(sb, op.sub(1, g)) != l:
                        continue
                    if any(op.div(op.mul(ta, op.sub(g, 1)), g) == l for ta in op.conj(A)):
                        hits.add(sb)
            out[type2(l)] = len(hits)
        return out

    # pat == "222"
    A, Bf, C = i.value, j.value, k.value
    factor = F.n if corrected else F.q
    out = {}
    for l in T1:
        hits = {
            g for g in op.conj(C)
            if any(op.div(op.add(ta, g), g) == l for ta in op.conj(A))
            and any(op.neg(op.div(sb, g)) == l for sb in op.conj(Bf))
        }
        out[type1(l)] = factor * len(hits)
    for jj in op.T:
        if corrected:
            hits = {
                (g, sb)
                for g in set(op.conj(C))
                for sb in set(op.conj(Bf))
                if op.sub(op.sub(jj, g), sb) in set(op.conj(A))
            }
        else:
            hits = {
                sb for sb in op.conj(Bf)
                if any(op.add(ta, sb, g) == jj for ta in op.conj(A) for g in op.conj(C))
            }
        out[type2(jj)] = len(hits)
    return out


# ---------------------------------------------------------------------------
# products with exactly one trivial operand (k = 2)


def predict_one_trivial_products(
    spec: GroupSpec, i: RelationName, j: RelationName, k: RelationName, corrected: bool = False
) -> tuple[RelationName, int]:
    """(output relation, coefficient) for R_t in slot t, t in {1, 2, 3}.

    The product is that multiple of the single trivial relation R_t; all
    other coefficients vanish.
    """
    if spec.k != 2:
        raise NoClosedForm("product formulas are stated for k = 2")
    ops = (i, j, k)
    triv = [s for s, r in enumerate(ops) if r.trivial]
    if len(triv) != 1:
        raise NoClosedForm("exactly one operand must be trivial")
    slot = triv[0]
    t = ops[slot]
    if t.value != slot + 1:
        raise NoClosedForm(f"{t} in slot {slot + 1} is not covered")
    rest = [r for r in ops if not r.trivial]
    if any(r.kind not in ("type1", "type2") for r in rest):
        raise NoClosedForm("nontrivial operands must be named type-1 or type-2 relations")
    op = _Ops(spec.tower)
    F = spec.tower
    pat = _pattern(rest)
    if pat in ("12", "21"):
        return t, 0
    if pat == "22":
        A, Bf = rest[0].value, rest[1].value
        hits = {sb for sb in op.conj(Bf) if any(ta == op.neg(sb) for ta in op.conj(A))}
        return t, (F.n if corrected else F.q) * len(hits)
    a, b = rest[0].value, rest[1].value
    if slot == 0:
        cond = lambda ta, sb: op.mul(ta, sb) == 1  # noqa: E731
    elif slot == 1:
        cond = lambda ta, sb: op.mul(ta, sb) == op.add(ta, sb)  # noqa: E731
    else:
        cond = lambda ta, sb: op.add(ta, sb) == 1  # noqa: E731
    hits = {sb for sb in op.conj(b) if any(cond(ta, sb) for ta in op.conj(a))}
    return t, len(hits)


# ---------------------------------------------------------------------------
# crosscheck


@dataclass
class PredictionLine:
    quantity: str
    predicted: int | str
    actual: int | str
    source: str
    corrected: int | str | None = None

    @property
    def match(self) -> bool:
        return self.predicted == self.actual

    @property
    def status(self) -> str:
        if self.match:
            return "match"
        if self.corrected is not None and self.corrected == self.actual:
            return "corrected"
        return "mismatch"

    def to_dict(self) -> dict:
        out = {
            "quantity": self.quantity,
            "predicted": self.predicted,
            "actual": self.actual,
            "match": self.match,
            "source": self.source,
            "status": self.status,
        }
        if self.corrected is not None:
            out["corrected"] = self.corrected
        return out


@dataclass
class PredictionReport:
    lines: list[PredictionLine] = field(default_factory=list)
    oracles: dict[str, str] = field(default_factory=dict)

    def add(self, *args, **kw):
        self.lines.append(PredictionLine(*args, **kw))

    @property
    def strict_clean(self) -> bool:
        """Every stated formula agrees with brute force."""
        return all(line.match for line in self.lines) and self._oracles_ok

    @property
    def clean(self) -> bool:
        """Brute force agrees with the stated or the corrected formula everywhere."""
        return all(line.status != "mismatch" for line in self.lines) and self._oracles_ok

    @property
    def _oracles_ok(self) -> bool:
        return all(v != "disagree" for v in self.oracles.values())

    def by_status(self, status: str) -> list[PredictionLine]:
        return [line for line in self.lines if line.status == status]

    def summary(self) -> dict:
        counts = {"match": 0, "corrected": 0, "mismatch": 0}
        for line in self.lines:
            counts[line.status] += 1
        return {"lines": len(self.lines), **counts, "clean": self.clean, "strict_clean": self.strict_clean}


def _product_quantity(i, j, k, l) -> str:
    return f"p[{i},{j},{k}->{l}]"


def crosscheck(
    spec: GroupSpec,
    partition: TriplePartition | None = None,
    *,
    full_limit: int = CROSSCHECK_FULL_LIMIT,
    workers: int = 1,
    seed: int = DEFAULT_SEED,
) -> PredictionReport:
    """Compare every closed form with the orbit partition of ``spec``.

    Intersection numbers come from the representative-triple count; when
    |V| <= ``full_limit`` every triple of every class is re-counted as a
    second, independent confirmation (``oracles["full_class"]``).
    """
    if spec.variant != "asl":
        raise ValueError("closed forms are stated for ASL_H only")
    if partition is None:
        partition = label_all_triples(spec, workers=workers)
    report = PredictionReport()
    names = name_relations(spec, partition)
    ids = {v: k for k, v in names.items()}
    N = partition.omega_size
    report.oracles["representative"] = "ok"

    counts = predict_relation_counts(spec)
    observed = [names[c] for c in range(4, partition.class_count)]
    report.add("relations.type1", counts.type1, sum(n.kind == "type1" for n in observed), "counts")
    if spec.k == 2:
        report.add("relations.type2", counts.type2, sum(n.kind == "type2" for n in observed), "counts")
    else:
        report.add("relations.big", counts.big, sum(n.kind == "big" for n in observed), "counts")
    report.add("relations.nontrivial", counts.nontrivial, partition.class_count - 4, "counts")

    sizes = partition.class_sizes
    pairs = N * (N - 1)
    for name, val in predict_third_valencies(spec).items():
        actual = int(sizes[ids[name]]) // pairs
        report.add(f"valency3[{name}]", val, actual, f"valency:{name.kind}")

    if spec.k >= 3:
        agl = label_all_triples(GroupSpec("agl", spec.k, spec.tower), workers=workers)
        verdict = compare_partitions(partition, agl).verdict
        report.add("partition[asl vs agl]", "equal", verdict, "k>=3 equality")
        identical = partition.labels.tobytes() == agl.labels.tobytes()
        report.add("labels[asl vs agl]", "identical", "identical" if identical else "different", "k>=3 equality")
        return report

    tensor = representative_tensor(partition)
    if N <= full_limit:
        full = verify_principal_regularity(partition, "full")
        report.oracles["full_class"] = "agree" if full.passed and full.value == tensor else "disagree"
    else:
        report.oracles["full_class"] = "skipped"

    nontrivial = [names[c] for c in range(4, partition.class_count)]
    all_ids = range(partition.class_count)
    for i, j, k in itertools.product(nontrivial, repeat=3):
        lit = predict_nontrivial_products(spec, i, j, k)
        cor = predict_nontrivial_products(spec, i, j, k, corrected=True)
        src = f"product:{_pattern((i, j, k))}"
        for l in all_ids:
            lname = names[l]
            actual = tensor[(ids[i], ids[j], ids[k], l)]
            p, c = lit.get(lname, 0), cor.get(lname, 0)
            report.add(_product_quantity(i, j, k, lname), p, actual, src, c if c != p else None)

    for slot in range(3):
        t = TRIVIAL[slot + 1]
        for r1, r2 in itertools.product(nontrivial, repeat=2):
            ops = [r1, r2]
            ops.insert(slot, t)
            out, p = predict_one_trivial_products(spec, *ops)
            _, c = predict_one_trivial_products(spec, *ops, corrected=True)
            src = f"one-trivial:{t}@{slot + 1}:{_pattern((r1, r2))}"
            for l in all_ids:
                lname = names[l]
                actual = tensor[(ids[ops[0]], ids[ops[1]], ids[ops[2]], l)]
                pl, cl = (p, c) if lname == out else (0, 0)
                report.add(_product_quantity(*ops, lname), pl, actual, src, cl if cl != pl else None)
    return report


def relation_table(spec: GroupSpec, partition: TriplePartition) -> list[dict]:
    """Per-relation name, size and (where defined) the predicted third valency."""
    names = name_relations(spec, partition) if spec.variant == "asl" else None
    sizes = partition.class_sizes
    rows = []
    for c in range(partition.class_count):
        rows.append({"id": c, "name": names[c].label if names else _agl_name(spec, partition, c), "size": int(sizes[c])})
    return rows


def _agl_name(spec: GroupSpec, partition: TriplePartition, c: int) -> str:
    if c < 4:
        return TRIVIAL[c].label
    # AGL classes are named after the encoding-minimal z with (0, e1, z) in them
    row = partition.labels[0, 1]
    z = int(np.flatnonzero(row == c)[0])
    return f"O[{z}]"
