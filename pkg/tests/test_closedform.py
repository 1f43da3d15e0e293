import itertools
from collections import Counter

import pytest

from semilinear_ast.action import decode
from semilinear_ast.closedform import (
    BIG,
    TRIVIAL,
    NoClosedForm,
    PredictionLine,
    PredictionReport,
    crosscheck,
    expected_names,
    name_relations,
    predict_nontrivial_products,
    predict_one_trivial_products,
    predict_relation_counts,
    predict_third_valencies,
    type1,
    type2,
)
from semilinear_ast.scheme import representative_tensor

from conftest import K2, MATRIX, ids, partition, spec

ASL = MATRIX


def test_relation_count_examples():
    assert predict_relation_counts(spec(2, 2, 1, 2)).nontrivial == 3
    assert predict_relation_counts(spec(3, 1, 1, 2)).nontrivial == 3
    assert predict_relation_counts(spec(2, 3, 1, 2)).nontrivial == 5
    c = predict_relation_counts(spec(2, 1, 1, 3))
    assert (c.type1, c.type2, c.big) == (0, 0, 1)
    with pytest.raises(ValueError):
        predict_relation_counts(spec(2, 2, 1, 2, "agl"))


@pytest.mark.parametrize("m", ASL, ids=ids)
def test_relation_counts_against_brute_force(m):
    s = spec(*m)
    P = partition(*m)
    counts = predict_relation_counts(s)
    assert counts.nontrivial == P.class_count - 4
    kinds = Counter(n.kind for n in name_relations(s, P).values())
    assert kinds["type1"] == counts.type1
    assert kinds["type2"] == counts.type2
    assert kinds["big"] == counts.big


@pytest.mark.parametrize("m", ASL, ids=ids)
def test_third_valencies_against_brute_force(m):
    s = spec(*m)
    P = partition(*m)
    N = P.omega_size
    names = name_relations(s, P)
    ids_ = {v: c for c, v in names.items()}
    pred = predict_third_valencies(s)
    for name, v in pred.items():
        assert P.class_sizes[ids_[name]] == N * (N - 1) * v, name
    assert sum(pred.values()) == N - 2


def test_third_valency_examples():
    s = spec(2, 2, 1, 2)
    g = s.tower.generator
    assert predict_third_valencies(s) == {type1(g): 2, type2(1): 4, type2(g): 8}
    assert predict_third_valencies(spec(2, 2, 1, 3)) == {type1(2): 2, BIG: 60}


@pytest.mark.parametrize("m", ASL, ids=ids)
def test_naming_is_a_bijection_in_id_order(m):
    s = spec(*m)
    names = name_relations(s, partition(*m))
    assert [names[c] for c in range(4)] == list(TRIVIAL)
    assert [names[c] for c in range(4, len(names))] == expected_names(s)


def test_naming_rejects_agl_partition():
    with pytest.raises(ValueError):
        name_relations(spec(2, 2, 1, 2), partition(2, 2, 1, 2, "agl"))


def _det2(F, u, v):
    return F.sub(F.mul(u[0], v[1]), F.mul(u[1], v[0]))


@pytest.mark.parametrize("m", [(2, 2, 1, 2), (3, 2, 1, 2), (2, 3, 1, 2), (5, 1, 1, 2)], ids=ids)
def test_named_relations_have_the_stated_membership_rule(m):
    # R^a: z - x = t (y - x) with t in Ha;  ^aR: det(y - x, z - x) in Ha
    s = spec(*m)
    F, n = s.tower, s.n
    P = partition(*m)
    names = name_relations(s, P)
    H = F.subgroup
    C = [decode(v, n, 2) for v in range(n * n)]
    for x, y, z in itertools.permutations(range(n * n), 3):
        u = tuple(F.sub(a, b) for a, b in zip(C[y], C[x]))
        w = tuple(F.sub(a, b) for a, b in zip(C[z], C[x]))
        name = names[int(P.labels[x, y, z])]
        d = _det2(F, u, w)
        if d == 0:
            assert name.kind == "type1"
            t = F.div(w[0], u[0]) if u[0] else F.div(w[1], u[1])
            assert t in H.orbit(name.value)
        else:
            assert name.kind == "type2" and d in H.orbit(name.value)


def test_summation_ranges():
    s = spec(2, 3, 1, 2)
    T = list(name.value for name in expected_names(s) if name.kind == "type2")
    T1 = [a for a in T if a != 1]
    a = T1[0]
    assert set(predict_nontrivial_products(s, type1(a), type1(a), type1(a))) == {type1(l) for l in T1}
    for ops in [(type2(1), type2(1), type1(a)), (type2(1), type1(a), type2(1)), (type1(a), type2(1), type2(1))]:
        assert set(predict_nontrivial_products(s, *ops)) == {type2(l) for l in T}
    full = predict_nontrivial_products(s, type2(1), type2(1), type2(1))
    assert set(full) == {type1(l) for l in T1} | {type2(l) for l in T}


@pytest.mark.parametrize("m", K2, ids=ids)
def test_mixed_two_type1_products_vanish(m):
    s = spec(*m)
    P = partition(*m)
    names = name_relations(s, P)
    ids_ = {v: c for c, v in names.items()}
    t1 = [n for n in expected_names(s) if n.kind == "type1"]
    t2 = [n for n in expected_names(s) if n.kind == "type2"]
    tensor = representative_tensor(P)
    for a, b in itertools.product(t1, repeat=2):
        for c in t2:
            for ops in [(a, b, c), (a, c, b), (c, a, b)]:
                assert predict_nontrivial_products(s, *ops) == {}
                assert not any(tensor[tuple(ids_[o] for o in ops) + (l,)] for l in range(P.class_count))


@pytest.mark.parametrize("m", K2, ids=ids)
def test_corrected_products_equal_brute_force(m):
    s = spec(*m)
    P = partition(*m)
    names = name_relations(s, P)
    ids_ = {v: c for c, v in names.items()}
    tensor = representative_tensor(P)
    nontrivial = expected_names(s)
    for ops in itertools.product(nontrivial, repeat=3):
        pred = predict_nontrivial_products(s, *ops, corrected=True)
        row = tensor.row(*(ids_[o] for o in ops))
        assert {names[l]: int(v) for l, v in enumerate(row) if v} == {k: v for k, v in pred.items() if v}, ops


@pytest.mark.parametrize("m", [m for m in K2 if m[1] == m[2]], ids=ids)
def test_stated_products_exact_for_trivial_h(m):
    # with H trivial the stated and corrected forms coincide
    s = spec(*m)
    nontrivial = expected_names(s)
    for ops in itertools.product(nontrivial, repeat=3):
        assert predict_nontrivial_products(s, *ops) == predict_nontrivial_products(s, *ops, corrected=True)
    assert crosscheck(s, partition(*m)).strict_clean


@pytest.mark.parametrize("m", K2, ids=ids)
def test_one_trivial_products_against_brute_force(m):
    s = spec(*m)
    P = partition(*m)
    names = name_relations(s, P)
    ids_ = {v: c for c, v in names.items()}
    tensor = representative_tensor(P)
    nontrivial = expected_names(s)
    for slot in range(3):
        t = TRIVIAL[slot + 1]
        for r1, r2 in itertools.product(nontrivial, repeat=2):
            ops = [r1, r2]
            ops.insert(slot, t)
            out, v = predict_one_trivial_products(s, *ops, corrected=True)
            assert out == t
            row = tensor.row(*(ids_[o] for o in ops))
            assert row[ids_[t]] == v
            assert row.sum() == v
            if r1.kind != r2.kind:
                assert v == 0


def test_one_trivial_examples():
    s = spec(3, 1, 1, 2)
    # over GF(3), T = {1, 2}: R^2 with R^2 in the third slot needs a + b = 1, i.e. 2 + 2 = 1
    assert predict_one_trivial_products(s, type1(2), type1(2), TRIVIAL[3]) == (TRIVIAL[3], 1)
    # a * b = 1 for slot 1: 2 * 2 = 1
    assert predict_one_trivial_products(s, TRIVIAL[1], type1(2), type1(2)) == (TRIVIAL[1], 1)
    assert predict_one_trivial_products(s, TRIVIAL[1], type1(2), type2(1)) == (TRIVIAL[1], 0)


def test_no_closed_form_cases():
    s = spec(2, 2, 1, 2)
    g = s.tower.generator
    with pytest.raises(NoClosedForm):
        predict_nontrivial_products(s, TRIVIAL[1], type1(g), type1(g))
    with pytest.raises(NoClosedForm):
        predict_one_trivial_products(s, TRIVIAL[2], type1(g), type1(g))
    with pytest.raises(NoClosedForm):
        predict_one_trivial_products(s, TRIVIAL[1], TRIVIAL[2], type1(g))
    with pytest.raises(NoClosedForm):
        predict_nontrivial_products(spec(2, 1, 1, 3), BIG, BIG, BIG)


def test_prediction_line_status():
    assert PredictionLine("q", 2, 2, "s").status == "match"
    assert PredictionLine("q", 2, 4, "s", corrected=4).status == "corrected"
    assert PredictionLine("q", 2, 4, "s", corrected=3).status == "mismatch"
    assert PredictionLine("q", 2, 4, "s").status == "mismatch"
    r = PredictionReport()
    r.add("q", 2, 4, "s", 4)
    assert r.clean and not r.strict_clean
    r.oracles["full_class"] = "disagree"
    assert not r.clean


# corrected-line counts and the families they fall in, per k = 2 spec with |H| > 1
CORRECTED = {(2, 2, 1, 2): 11, (3, 2, 1, 2): 83, (2, 3, 1, 2): 41, (2, 4, 2, 2): 309}


@pytest.mark.parametrize("m", K2, ids=ids)
def test_crosscheck_line_families(m):
    s = spec(*m)
    report = crosscheck(s, partition(*m))
    assert report.clean
    assert not report.by_status("mismatch")
    corrected = report.by_status("corrected")
    assert len(corrected) == CORRECTED.get(m, 0)
    for line in corrected:
        assert line.source == "product:222" or line.source.endswith(":22"), line
    # type-1 outputs of 222 and the 22 one-trivial products differ from the stated form by n/q exactly
    ratio = s.n // s.tower.q
    for line in corrected:
        if line.source.endswith(":22") or "->R^" in line.quantity:
            assert line.actual == ratio * line.predicted, line
    assert report.oracles["representative"] == "ok"
    assert report.oracles["full_class"] in ("agree", "skipped")


@pytest.mark.parametrize("m", [m for m in MATRIX if m[3] == 3], ids=ids)
def test_crosscheck_k3(m):
    report = crosscheck(spec(*m), partition(*m))
    assert report.strict_clean
    assert {line.quantity for line in report.lines} >= {"partition[asl vs agl]", "labels[asl vs agl]"}
