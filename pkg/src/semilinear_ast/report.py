"""JSON / CSV / text rendering of build, verify, params, crosscheck and compare results.

Every JSON document has the shape::

    {"schema_version": 1, "spec": {...}, "relations": [...],
     "intersection": [...], "crosscheck": [...], ...}

with sections present only when the command produced them.  Key order is
fixed and no run-dependent values (seed, worker count, timings) are
included, so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json

from .action import GroupSpec, TriplePartition
from .closedform import PredictionReport, name_relations, relation_table
from .scheme import Comparison, IntersectionTensor, VerificationReport

SCHEMA_VERSION = 1

CSV_COLUMNS = {
    "build": ["id", "name", "size"],
    "params": ["table", "id", "name", "size", "n1", "n2", "n3", "i", "j", "k", "l", "p"],
    "verify": ["condition", "passed", "detail", "witness"],
    "crosscheck": ["quantity", "predicted", "actual", "match", "source", "status", "corrected"],
    "compare": ["verdict", "witness"],
}


def spec_dict(spec: GroupSpec) -> dict:
    t = spec.tower
    return {
        "p": t.p,
        "alpha": t.alpha,
        "omega": t.omega,
        "k": spec.k,
        "variant": spec.variant,
        "n": t.n,
        "q": t.q,
        "polynomial": list(t.poly),
        "domain_size": spec.domain_size,
    }


def relations_section(spec: GroupSpec, partition: TriplePartition, valencies=None) -> list[dict]:
    rows = relation_table(spec, partition)
    names = name_relations(spec, partition) if spec.variant == "asl" else {}
    for row in rows:
        name = names.get(row["id"])
        if name is not None and name.kind in ("type1", "type2"):
            row["element"] = name.value
            row["poly"] = spec.tower.to_poly(name.value)
        if valencies is not None:
            row["valencies"] = [int(v) for v in valencies[row["id"]]]
    return rows


def intersection_section(tensor: IntersectionTensor, rows: list[dict]) -> list[dict]:
    label = {r["id"]: r["name"] for r in rows}
    return [
        {"i": i, "j": j, "k": k, "l": l, "p": p, "names": [label[i], label[j], label[k], label[l]]}
        for (i, j, k, l), p in tensor.items()
    ]


def document(spec: GroupSpec, **sections) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "spec": spec_dict(spec)}
    for key in ("summary", "relations", "intersection", "verification", "crosscheck", "oracles", "comparison"):
        if sections.get(key) is not None:
            doc[key] = sections[key]
    return doc


def dumps_json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: ("" if row.get(c) is None else row.get(c)) for c in columns})
    return buf.getvalue()


def render(command: str, doc: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps_json(doc)
    if fmt == "csv":
        return _csv(CSV_COLUMNS[command], _csv_rows(command, doc))
    if fmt == "text":
        return _text(command, doc)
    raise ValueError(f"unknown format {fmt!r}")


def _csv_rows(command: str, doc: dict) -> list[dict]:
    if command == "build":
        return doc["relations"]
    if command == "params":
        rows = []
        for r in doc["relations"]:
            n1, n2, n3 = r["valencies"]
            rows.append({"table": "relation", "id": r["id"], "name": r["name"], "size": r["size"],
                         "n1": n1, "n2": n2, "n3": n3})
        for e in doc["intersection"]:
            rows.append({"table": "intersection", **{key: e[key] for key in "ijklp"}})
        return rows
    if command == "verify":
        return [
            {"condition": c["condition"], "passed": c["passed"], "detail": c.get("detail", ""),
             "witness": json.dumps(c["witness"]) if "witness" in c else ""}
            for c in doc["verification"]["conditions"]
        ]
    if command == "crosscheck":
        return doc["crosscheck"]
    if command == "compare":
        c = doc["comparison"]
        return [{"verdict": c["verdict"], "witness": json.dumps(c["witness"]) if "witness" in c else ""}]
    raise ValueError(command)


def _header(doc: dict) -> str:
    s = doc["spec"]
    return (f"{s['variant'].upper()}_H({s['k']},{s['n']})  p={s['p']} alpha={s['alpha']} omega={s['omega']} "
            f"q={s['q']}  |V|={s['domain_size']}")


def _text(command: str, doc: dict) -> str:
    out = [_header(doc)]
    if "summary" in doc:
        out.append(" ".join(f"{k}={v}" for k, v in doc["summary"].items()))
    if command in ("build", "params"):
        out.append(f"{'id':>4} {'name':<10} {'size':>10}" + ("   n1   n2   n3" if command == "params" else ""))
        for r in doc["relations"]:
            line = f"{r['id']:>4} {r['name']:<10} {r['size']:>10}"
            if "valencies" in r:
                line += "".join(f" {v:>4}" for v in r["valencies"])
            out.append(line)
        if command == "params":
            out.append(f"nonzero intersection numbers: {len(doc['intersection'])}")
    elif command == "verify":
        for c in doc["verification"]["conditions"]:
            line = f"{'PASS' if c['passed'] else 'FAIL'} {c['condition']}"
            if c.get("detail"):
                line += f" ({c['detail']})"
            if "witness" in c:
                line += f" witness={json.dumps(c['witness'])}"
            out.append(line)
    elif command == "crosscheck":
        if "oracles" in doc:
            out.append("oracles: " + ", ".join(f"{k}={v}" for k, v in doc["oracles"].items()))
        for line in doc["crosscheck"]:
            if line["status"] != "match" or not line["quantity"].startswith("p["):
                extra = f" corrected={line['corrected']}" if "corrected" in line else ""
                out.append(f"{line['status']:<9} {line['quantity']}: predicted={line['predicted']} "
                           f"actual={line['actual']}{extra} [{line['source']}]")
    elif command == "compare":
        c = doc["comparison"]
        out.append(f"verdict: {c['verdict']}" + (f" witness={json.dumps(c['witness'])}" if "witness" in c else ""))
    return "\n".join(out) + "\n"


def crosscheck_section(report: PredictionReport) -> list[dict]:
    return [line.to_dict() for line in report.lines]


def verification_section(report: VerificationReport) -> dict:
    return report.to_dict()


def comparison_section(cmp: Comparison, a: GroupSpec, b: GroupSpec) -> dict:
    return {"a": spec_dict(a), "b": spec_dict(b), **cmp.to_dict()}
