"""Command-line front end.

Exit codes: 0 ok/clean, 1 usage, 2 verification failure, 3 crosscheck
mismatch, 4 resource bound, 5 I/O.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import report as rpt
from .action import (
    MAX_LABEL_DOMAIN,
    MAX_ORACLE_DOMAIN,
    GroupSpec,
    ResourceLimitError,
    bfs_orbit_oracle,
    label_all_triples,
)
from .artifact import ArtifactError, read_artifact, write_artifact
from .closedform import crosscheck
from .gf import FieldError, build_tower
from .scheme import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    ConditionResult,
    compare_partitions,
    default_regularity_mode,
    representative_tensor,
    verify_ast,
    verify_valency_condition,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_MISMATCH = 3
EXIT_RESOURCE = 4
EXIT_IO = 5

log = logging.getLogger("semilinear_ast")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    p: int
    alpha: int
    omega: int
    k: int
    variant: str = "asl"
    regularity: str | None = None
    oracle: bool = False
    format: str = "text"
    output: str | None = None
    workers: int = 1
    seed: int = DEFAULT_SEED
    max_domain: int = MAX_LABEL_DOMAIN

    def spec(self) -> GroupSpec:
        try:
            return GroupSpec(self.variant, self.k, build_tower(self.p, self.alpha, self.omega))
        except (FieldError, ValueError) as exc:
            raise UsageError(str(exc)) from exc

    @classmethod
    def from_args(cls, args) -> RunConfig:
        missing = [f for f in ("p", "alpha", "omega", "k") if getattr(args, f) is None]
        if missing:
            raise UsageError("missing parameter(s): " + ", ".join(missing))
        if args.workers < 1:
            raise UsageError("--workers must be positive")
        return cls(args.p, args.alpha, args.omega, args.k, args.variant, args.regularity, args.oracle,
                   args.format, args.output, args.workers, args.seed, args.max_domain)


def _add_common(sp, config_required=True):
    g = sp.add_argument_group("group")
    g.add_argument("-p", type=int, help="characteristic")
    g.add_argument("-a", "--alpha", type=int, help="n = p^alpha")
    g.add_argument("-w", "--omega", type=int, help="q = p^omega, omega | alpha")
    g.add_argument("-k", type=int, help="dimension (>= 2)")
    g.add_argument("--variant", choices=("asl", "agl"), default="asl")
    o = sp.add_argument_group("run")
    o.add_argument("--regularity", choices=("full", "sampled"), default=None,
                   help="principal-regularity mode (default: full when |V| <= 64)")
    o.add_argument("--oracle", action="store_true", help="also compare against the BFS orbit oracle")
    o.add_argument("--format", choices=("json", "csv", "text"), default="text")
    o.add_argument("-o", dest="output", metavar="PATH", help="output path")
    o.add_argument("--workers", type=int, default=1)
    o.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"sampling seed (default {DEFAULT_SEED})")
    o.add_argument("--max-domain", type=int, default=MAX_LABEL_DOMAIN,
                   help=f"largest |V| to label (default {MAX_LABEL_DOMAIN})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="semilinear-ast", description="Association schemes on triples from ASL_H(k,n) / AGL_H(k,n).")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("build", help="label V^3 and write a partition artifact")
    _add_common(sp)

    sp = sub.add_parser("verify", help="check the four AST axioms")
    sp.add_argument("artifact", nargs="?", help="partition artifact (otherwise built from the flags)")
    _add_common(sp)

    sp = sub.add_parser("params", help="valencies and intersection numbers")
    _add_common(sp)
    sp.add_argument("--plot", metavar="DIR", help="also write a valency figure into DIR")

    sp = sub.add_parser("crosscheck", help="closed forms against brute force")
    _add_common(sp)
    sp.add_argument("--strict", action="store_true", help="exit 3 on any disagreement with a stated formula")
    sp.add_argument("--plot", metavar="DIR", help="also write a crosscheck figure into DIR")

    sp = sub.add_parser("compare", help="compare two partitions on the same V")
    sp.add_argument("artifacts", nargs="*", help="two partition artifacts (otherwise built from the flags)")
    _add_common(sp)
    sp.add_argument("--variant-b", choices=("asl", "agl"), default=None,
                    help="variant of the second group (default: the other variant)")
    sp.add_argument("--omega-b", type=int, default=None, help="omega of the second group (default: same)")
    return parser


def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _label(cfg: RunConfig, spec: GroupSpec):
    return label_all_triples(spec, workers=cfg.workers, max_domain=cfg.max_domain)


def _oracle_condition(spec, partition) -> ConditionResult:
    if spec.domain_size > MAX_ORACLE_DOMAIN:
        raise ResourceLimitError(f"|V| = {spec.domain_size} exceeds the oracle bound {MAX_ORACLE_DOMAIN}")
    cmp = compare_partitions(partition, bfs_orbit_oracle(spec))
    return ConditionResult("oracle_equivalence", cmp.verdict == "equal", witness=cmp.witness, detail=cmp.verdict)


def cmd_build(cfg: RunConfig) -> int:
    spec = cfg.spec()
    partition = _label(cfg, spec)
    out = Path(cfg.output or f"ast-{cfg.variant}-{cfg.p}-{cfg.alpha}-{cfg.omega}-{cfg.k}.ast")
    summary = {"classes": partition.class_count, "nontrivial": partition.class_count - 4,
               "triples": spec.domain_size**3}
    if cfg.oracle:
        summary["oracle"] = _oracle_condition(spec, partition).detail
    doc = rpt.document(spec, summary=summary, relations=rpt.relations_section(spec, partition))
    write_artifact(out, spec, partition)
    Path(str(out) + ".json").write_text(rpt.dumps_json(doc))
    sys.stdout.write(rpt.render("build", doc, cfg.format))
    return EXIT_OK


def cmd_verify(cfg: RunConfig | None, artifact: str | None, args) -> int:
    if artifact:
        spec, partition = read_artifact(artifact)
        fmt, output, seed = args.format, args.output, args.seed
        mode = args.regularity
        oracle = args.oracle
    else:
        spec = cfg.spec()
        partition = _label(cfg, spec)
        fmt, output, seed, mode, oracle = cfg.format, cfg.output, cfg.seed, cfg.regularity, cfg.oracle
    mode = mode or default_regularity_mode(spec.domain_size)
    report = verify_ast(partition, mode=mode, samples=DEFAULT_SAMPLES, seed=seed)
    if oracle:
        report.conditions.append(_oracle_condition(spec, partition))
    doc = rpt.document(spec, summary={"regularity": mode, "passed": report.passed},
                       verification=rpt.verification_section(report))
    _emit(rpt.render("verify", doc, fmt), output)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_params(cfg: RunConfig, plot_dir: str | None) -> int:
    spec = cfg.spec()
    partition = _label(cfg, spec)
    val = verify_valency_condition(partition)
    if not val.passed:
        sys.stderr.write(f"valency condition fails: {val.witness}\n")
        return EXIT_VERIFY
    rows = rpt.relations_section(spec, partition, val.value)
    tensor = representative_tensor(partition)
    nontrivial_sum = int(sum(r["valencies"][2] for r in rows[4:]))
    doc = rpt.document(spec, summary={"classes": partition.class_count, "nontrivial_n3_sum": nontrivial_sum},
                       relations=rows, intersection=rpt.intersection_section(tensor, rows))
    _emit(rpt.render("params", doc, cfg.format), cfg.output)
    if plot_dir:
        from .plotting import plot_valencies

        Path(plot_dir).mkdir(parents=True, exist_ok=True)
        plot_valencies(doc, plot_dir)
    return EXIT_OK


def cmd_crosscheck(cfg: RunConfig, strict: bool, plot_dir: str | None) -> int:
    spec = cfg.spec()
    if spec.variant != "asl":
        raise UsageError("closed forms are stated for ASL_H only; use --variant asl")
    partition = _label(cfg, spec)
    report = crosscheck(spec, partition, workers=cfg.workers, seed=cfg.seed)
    doc = rpt.document(spec, summary=report.summary(), crosscheck=rpt.crosscheck_section(report),
                       oracles=report.oracles)
    _emit(rpt.render("crosscheck", doc, cfg.format), cfg.output)
    if plot_dir:
        from .plotting import plot_crosscheck

        Path(plot_dir).mkdir(parents=True, exist_ok=True)
        plot_crosscheck(doc, plot_dir)
    ok = report.strict_clean if strict else report.clean
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_compare(args) -> int:
    if args.artifacts:
        if len(args.artifacts) != 2:
            raise UsageError("compare takes exactly two artifacts")
        spec_a, part_a = read_artifact(args.artifacts[0])
        spec_b, part_b = read_artifact(args.artifacts[1])
        fmt, output = args.format, args.output
    else:
        cfg = RunConfig.from_args(args)
        spec_a = cfg.spec()
        other = args.variant_b or ("agl" if cfg.variant == "asl" else "asl")
        omega_b = args.omega_b if args.omega_b is not None else cfg.omega
        spec_b = RunConfig(cfg.p, cfg.alpha, omega_b, cfg.k, other).spec()
        part_a, part_b = _label(cfg, spec_a), _label(cfg, spec_b)
        fmt, output = cfg.format, cfg.output
    if spec_a.domain_size != spec_b.domain_size or spec_a.n != spec_b.n:
        raise UsageError("partitions live on different vector spaces")
    cmp = compare_partitions(part_a, part_b)
    doc = rpt.document(spec_a, comparison=rpt.comparison_section(cmp, spec_a, spec_b))
    _emit(rpt.render("compare", doc, fmt), output)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "verify":
            cfg = None if args.artifact else RunConfig.from_args(args)
            return cmd_verify(cfg, args.artifact, args)
        if args.command == "compare":
            return cmd_compare(args)
        cfg = RunConfig.from_args(args)
        if args.command == "build":
            return cmd_build(cfg)
        if args.command == "params":
            return cmd_params(cfg, args.plot)
        return cmd_crosscheck(cfg, args.strict, args.plot)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (ResourceLimitError, MemoryError) as exc:
        sys.stderr.write(f"resource bound: {exc}\n")
        return EXIT_RESOURCE
    except (OSError, ArtifactError) as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
