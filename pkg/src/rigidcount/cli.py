"""Command-line front end: rigidcount {analyze,count,solve,verify,bound} GRAPH."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, replace

from .decomposition import FLEXIBLE_MESSAGE, CountResult, borcea_streinu_bound, count_c
from .errors import ClusteringUnstableError, ConsistencyError, GraphParseError, NotRigidError
from .graph import Graph, is_k_connected, parse_graph
from .homotopy import NumericCount, TrackerConfig, VerificationReport, count_realizations, verify_against_decomposition
from .realization import canonicalize, realization_to_json
from .rigidity import RigidityReport, r_components, rigidity_report

log = logging.getLogger("rigidcount")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_IO = 3
EXIT_FLEXIBLE = 4
EXIT_TOO_LARGE = 5
EXIT_DISAGREE = 6

MAX_SOLVE_N = 9


class CliExit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class AnalysisReport:
    rigidity: RigidityReport
    is_3_connected: bool
    r_components: list[list[list[int]]]

    def to_dict(self) -> dict:
        return {**self.rigidity.to_dict(), "is_3_connected": self.is_3_connected, "r_components": self.r_components}

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        fields = {k: d[k] for k in RigidityReport.__dataclass_fields__}
        return cls(RigidityReport.from_dict(fields), d["is_3_connected"], d["r_components"])


@dataclass(frozen=True)
class BoundReport:
    n: int
    bound: int

    def to_dict(self) -> dict:
        return {"n": self.n, "bound": str(self.bound)}

    @classmethod
    def from_dict(cls, d: dict) -> "BoundReport":
        return cls(int(d["n"]), int(d["bound"]))


def analyze(g: Graph) -> AnalysisReport:
    comps = r_components(g)
    return AnalysisReport(
        rigidity=rigidity_report(g),
        is_3_connected=is_k_connected(g, 3),
        r_components=[[list(e) for e in block] for block in comps.blocks],
    )


def load_graph(path: str) -> Graph:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliExit(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return parse_graph(text)
    except GraphParseError as exc:
        raise CliExit(EXIT_PARSE, f"{path}: {exc}") from exc


def tracker_from_args(args) -> TrackerConfig:
    cfg = TrackerConfig()
    overrides = {
        "newton_tol": args.newton_tol,
        "endpoint_cluster_eps": args.cluster_eps,
        "divergence_norm": args.divergence_norm,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        return replace(cfg, **overrides)
    except ValueError as exc:
        raise CliExit(EXIT_PARSE, f"bad tracker setting: {exc}") from exc


def _seeds(args) -> list[int]:
    if args.seeds:
        try:
            seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
        except ValueError as exc:
            raise CliExit(EXIT_PARSE, f"--seeds expects comma-separated integers, got {args.seeds!r}") from exc
    else:
        seeds = [args.seed, args.seed + 1, args.seed + 2]
    if not seeds or any(s < 0 for s in seeds):
        raise CliExit(EXIT_PARSE, "seeds must be non-negative integers")
    return seeds


def _guard_size(g: Graph, force: bool) -> None:
    if g.n > MAX_SOLVE_N and not force:
        raise CliExit(
            EXIT_TOO_LARGE,
            f"n = {g.n} > {MAX_SOLVE_N} means 2^{2 * g.n - 3} homotopy paths; pass --force to run anyway",
        )


# -- text rendering -------------------------------------------------------------


def _text_analysis(rep: AnalysisReport) -> str:
    r = rep.rigidity
    lines = [
        f"generic rank: {r.generic_rank}",
        f"rigid: {r.is_rigid}",
        f"isostatic: {r.is_isostatic}",
        f"redundantly rigid: {r.is_redundantly_rigid}",
        f"3-connected: {rep.is_3_connected}",
        f"globally rigid: {r.is_globally_rigid}",
        f"b(G): {r.b_value}",
        "rigid components: " + "; ".join(" ".join(map(str, c)) for c in r.rigid_components),
        f"R-components ({len(rep.r_components)}):",
    ]
    lines += ["  " + " ".join(f"{u}-{v}" for u, v in block) for block in rep.r_components]
    return "\n".join(lines)


def _text_count(res: CountResult) -> str:
    head = f"c(G) = {res.exact}" if res.exact is not None else f"c(G) = {res.expression}"
    lines = [head]
    if res.exact is not None and res.expression != str(res.exact):
        lines.append(f"expression: {res.expression}")
    for r in res.numeric_residues:
        lines.append(f"{r['name']}: c = {r['value']} ({r['flag']}, seed {r['seed']})")
    for i, g in enumerate(res.residues):
        lines.append(f"R{i + 1}: irreducible, n={g.n}, edges {' '.join(f'{u}-{v}' for u, v in g.edges)}")
    lines.append("certificate:")
    lines.append(res.certificate.render(1))
    return "\n".join(lines)


def _text_solve(nc: NumericCount) -> str:
    lines = [
        f"c(G) = {nc.c_estimate}",
        f"paths: {nc.total_paths}, finite: {nc.finite_solutions}, diverged: {nc.diverged}, "
        f"off variety: {nc.not_on_variety}, failed: {nc.failures}",
        f"classes: real {nc.real_count}, Minkowski {nc.minkowski_count}, complex {nc.complex_pair_count}",
        f"certified: {nc.certified} (seed {nc.seed})",
    ]
    lines += [f"note: {n}" for n in nc.notes]
    return "\n".join(lines)


def _text_verify(rep: VerificationReport) -> str:
    lines = [f"decomposition: {rep.decomposition_value}"]
    for s in rep.estimates:
        status = "agree" if rep.agree[s] else "DISAGREE"
        extra = "" if rep.certified[s] else " (not certified)"
        if s in rep.errors:
            extra += f" error: {rep.errors[s]}"
        lines.append(f"seed {s}: {rep.estimates[s]} {status}{extra}")
    lines.append("all agree" if rep.all_agree else "verification FAILED")
    return "\n".join(lines)


# -- commands -------------------------------------------------------------------


def cmd_analyze(args) -> tuple[object, str, int]:
    rep = analyze(load_graph(args.graph))
    return rep, _text_analysis(rep), EXIT_OK


def cmd_count(args) -> tuple[object, str, int]:
    g = load_graph(args.graph)
    res = count_c(g, numeric_fallback=args.numeric_fallback, seed=args.seed, tracker=tracker_from_args(args))
    return res, _text_count(res), EXIT_OK


def cmd_solve(args) -> tuple[object, str, int]:
    g = load_graph(args.graph)
    _guard_size(g, args.force)
    nc = count_realizations(g, seed=args.seed, cfg=tracker_from_args(args))
    if args.dump_solutions:
        dump = [realization_to_json(canonicalize(g, q)) for q in nc.solutions]
        try:
            with open(args.dump_solutions, "w", encoding="utf-8") as fh:
                json.dump(dump, fh, indent=1)
        except OSError as exc:
            raise CliExit(EXIT_IO, f"cannot write {args.dump_solutions}: {exc.strerror or exc}") from exc
    return nc, _text_solve(nc), EXIT_OK


def cmd_verify(args) -> tuple[object, str, int]:
    g = load_graph(args.graph)
    _guard_size(g, args.force)
    try:
        rep = verify_against_decomposition(g, _seeds(args), tracker_from_args(args))
    except ValueError as exc:
        raise CliExit(EXIT_DISAGREE, str(exc)) from exc
    return rep, _text_verify(rep), EXIT_OK if rep.all_agree else EXIT_DISAGREE


def cmd_bound(args) -> tuple[object, str, int]:
    if args.n is not None:
        n = args.n
    elif args.graph is not None:
        n = load_graph(args.graph).n
    else:
        raise CliExit(EXIT_PARSE, "bound needs a graph file or --n")
    if n < 3:
        raise CliExit(EXIT_PARSE, "the bound is defined for n >= 3")
    rep = BoundReport(n, borcea_streinu_bound(n))
    return rep, f"c(G) <= {rep.bound} for n = {n}", EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "count": cmd_count,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "bound": cmd_bound,
}


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=_nonneg_int, default=42)
    common.add_argument("--seeds", help="comma-separated seeds for verify")
    common.add_argument("--numeric-fallback", action="store_true", help="resolve irreducible residues numerically")
    common.add_argument("--force", action="store_true", help=f"allow numeric solves with n > {MAX_SOLVE_N}")
    common.add_argument("--dump-solutions", metavar="PATH", help="write canonical solutions as JSON")
    common.add_argument("--newton-tol", type=float)
    common.add_argument("--cluster-eps", type=float)
    common.add_argument("--divergence-norm", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rigidcount", description="Count complex realizations of rigid graphs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("analyze", "count", "solve", "verify"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("graph")
    p = sub.add_parser("bound", parents=[common])
    p.add_argument("graph", nargs="?")
    p.add_argument("--n", type=int)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        report, text, code = COMMANDS[args.command](args)
    except CliExit as exc:
        print(f"rigidcount: {exc}", file=sys.stderr)
        return exc.code
    except NotRigidError:
        print(f"rigidcount: {FLEXIBLE_MESSAGE}", file=sys.stderr)
        return EXIT_FLEXIBLE
    except (ConsistencyError, ClusteringUnstableError) as exc:
        print(f"rigidcount: numeric solve inconsistent: {exc}", file=sys.stderr)
        return EXIT_DISAGREE
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(text)
    if args.command == "solve" and not report.certified:
        print("rigidcount: solve is not certified", file=sys.stderr)
        return EXIT_DISAGREE
    return code


if __name__ == "__main__":
    sys.exit(main())
