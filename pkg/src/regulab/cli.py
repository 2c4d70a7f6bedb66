"""Command line front end.

Subcommands: analyze, decompose, cylinder, vc2, generate, subset, and
oracle-check.  Thresholds are parsed as exact rationals ("1/4", "0.25",
"2**-20"); engine runs emit a versioned JSON report that is byte-identical
across reruns with the same config and seed, except for runtime_ms.

Exit codes: 0 success, 1 parse or validation failure, 2 audit failure,
3 capacity or nontermination.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from fractions import Fraction

from . import __version__
from .core import (
    CapacityError,
    Chain,
    ContainmentError,
    DensityUndefined,
    Graph,
    InvalidStructure,
    MultipartiteGraph,
    ParseError,
    load_chain,
    load_graph,
    load_multipartite,
    load_partite_3graph,
    load_three_graph,
    relative_density,
    save_chain,
    save_graph,
    save_multipartite,
    save_partite_3graph,
    save_three_graph,
)
from .engines import (
    ConstantsProfile,
    EngineError,
    NonterminationError,
    RefinementFailure,
    ScheduleSaturation,
    SearchFailure,
    graph_homogeneous_decomposition,
    homogeneous_decomposition,
    hyper_cylinder_regularity,
    quasirandom_subset,
    rodl_sparse_dense,
    IterationTrace,
)
from .generators import (
    SplitMix64,
    cone_hypergraph,
    half_graph,
    make_fd,
    make_vd,
    random_bipartite,
    random_chain,
    random_graph,
    random_link_hypergraph,
    random_multipartite,
    random_partite_3graph,
    random_tournament_3graph,
)
from .partitions import cylinder_quasirandomness_audit, q_edge_partition, EdgePartition
from .quasirandom import (
    PolyFunction,
    c4_sum,
    chain_quasirandomness,
    multipartite_graph_quasirandomness,
    oct_sum,
    pair_quasirandomness,
    graph_quasirandomness,
)
from .report import DecompositionReport, fraction_str, input_hash, save_report
from .vcdim import vc2_dimension

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_AUDIT = 2
EXIT_CAPACITY = 3


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def parse_rational(text: str) -> Fraction:
    s = text.strip()
    m = re.fullmatch(r"(-?\d+)\*\*(-?\d+)", s)
    try:
        if m:
            return Fraction(int(m.group(1))) ** int(m.group(2))
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise _ArgError(f"cannot parse rational {text!r}")


def parse_psi(text: str) -> PolyFunction:
    try:
        return PolyFunction.parse(text)
    except InvalidStructure as exc:
        raise _ArgError(str(exc))


def _parse_sizes(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise _ArgError(f"cannot parse part sizes {text!r}")
    if not sizes or any(s < 1 for s in sizes):
        raise _ArgError("part sizes must be positive integers")
    return sizes


def build_profile(args) -> ConstantsProfile:
    overrides = {}
    for flag, conv in (
        ("q_gain", parse_rational),
        ("edge_part_cap", int),
        ("max_steps", int),
        ("witness_cap", int),
        ("witness_search", str),
        ("cylinder_eta", parse_rational),
        ("szemeredi_alpha", parse_rational),
        ("sparse_density", parse_rational),
        ("audit_tuple_cap", int),
        ("audit_samples", int),
    ):
        val = getattr(args, flag, None)
        if val is not None:
            overrides[flag] = conv(val) if isinstance(val, str) else val
    if args.profile == "paper":
        if overrides:
            raise _ArgError("profile overrides are only valid under the desk profile")
        return ConstantsProfile.paper()
    if args.profile == "desk":
        try:
            return ConstantsProfile.desk(**overrides)
        except InvalidStructure as exc:
            raise _ArgError(str(exc))
    raise _ArgError(f"unknown profile {args.profile!r}")


def _add_profile_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--profile", default="desk", help="desk or paper")
    p.add_argument("--q-gain", dest="q_gain")
    p.add_argument("--edge-part-cap", dest="edge_part_cap", type=int)
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--witness-cap", dest="witness_cap", type=int)
    p.add_argument("--witness-search", dest="witness_search", choices=("auto", "exhaustive", "greedy"))
    p.add_argument("--cylinder-eta", dest="cylinder_eta")
    p.add_argument("--szemeredi-alpha", dest="szemeredi_alpha")
    p.add_argument("--sparse-density", dest="sparse_density")
    p.add_argument("--audit-tuple-cap", dest="audit_tuple_cap", type=int)
    p.add_argument("--audit-samples", dest="audit_samples", type=int)


def _threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("REGULAB_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise _ArgError(f"REGULAB_THREADS must be an integer, got {env!r}")
    return 1


def _sniff(text: str) -> str:
    """Classify a core text file: chain, three, graph, or multipartite."""
    n_parts = has_e = has_t = 0
    for line in text.splitlines():
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        kind = s.split()[0]
        if kind == "part":
            n_parts += 1
        elif kind == "e":
            has_e = 1
        elif kind == "t":
            has_t = 1
    if has_e and has_t:
        return "chain"
    if has_t:
        return "three"
    if n_parts >= 2:
        return "multipartite"
    return "graph"


def _cert_dict(cert) -> dict:
    return {
        "raw_sum": fraction_str(cert.raw_sum),
        "normalizer": fraction_str(cert.normalizer),
        "value": fraction_str(cert.value),
        "degenerate": cert.degenerate,
    }


def _emit(args, rep: DecompositionReport) -> None:
    text = save_report(rep)
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise _ArgError(f"cannot read {path}: {exc}")


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------


def _cmd_analyze(args) -> int:
    text = _read(args.input)
    kind = _sniff(text)
    modes = ("fast", "naive") if args.mode == "both" else (args.mode,)
    audit: dict = {"kind": kind}
    t0 = time.monotonic()
    if kind == "chain":
        c = load_chain(text)
        part_counts = list(c.vertex_set.sizes)
        for mode in modes:
            audit[mode] = _cert_dict(chain_quasirandomness(c, mode=mode))
        value = Fraction(audit[modes[0]]["value"])
        audit["relative_density"] = fraction_str(relative_density(c))
    elif kind == "multipartite":
        g = load_multipartite(text)
        part_counts = list(g.vertex_set.sizes)
        for mode in modes:
            certs = graph_quasirandomness(g, mode=mode)
            audit[mode] = {
                f"{i},{j}": _cert_dict(cert) for (i, j), cert in sorted(certs.items())
            }
        value = multipartite_graph_quasirandomness(g, mode=modes[0])
        audit["max_pair_value"] = fraction_str(value)
    elif kind == "graph":
        g = load_graph(text)
        part_counts = [g.n]
        from .core import BipartiteGraph

        bg = BipartiteGraph(g.n, g.n, g.rows)
        for mode in modes:
            audit[mode] = _cert_dict(pair_quasirandomness(bg, mode=mode))
        value = Fraction(audit[modes[0]]["value"])
    else:
        raise _ArgError("analyze expects a chain or graph file, got a bare 3-graph")
    beta_ok = True
    if args.beta is not None:
        beta = parse_rational(args.beta)
        beta_ok = value <= beta
        audit["beta"] = fraction_str(beta)
        audit["is_quasirandom"] = beta_ok
    rep = DecompositionReport(
        command="analyze",
        input_hash=input_hash(text),
        profile={},
        seed=0,
        trace=[],
        audit=audit,
        part_counts=part_counts,
        runtime_ms=int((time.monotonic() - t0) * 1000),
        threads=_threads(args),
    )
    _emit(args, rep)
    return EXIT_OK if beta_ok else EXIT_AUDIT


def _audit_dict_hyper(audit) -> dict:
    d = {
        "gamma": fraction_str(audit.gamma),
        "homogeneous_mass": fraction_str(audit.homogeneous_mass),
        "homogeneous_crossing_mass": fraction_str(audit.homogeneous_crossing_mass),
        "quasirandom_mass": fraction_str(audit.quasirandom_mass),
        "degenerate_mass": fraction_str(audit.degenerate_mass),
        "noncrossing_mass": fraction_str(audit.noncrossing_mass),
        "mode": audit.mode,
        "convention": "ordered-triples",
    }
    if audit.samples is not None:
        d["samples"] = audit.samples
    if audit.sparse_pair_mass is not None:
        d["sparse_pair_mass"] = fraction_str(audit.sparse_pair_mass)
    return d


def _cmd_decompose(args) -> int:
    text = _read(args.input)
    kind = _sniff(text)
    profile = build_profile(args)
    t0 = time.monotonic()
    if kind == "three":
        if args.eta is None or args.psi is None:
            raise _ArgError("decompose on a 3-graph needs --eta and --psi")
        eta = parse_rational(args.eta)
        psi = parse_psi(args.psi)
        h = load_three_graph(text)
        q, audit, trace = homogeneous_decomposition(
            h, args.d_hint, eta, psi, profile, t=args.t, seed=args.seed
        )
        audit_d = _audit_dict_hyper(audit)
        audit_d["eta"] = fraction_str(eta)
        ok = audit.homogeneous_mass >= 1 - 2 * eta
        audit_d["passes"] = ok
        part_counts = [len(p) for p in q.parts]
    elif kind == "graph":
        if args.eps is None:
            raise _ArgError("decompose on a graph needs --eps")
        eps = parse_rational(args.eps)
        g = load_graph(text)
        parts, audit, trace = graph_homogeneous_decomposition(g, eps, profile, t=args.t)
        ok = audit.homogeneous_mass >= 1 - 2 * eps
        audit_d = {
            "eps": fraction_str(audit.eps),
            "homogeneous_mass": fraction_str(audit.homogeneous_mass),
            "homogeneous_crossing_mass": fraction_str(audit.homogeneous_crossing_mass),
            "same_part_mass": fraction_str(audit.same_part_mass),
            "convention": "ordered-pairs",
            "passes": ok,
        }
        part_counts = list(audit.part_sizes)
    else:
        raise _ArgError("decompose expects a 3-graph or a single-part graph file")
    from .report import trace_list
    from .report import profile_dict

    rep = DecompositionReport(
        command="decompose",
        input_hash=input_hash(text),
        profile=profile_dict(profile),
        seed=args.seed,
        trace=trace_list(trace),
        audit=audit_d,
        part_counts=part_counts,
        runtime_ms=int((time.monotonic() - t0) * 1000),
        threads=_threads(args),
    )
    _emit(args, rep)
    return EXIT_OK if ok else EXIT_AUDIT


def _cmd_cylinder(args) -> int:
    text = _read(args.input)
    if _sniff(text) != "three":
        raise _ArgError("cylinder expects a partite 3-graph file")
    h = load_partite_3graph(text)
    eta = parse_rational(args.eta)
    psi = parse_psi(args.psi)
    profile = build_profile(args)
    t0 = time.monotonic()
    p, trace = hyper_cylinder_regularity(h, eta, psi, profile, seed=args.seed)
    audit = cylinder_quasirandomness_audit(
        h, p, eta, psi, cap=profile.audit_tuple_cap, samples=profile.audit_samples,
        seed=args.seed,
    )
    from .report import profile_dict, trace_list

    audit_d = {
        "eta": fraction_str(eta),
        "good_mass": fraction_str(audit.good_mass),
        "degenerate_mass": fraction_str(audit.degenerate_mass),
        "mode": audit.mode,
        "passes": audit.good_mass >= 1 - eta,
    }
    if audit.samples is not None:
        audit_d["samples"] = audit.samples
    rep = DecompositionReport(
        command="cylinder",
        input_hash=input_hash(text),
        profile=profile_dict(profile),
        seed=args.seed,
        trace=trace_list(trace),
        audit=audit_d,
        part_counts=[p.vertex_count, p.edge_count],
        runtime_ms=int((time.monotonic() - t0) * 1000),
        threads=_threads(args),
    )
    _emit(args, rep)
    return EXIT_OK if audit_d["passes"] else EXIT_AUDIT


def _cmd_vc2(args) -> int:
    text = _read(args.input)
    if _sniff(text) != "three":
        raise _ArgError("vc2 expects a 3-graph file")
    h = load_three_graph(text)
    d, witness = vc2_dimension(h, cap_d=args.cap_d, cap_n=args.cap_n)
    out = {"vc2": d, "witness": None}
    if witness is not None:
        out["witness"] = {
            "sets": [list(s) for s in witness.sets],
            "realizers": {str(k): v for k, v in sorted(witness.realizers.items())},
        }
    line = json.dumps(out, sort_keys=True, indent=2) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(line)
    else:
        sys.stdout.write(line)
    return EXIT_OK


def _cmd_generate(args) -> int:
    kind = args.kind
    seed = args.seed
    p = parse_rational(args.p) if args.p is not None else None
    if kind == "vd":
        out = save_partite_3graph(make_vd(args.d))
    elif kind == "fd":
        g = make_fd(args.d)
        from .core import PartiteVertexSet

        vs = PartiteVertexSet(("A", "B"), (g.left_size, g.right_size))
        out = save_multipartite(MultipartiteGraph(vs, {(0, 1): g}))
    elif kind == "cone":
        gtext = _read(args.base)
        mg = load_multipartite(gtext)
        if mg.vertex_set.t != 2:
            raise _ArgError("cone base must be a two-part graph file")
        out = save_partite_3graph(cone_hypergraph(mg.pair(0, 1), args.apex))
    elif kind == "link":
        na, nb, nc = _parse_sizes(args.parts or "6,6,6")
        out = save_partite_3graph(random_link_hypergraph(na, nb, nc, seed))
    elif kind == "tournament":
        out = save_three_graph(random_tournament_3graph(args.n, seed))
    elif kind == "partite3":
        sizes = _parse_sizes(args.parts or "4,4,4")
        out = save_partite_3graph(random_partite_3graph(sizes, p or Fraction(1, 2), seed))
    elif kind == "bipartite":
        na, nb = _parse_sizes(args.parts or "8,8")[:2]
        g = random_bipartite(na, nb, p or Fraction(1, 2), seed)
        from .core import PartiteVertexSet

        vs = PartiteVertexSet(("A", "B"), (g.left_size, g.right_size))
        out = save_multipartite(MultipartiteGraph(vs, {(0, 1): g}))
    elif kind == "graph":
        out = save_graph(random_graph(args.n, p or Fraction(1, 2), seed))
    elif kind == "half":
        g = half_graph(args.n)
        from .core import PartiteVertexSet

        vs = PartiteVertexSet(("A", "B"), (g.left_size, g.right_size))
        out = save_multipartite(MultipartiteGraph(vs, {(0, 1): g}))
    elif kind == "multipartite":
        sizes = _parse_sizes(args.parts or "4,4,4")
        out = save_multipartite(random_multipartite(sizes, p or Fraction(1, 2), seed))
    elif kind == "chain":
        sizes = _parse_sizes(args.parts or "4,4,4")
        q = parse_rational(args.q) if args.q is not None else Fraction(1, 2)
        out = save_chain(random_chain(sizes, p or Fraction(1, 2), q, seed))
    else:
        raise _ArgError(f"unknown kind {kind!r}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return EXIT_OK


def _cmd_subset(args) -> int:
    text = _read(args.input)
    if _sniff(text) != "three":
        raise _ArgError("subset expects a 3-graph file")
    h = load_three_graph(text)
    profile = build_profile(args)
    t0 = time.monotonic()
    from .report import profile_dict, trace_list

    if args.pattern is not None:
        if args.eps is None:
            raise _ArgError("rodl mode needs --eps")
        f = load_three_graph(_read(args.pattern))
        eps = parse_rational(args.eps)
        res = rodl_sparse_dense(h, f, eps, profile, seed=args.seed, t=args.t)
        sub = res.subset
        audit = {
            "kind": res.kind,
            "density": fraction_str(res.density),
            "eps": fraction_str(eps),
            "certificate": fraction_str(sub.certificate_value),
            "witness": None
            if res.witness is None
            else [list(im) for im in res.witness.images],
        }
        trace = sub.trace
        extra = {"vertices": list(sub.vertices), "parts_chosen": list(sub.parts_chosen)}
    else:
        if args.eta is None or args.psi is None:
            raise _ArgError("subset needs --eta and --psi")
        eta = parse_rational(args.eta)
        psi = parse_psi(args.psi)
        sub = quasirandom_subset(
            h, eta, psi, profile, seed=args.seed, s=args.s, t=args.t
        )
        audit = {
            "density": fraction_str(sub.density),
            "certificate": fraction_str(sub.certificate_value),
            "eta": fraction_str(eta),
            "eta_ok": sub.eta_ok,
            "psi_ok": sub.psi_ok,
            "bucket": sub.bucket,
        }
        trace = sub.trace
        extra = {"vertices": list(sub.vertices), "parts_chosen": list(sub.parts_chosen)}
    rep = DecompositionReport(
        command="subset",
        input_hash=input_hash(text),
        profile=profile_dict(profile),
        seed=args.seed,
        trace=trace_list(trace),
        audit=audit,
        part_counts=[len(extra["vertices"])],
        runtime_ms=int((time.monotonic() - t0) * 1000),
        threads=_threads(args),
        extra=extra,
    )
    _emit(args, rep)
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    m = re.fullmatch(r"(\d+)\.\.(\d+)", args.sizes)
    if not m:
        raise _ArgError("--sizes must look like 4..8")
    lo, hi = int(m.group(1)), int(m.group(2))
    if not 1 <= lo <= hi:
        raise _ArgError("size range must be non-empty and positive")
    rng = SplitMix64(args.seed)
    t0 = time.monotonic()
    pair_cases = chain_cases = mismatches = 0
    from .generators import random_bipartite as rb, random_chain as rc

    for case in range(args.cases):
        na = lo + rng.below(hi - lo + 1)
        nb = lo + rng.below(hi - lo + 1)
        g = rb(na, nb, Fraction(1, 2), seed=rng.next_u64())
        fast = pair_quasirandomness(g, mode="fast")
        naive = pair_quasirandomness(g, mode="naive")
        pair_cases += 1
        if (fast.raw_sum, fast.value) != (naive.raw_sum, naive.value):
            mismatches += 1
        if case % 5 == 0:
            sizes = tuple(lo + rng.below(min(hi, 6) - lo + 1) if min(hi, 6) >= lo else lo for _ in range(3))
            c = rc(sizes, Fraction(2, 3), Fraction(1, 2), seed=rng.next_u64())
            cf = chain_quasirandomness(c, mode="fast")
            cn = chain_quasirandomness(c, mode="naive")
            chain_cases += 1
            if (cf.raw_sum, cf.value) != (cn.raw_sum, cn.value):
                mismatches += 1
            trivial = EdgePartition.trivial_for_graph(c.graph)
            d = relative_density(c)
            if q_edge_partition(c, trivial, mode="fast") != d * d:
                mismatches += 1
    audit = {
        "pair_cases": pair_cases,
        "chain_cases": chain_cases,
        "mismatches": mismatches,
        "all_equal": mismatches == 0,
    }
    rep = DecompositionReport(
        command="oracle-check",
        input_hash=input_hash(f"sizes={lo}..{hi} cases={args.cases} seed={args.seed}"),
        profile={},
        seed=args.seed,
        trace=[],
        audit=audit,
        part_counts=[],
        runtime_ms=int((time.monotonic() - t0) * 1000),
        threads=_threads(args),
    )
    _emit(args, rep)
    return EXIT_OK if mismatches == 0 else EXIT_AUDIT


# ---------------------------------------------------------------------------
# Parser assembly.
# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    top = _Parser(prog="regulab", description=__doc__)
    top.add_argument("--version", action="version", version=f"regulab {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="quasirandomness certificates of a chain or graph")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=("fast", "naive", "both"), default="fast")
    p.add_argument("--beta", help="threshold; exit 2 when the certificate exceeds it")
    p.add_argument("--output")
    p.add_argument("--threads", type=int)
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("decompose", help="homogeneous decomposition of a 3-graph or graph")
    p.add_argument("--input", required=True)
    p.add_argument("--eta")
    p.add_argument("--psi", help='rate function "c,k", e.g. "1/16,3"')
    p.add_argument("--eps", help="graph pipeline threshold")
    p.add_argument("--t", type=int)
    p.add_argument("--d-hint", dest="d_hint", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.add_argument("--threads", type=int)
    _add_profile_flags(p)
    p.set_defaults(fn=_cmd_decompose)

    p = sub.add_parser("cylinder", help="cylinder chain regularity of a partite 3-graph")
    p.add_argument("--input", required=True)
    p.add_argument("--eta", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.add_argument("--threads", type=int)
    _add_profile_flags(p)
    p.set_defaults(fn=_cmd_cylinder)

    p = sub.add_parser("vc2", help="second Vapnik-Chervonenkis dimension of a 3-graph")
    p.add_argument("--input", required=True)
    p.add_argument("--cap-d", dest="cap_d", type=int, default=2)
    p.add_argument("--cap-n", dest="cap_n", type=int, default=20)
    p.add_argument("--output")
    p.add_argument("--threads", type=int)
    p.set_defaults(fn=_cmd_vc2)

    p = sub.add_parser("generate", help="write instances in the text formats")
    p.add_argument("--kind", required=True, choices=(
        "vd", "fd", "cone", "link", "tournament", "partite3",
        "bipartite", "graph", "half", "multipartite", "chain",
    ))
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--apex", type=int, default=3)
    p.add_argument("--parts", help='sizes like "4,4,4"')
    p.add_argument("--p", help="edge density")
    p.add_argument("--q", help="triple density (chain kind)")
    p.add_argument("--base", help="graph file for the cone base")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("subset", help="quasirandom subset extraction / density dichotomy")
    p.add_argument("--input", required=True)
    p.add_argument("--eta")
    p.add_argument("--psi")
    p.add_argument("--s", type=int, default=3)
    p.add_argument("--t", type=int)
    p.add_argument("--pattern", help="forbidden 3-graph file; switches to dichotomy mode")
    p.add_argument("--eps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.add_argument("--threads", type=int)
    _add_profile_flags(p)
    p.set_defaults(fn=_cmd_subset)

    p = sub.add_parser("oracle-check", help="fast kernels against the naive oracles")
    p.add_argument("--sizes", default="4..8")
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.add_argument("--threads", type=int)
    p.set_defaults(fn=_cmd_oracle_check)

    return top


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except _ArgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, InvalidStructure, DensityUndefined, ContainmentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScheduleSaturation as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (CapacityError, NonterminationError, RefinementFailure, SearchFailure) as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
