"""Command-line front end: ``spectree <subcommand> ...``.

Exit status is 0 on success, 1 when a verification fails (a witness is
printed), 2 for usage or input errors and 3 when a solver or enumeration
budget runs out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .degseq import DegreeSequence, format_degree_sequence, is_tree_sequence, parse_degree_sequence
from .exceptions import (BudgetExceededError, ConvergenceError, InvalidMoveError,
                         InvalidSequenceError, InvalidTreeError, VerificationAnomaly)
from .oracle import (DEFAULT_BUDGET, instance_key, sweep, verify_corollary3, verify_corollary4,
                     verify_theorem1, verify_theorem2)
from .rearrange import local_search, majorization_chain
from .spectral import DENSE_CAP, DEFAULT_TOL, max_laplacian_eigenpair
from .tree import Tree, build_bfd_tree, read_edgelist

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


def _num(x: float) -> str:
    return f"{float(x):.17g}"


def _json_default(x):
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, bytes):
        return x.decode()
    raise TypeError(type(x).__name__)


class _Out:
    """Writes either ``key = value`` text lines or one JSON document."""

    def __init__(self, fmt: str, stream):
        self.fmt = fmt
        self.stream = stream

    def emit(self, payload: dict, text: str | None = None) -> None:
        if self.fmt == "json":
            self.stream.write(json.dumps(_round17(payload), default=_json_default) + "\n")
            return
        if text is None:
            text = "".join(f"{k} = {_fmt_value(v)}\n" for k, v in payload.items())
        self.stream.write(text)


def _round17(x):
    # json.dumps already prints the shortest round-tripping repr; this only
    # normalizes numpy scalars so both output modes see the same doubles
    if isinstance(x, dict):
        return {k: _round17(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round17(v) for v in x]
    if isinstance(x, (float, np.floating)):
        return float(_num(x))
    return x


def _fmt_value(v) -> str:
    if isinstance(v, (float, np.floating)):
        return _num(v)
    if isinstance(v, bool):
        return str(v).lower()
    return str(v)


def _default_threads() -> int:
    env = os.environ.get("SPECTREE_THREADS")
    if env:
        return int(env)
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _add_common(p: argparse.ArgumentParser, top: bool) -> None:
    # the top-level parser owns the defaults; subparsers only override when given
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--output", choices=["text", "json"], default=d("text"))
    p.add_argument("--tol", type=_positive_float, default=d(DEFAULT_TOL),
                   help="eigensolver residual tolerance relative to lambda")
    p.add_argument("--dense-cap", type=_positive_int, default=d(DENSE_CAP))
    p.add_argument("--budget", type=_positive_int, default=d(DEFAULT_BUDGET),
                   help="maximum labeled trees per enumerated class")
    p.add_argument("--threads", type=_positive_int, default=d(None),
                   help="oracle worker processes (default: SPECTREE_THREADS or CPU count)")
    p.add_argument("--seed", type=int, default=d(0))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectree", description=(
        "Trees maximizing the largest Laplacian eigenvalue for a given degree sequence."))
    _add_common(parser, True)
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, **kw):
        p = sub.add_parser(name, **kw)
        _add_common(p, False)
        return p

    p = cmd("validate", help="check a tree sequence and print its normalized form")
    p.add_argument("seq")

    p = cmd("bfd", help="build the BFD-tree of a tree sequence")
    p.add_argument("seq")
    p.add_argument("--emit", choices=["edges", "dot"], default="edges")

    p = cmd("eig", help="largest Laplacian eigenvalue")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--seq", help="use the BFD-tree of this sequence")
    src.add_argument("--edges", type=Path, help="edge-list file ('-' for stdin)")
    p.add_argument("--dense", action="store_true", help="use the dense reference solver")
    p.add_argument("--vector", action="store_true", help="also print the eigenvector")

    p = cmd("improve", help="rearrange a tree until it is BFD-ordered")
    p.add_argument("--edges", type=Path, required=True)
    p.add_argument("--log", type=Path, help="write the step log here as JSON")
    p.add_argument("--max-steps", type=_positive_int)
    p.add_argument("--emit-trees", action="store_true",
                   help="print the edge list after every step")

    p = cmd("chain", help="majorization chain between two tree sequences")
    p.add_argument("seq")
    p.add_argument("seq_prime")
    p.add_argument("--emit-trees", action="store_true")

    p = cmd("verify", help="brute-force verification of the extremal results")
    vsub = p.add_subparsers(dest="what", required=True)
    for name, args in (("thm1", ["seq"]), ("thm2", ["seq", "seq_prime"]),
                       ("cor3", ["n"]), ("cor4", ["n", "k"])):
        q = vsub.add_parser(name)
        _add_common(q, False)
        for a in args:
            q.add_argument(a, type=int if a in ("n", "k") else str)
    q = vsub.add_parser("sweep", help="every instance up to --max-n vertices, as JSONL")
    _add_common(q, False)
    q.add_argument("--max-n", type=_positive_int, required=True)
    q.add_argument("--out", type=Path, help="append JSONL here instead of stdout")
    q.add_argument("--resume", action="store_true",
                   help="skip instances already present in --out")

    p = cmd("bench", help="timing harness")
    bsub = p.add_subparsers(dest="what", required=True)
    for name in ("bfd", "eig"):
        q = bsub.add_parser(name)
        _add_common(q, False)
        q.add_argument("--n", type=_positive_int, required=True)
        q.add_argument("--repeat", type=_positive_int, default=3 if name == "bfd" else 1)
    return parser


# -- subcommands --------------------------------------------------------------------


def _read_tree(path: Path) -> Tree:
    text = sys.stdin.read() if str(path) == "-" else path.read_text()
    return read_edgelist(text)


def _edges_text(t: Tree) -> str:
    return t.to_edgelist()


def _run_validate(a, out: _Out) -> int:
    pi = parse_degree_sequence(a.seq)
    ok = is_tree_sequence(pi)
    payload = {"sequence": format_degree_sequence(pi), "n": pi.n, "leaves": pi.leaves,
               "is_tree_sequence": ok}
    if ok and pi.n == 1:
        payload["note"] = "degenerate single-vertex tree"
    out.emit(payload)
    return EXIT_OK if ok else EXIT_USAGE


def _run_bfd(a, out: _Out) -> int:
    t = build_bfd_tree(parse_degree_sequence(a.seq))
    if a.emit == "dot":
        out.emit({"n": t.n, "dot": t.to_dot()}, t.to_dot())
    else:
        out.emit({"n": t.n, "edges": t.edge_list()}, _edges_text(t))
    return EXIT_OK


def _run_eig(a, out: _Out) -> int:
    t = build_bfd_tree(parse_degree_sequence(a.seq)) if a.seq else _read_tree(a.edges)
    res = max_laplacian_eigenpair(t, a.tol, method="dense" if a.dense else "auto",
                                  dense_cap=a.dense_cap)
    payload = {"n": t.n, **res.to_dict(eigenvector=a.vector)}
    text = None
    if a.vector:
        vec = payload.pop("eigenvector")
        text = "".join(f"{k} = {_fmt_value(v)}\n" for k, v in payload.items())
        text += "eigenvector = " + " ".join(_num(x) for x in vec) + "\n"
        payload["eigenvector"] = vec
    out.emit(payload, text)
    return EXIT_OK


def _step_lines(steps, trees, emit_trees: bool) -> str:
    lines = []
    for i, (t, s) in enumerate(zip(trees, steps), 1):
        lines.append(f"step {i}: {s.kind} ({s.reason}) removed={list(s.removed)} "
                     f"added={list(s.added)} lambda {_num(s.lambda_before)} -> "
                     f"{_num(s.lambda_after)}\n")
        if emit_trees:
            lines.append(_edges_text(t))
    return "".join(lines)


def _run_improve(a, out: _Out) -> int:
    t = _read_tree(a.edges)
    trees = []
    try:
        final, steps = local_search(t, a.max_steps)
    except BudgetExceededError as exc:
        final, steps = exc.partial
        _write_log(a.log, steps)
        raise
    # replay the log to recover the intermediate trees for auditing
    cur = t
    for s in steps:
        edges = set(cur.edge_list()) - {tuple(sorted(e)) for e in s.removed}
        edges |= {tuple(sorted(e)) for e in s.added}
        cur = Tree(cur.n, sorted(edges))
        trees.append(cur)
    _write_log(a.log, steps)
    lam = max_laplacian_eigenpair(final, a.tol, dense_cap=a.dense_cap).lam
    payload = {"n": final.n, "steps": [s.to_dict() for s in steps], "lambda": lam,
               "edges": final.edge_list()}
    if a.emit_trees:
        payload["trees"] = [x.edge_list() for x in trees]
    text = _step_lines(steps, trees, a.emit_trees)
    text += f"steps = {len(steps)}\nlambda = {_num(lam)}\n" + _edges_text(final)
    out.emit(payload, text)
    return EXIT_OK


def _write_log(path, steps) -> None:
    if path is not None:
        path.write_text(json.dumps([s.to_dict() for s in steps], indent=1) + "\n")


def _run_chain(a, out: _Out) -> int:
    pi, pi2 = parse_degree_sequence(a.seq), parse_degree_sequence(a.seq_prime)
    chain = majorization_chain(pi, pi2)
    steps = [s for _, s in chain]
    trees = [t for t, _ in chain]
    lam0 = steps[0].lambda_before if steps else max_laplacian_eigenpair(build_bfd_tree(pi)).lam
    payload = {"sequence": str(pi), "sequence_prime": str(pi2), "lambda_start": lam0,
               "lambda_end": steps[-1].lambda_after if steps else lam0,
               "steps": [s.to_dict() for s in steps]}
    if a.emit_trees:
        payload["trees"] = [t.edge_list() for t in trees]
    text = (f"lambda_start = {_num(payload['lambda_start'])}\n"
            + _step_lines(steps, trees, a.emit_trees)
            + f"lambda_end = {_num(payload['lambda_end'])}\n")
    out.emit(payload, text)
    return EXIT_OK


def _report_text(r) -> str:
    status = "PASS" if r.passed else "FAIL"
    inst = " ".join(f"{k}={v}" for k, v in r.instance.items())
    det = " ".join(f"{k}={_fmt_value(v)}" for k, v in r.details.items())
    line = f"{status} {r.theorem} {inst} {det}\n"
    if not r.passed:
        line += "witness = " + json.dumps(_round17(r.witness), default=_json_default) + "\n"
    return line


def _run_verify(a, out: _Out) -> int:
    workers = a.threads or _default_threads()
    if a.what == "sweep":
        return _run_sweep(a, out, workers)
    if a.what == "thm1":
        r = verify_theorem1(parse_degree_sequence(a.seq), budget=a.budget, workers=workers)
    elif a.what == "thm2":
        r = verify_theorem2(parse_degree_sequence(a.seq), parse_degree_sequence(a.seq_prime))
    elif a.what == "cor3":
        r = verify_corollary3(a.n)
    else:
        r = verify_corollary4(a.n, a.k, budget=a.budget, workers=workers)
    out.emit(r.to_dict(), _report_text(r))
    return EXIT_OK if r.passed else EXIT_FAIL


def _run_sweep(a, out: _Out, workers: int) -> int:
    done = set()
    if a.resume:
        if a.out is None:
            raise InvalidSequenceError("--resume needs --out")
        if a.out.exists():
            for line in a.out.read_text().splitlines():
                if line.strip():
                    rec = json.loads(line)
                    done.add(instance_key(rec["theorem"], rec["instance"]))
    sink = a.out.open("a") if a.out is not None else None
    failed = total = 0
    try:
        for r in sweep(a.max_n, budget=a.budget, workers=workers, skip=done):
            total += 1
            failed += not r.passed
            line = r.to_json() + "\n"
            if sink is not None:
                sink.write(line)
                sink.flush()
            elif out.fmt == "json":
                out.stream.write(line)
            else:
                out.stream.write(_report_text(r))
    finally:
        if sink is not None:
            sink.close()
    if sink is not None or out.fmt == "text":
        out.emit({"instances": total, "failed": failed, "skipped": len(done)})
    return EXIT_FAIL if failed else EXIT_OK


def _bench_sequence(n: int, seed: int) -> DegreeSequence:
    # degree sequence of a uniformly random labeled tree: 1 + occurrences in a Pruefer code
    rng = np.random.default_rng(seed)
    if n == 1:
        return DegreeSequence([0])
    counts = np.bincount(rng.integers(0, n, size=n - 2), minlength=n) + 1
    return DegreeSequence.from_sorted_array(np.sort(counts)[::-1])


def _run_bench(a, out: _Out) -> int:
    pi = _bench_sequence(a.n, a.seed)
    if a.what == "bfd":
        times = []
        for _ in range(a.repeat):
            t0 = time.perf_counter()
            build_bfd_tree(pi)
            times.append(time.perf_counter() - t0)
        out.emit({"n": a.n, "seconds": min(times), "repeat": a.repeat})
        return EXIT_OK
    t = build_bfd_tree(pi)
    t0 = time.perf_counter()
    res = max_laplacian_eigenpair(t, a.tol, method="iterative")
    dt = time.perf_counter() - t0
    out.emit({"n": a.n, "seconds": dt, "lambda": res.lam, "residual": res.residual,
              "iterations": res.iterations, "solver": res.solver})
    return EXIT_OK


_COMMANDS = {"validate": _run_validate, "bfd": _run_bfd, "eig": _run_eig,
             "improve": _run_improve, "chain": _run_chain, "verify": _run_verify,
             "bench": _run_bench}


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors this way
        return int(exc.code or 0) and EXIT_USAGE
    out = _Out(args.output, stdout)
    try:
        return _COMMANDS[args.command](args, out)
    except VerificationAnomaly as exc:
        out.emit({"error": str(exc), "witness": exc.witness},
                 f"verification failed: {exc}\nwitness = {exc.witness}\n")
        return EXIT_FAIL
    except (ConvergenceError, BudgetExceededError) as exc:
        stderr.write(f"spectree: {exc}\n")
        return EXIT_BUDGET
    except (InvalidSequenceError, InvalidTreeError, InvalidMoveError, OSError, ValueError) as exc:
        stderr.write(f"spectree: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
