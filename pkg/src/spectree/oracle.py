"""Brute-force checks of the extremal-tree results on small degree classes.

Every labeled tree on ``0..n-1`` in which vertex ``i`` has degree ``pi[i]``
corresponds to exactly one Pruefer code in which label ``i`` occurs
``pi[i] - 1`` times. Walking the distinct permutations of that multiset in
lexicographic order therefore visits the whole class ``T_pi``; the walk can
start at any index, so ranges can be handed to separate worker processes and
the partial results merged in index order.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .degseq import (DegreeSequence, Majorization, enumerate_tree_sequences,
                     format_degree_sequence, is_tree_sequence, majorization_compare,
                     spider_sequence, star_sequence)
from .exceptions import (BudgetExceededError, InvalidMoveError, InvalidSequenceError,
                         VerificationAnomaly)
from .rearrange import TIE_TOL, majorization_chain, shift_edges, strict_margin, switch_edges
from .spectral import (dense_max_eigenvalue, laplacian_matrix, max_laplacian_eigenpair,
                       ritz_lower_bound)
from .tree import (Tree, _prufer_edges, build_bfd_tree, canonical_code, has_bfd_ordering,
                   random_tree, spider_legs)

__all__ = [
    "ExtremalReport",
    "VerificationReport",
    "labeled_class_size",
    "enumerate_trees",
    "class_representatives",
    "instance_key",
    "find_extremal_bruteforce",
    "verify_theorem1",
    "verify_theorem2",
    "verify_corollary3",
    "verify_corollary4",
    "sweep",
    "verify_switching",
    "verify_shifting",
    "sample_switching",
    "sample_shifting",
    "GROUP_TOL",
    "DEFAULT_BUDGET",
]

GROUP_TOL = 1e-9
DEFAULT_BUDGET = 10**7
_PARALLEL_CHUNK = 20_000


def _group_band(lam: float) -> float:
    return GROUP_TOL * max(1.0, lam)


@dataclass(frozen=True)
class ExtremalReport:
    sequence: DegreeSequence
    class_size_labeled: int
    class_size_unlabeled: int
    max_lambda: float
    maximizer_codes: frozenset
    bfd_code: bytes
    bfd_lambda: float
    member_lambdas: dict = field(repr=False, compare=False, default_factory=dict)
    members: dict = field(repr=False, compare=False, default_factory=dict)


@dataclass(frozen=True)
class VerificationReport:
    theorem: str  # "thm1", "thm2", "cor3", "cor4", "lemma1", "lemma2"
    instance: dict
    passed: bool
    tolerance: float
    witness: dict | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.passed and self.witness is None:
            raise ValueError("a failed report needs a witness")

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "instance": self.instance,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "witness": self.witness,
            "details": self.details,
        }

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), sort_keys=True)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in x]
    if isinstance(x, bytes):
        return x.decode()
    if isinstance(x, (np.floating, float)):
        return float(f"{float(x):.17g}")
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, DegreeSequence):
        return format_degree_sequence(x)
    return x


# -- enumeration ---------------------------------------------------------------


def _code_multiset(pi: DegreeSequence) -> list[int]:
    return [i for i, d in enumerate(pi.degrees) for _ in range(d - 1)]


def labeled_class_size(pi: DegreeSequence) -> int:
    """``(n-2)! / prod (d_i - 1)!``: labeled trees with vertex ``i`` of degree ``pi[i]``."""
    if pi.n < 2:
        return 1
    out = math.factorial(pi.n - 2)
    for d in pi.degrees:
        out //= math.factorial(d - 1)
    return out


def _count_perms(counts: dict[int, int]) -> int:
    total = math.factorial(sum(counts.values()))
    for c in counts.values():
        total //= math.factorial(c)
    return total


def _unrank(multiset: list[int], index: int) -> list[int]:
    # index-th distinct permutation of the multiset in lexicographic order
    counts: dict[int, int] = {}
    for x in multiset:
        counts[x] = counts.get(x, 0) + 1
    out = []
    for _ in range(len(multiset)):
        for x in sorted(counts):
            if counts[x] == 0:
                continue
            counts[x] -= 1
            block = _count_perms(counts)
            if index < block:
                out.append(x)
                break
            index -= block
            counts[x] += 1
    return out


def _next_permutation(a: list[int]) -> bool:
    i = len(a) - 2
    while i >= 0 and a[i] >= a[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = len(a) - 1
    while a[j] <= a[i]:
        j -= 1
    a[i], a[j] = a[j], a[i]
    a[i + 1:] = reversed(a[i + 1:])
    return True


def _iter_codes(pi: DegreeSequence, start: int, stop: int) -> Iterator[list[int]]:
    code = _unrank(_code_multiset(pi), start)
    for _ in range(start, stop):
        yield code
        if not _next_permutation(code):
            return


def enumerate_trees(pi: DegreeSequence, dedupe: bool = False, start: int = 0,
                    stop: int | None = None) -> Iterator[Tree]:
    """Stream the labeled trees of ``T_pi`` in lexicographic Pruefer-code order.

    ``start``/``stop`` select an index range of that order. With ``dedupe``
    only the first tree of every isomorphism class is yielded.
    """
    if not is_tree_sequence(pi) or pi.n < 2:
        raise InvalidSequenceError(f"{pi} is not a tree sequence with n >= 2")
    n = pi.n
    total = labeled_class_size(pi)
    stop = total if stop is None else min(stop, total)
    seen = set()
    for code in _iter_codes(pi, start, stop):
        t = Tree(n, _prufer_edges(code, n), check=False)
        if dedupe:
            c = canonical_code(t)
            if c in seen:
                continue
            seen.add(c)
        yield t


def _distinct_range(args) -> list[tuple[bytes, list]]:
    degrees, start, stop = args
    pi = DegreeSequence(degrees)
    return [(canonical_code(t), t.edge_list())
            for t in enumerate_trees(pi, dedupe=True, start=start, stop=stop)]


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get("SPECTREE_THREADS")
        workers = int(env) if env else 1
    return max(1, int(workers))


def class_representatives(pi: DegreeSequence, budget: int = DEFAULT_BUDGET,
                          workers: int | None = 1) -> dict[bytes, Tree]:
    """One tree per isomorphism class in ``T_pi``, keyed by canonical code.

    The representative is the first member in enumeration order regardless
    of how the range is split across ``workers``.
    """
    total = labeled_class_size(pi)
    if total > budget:
        raise BudgetExceededError(f"class {pi} has {total} labeled trees, budget {budget}")
    workers = _resolve_workers(workers)
    if workers == 1 or total <= _PARALLEL_CHUNK:
        parts = [_distinct_range((pi.degrees, 0, total))]
    else:
        bounds = list(range(0, total, _PARALLEL_CHUNK)) + [total]
        jobs = [(pi.degrees, a, b) for a, b in zip(bounds, bounds[1:])]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_distinct_range, jobs))
    reps: dict[bytes, Tree] = {}
    for part in parts:  # index order, so the earliest representative wins
        for code, edges in part:
            if code not in reps:
                reps[code] = Tree(pi.n, edges, check=False)
    return reps


def _batched_lambdas(trees: list[Tree]) -> list[float]:
    if not trees:
        return []
    mats = np.stack([laplacian_matrix(t) for t in trees])
    return np.linalg.eigvalsh(mats)[:, -1].tolist()


def _bfd_lambda(pi: DegreeSequence) -> float:
    return max_laplacian_eigenpair(build_bfd_tree(pi)).lam


def find_extremal_bruteforce(pi: DegreeSequence, budget: int = DEFAULT_BUDGET,
                             workers: int | None = 1) -> ExtremalReport:
    """Maximize the dense top eigenvalue over every tree in ``T_pi``."""
    if not is_tree_sequence(pi):
        raise InvalidSequenceError(f"{pi} is not a tree sequence")
    bfd = build_bfd_tree(pi)
    bfd_code = canonical_code(bfd)
    if pi.n == 1:
        return ExtremalReport(pi, 1, 1, 0.0, frozenset([bfd_code]), bfd_code, 0.0,
                              {bfd_code: 0.0}, {bfd_code: bfd})
    reps = class_representatives(pi, budget, workers)
    codes = list(reps)
    lams = _batched_lambdas([reps[c] for c in codes])
    top = max(lams)
    band = _group_band(top)
    maxim = frozenset(c for c, lam in zip(codes, lams) if lam >= top - band)
    return ExtremalReport(
        sequence=pi,
        class_size_labeled=labeled_class_size(pi),
        class_size_unlabeled=len(reps),
        max_lambda=top,
        maximizer_codes=maxim,
        bfd_code=bfd_code,
        bfd_lambda=float(np.linalg.eigvalsh(laplacian_matrix(bfd))[-1]),
        member_lambdas=dict(zip(codes, lams)),
        members=reps,
    )


# -- theorem checks --------------------------------------------------------------


def verify_theorem1(pi: DegreeSequence, tol: float = 1e-9, budget: int = DEFAULT_BUDGET,
                    workers: int | None = 1) -> VerificationReport:
    """Brute-force maximizers of ``T_pi`` are exactly the BFD-tree, and it is the
    only member admitting a BFD-ordering."""
    rep = find_extremal_bruteforce(pi, budget, workers)
    orderable = sorted(c for c, t in rep.members.items() if has_bfd_ordering(t) is not None)
    gap = abs(rep.max_lambda - rep.bfd_lambda)
    runner_up = max((lam for c, lam in rep.member_lambdas.items() if c != rep.bfd_code),
                    default=None)
    details = {
        "labeled": rep.class_size_labeled,
        "unlabeled": rep.class_size_unlabeled,
        "max_lambda": rep.max_lambda,
        "bfd_lambda": rep.bfd_lambda,
        "runner_up_lambda": runner_up,
        "bfd_orderable": len(orderable),
    }
    problems = {}
    if rep.maximizer_codes != {rep.bfd_code}:
        problems["maximizers"] = sorted(rep.maximizer_codes)
    if gap > tol:
        problems["lambda_gap"] = gap
    if orderable != [rep.bfd_code]:
        problems["bfd_orderable_codes"] = orderable
    return VerificationReport(
        "thm1", {"sequence": str(pi)}, not problems, tol,
        witness=({**problems, "bfd_code": rep.bfd_code} if problems else None),
        details=details)


def verify_theorem2(pi: DegreeSequence, pi_prime: DegreeSequence,
                    tol: float = 1e-9) -> VerificationReport:
    """``lambda(BFD(pi)) < lambda(BFD(pi'))`` and the connecting chain rises strictly."""
    rel = majorization_compare(pi, pi_prime)
    if rel is not Majorization.LESS:
        raise InvalidSequenceError(f"{pi} is not below {pi_prime} (relation {rel.value})")
    lam = _bfd_lambda(pi)
    lam_p = _bfd_lambda(pi_prime)
    instance = {"sequence": str(pi), "sequence_prime": str(pi_prime)}
    details = {"lambda": lam, "lambda_prime": lam_p}
    witness = None
    try:
        chain = majorization_chain(pi, pi_prime)
        incs = [st.increase for _, st in chain]
        details["chain_length"] = len(chain)
        details["min_step_increase"] = min(incs) if incs else None
        bad = [i for i, (_, st) in enumerate(chain)
               if not st.increase > strict_margin(st.lambda_before)]
        if bad:
            witness = {"non_strict_steps": bad}
    except VerificationAnomaly as exc:
        witness = {"chain_error": str(exc), **(exc.witness or {})}
    if not lam < lam_p - tol:
        witness = {**(witness or {}), "lambda": lam, "lambda_prime": lam_p}
    return VerificationReport("thm2", instance, witness is None, tol, witness, details)


def verify_corollary3(n: int, tol: float = 1e-9) -> VerificationReport:
    """Over all tree sequences of length ``n``, only the star attains the top value ``n``."""
    if n < 2:
        raise InvalidSequenceError(f"need n >= 2, got {n}")
    star = star_sequence(n)
    values = {str(s): _bfd_lambda(s) for s in enumerate_tree_sequences(n)}
    lam_star = values[str(star)]
    rivals = {s: v for s, v in values.items() if s != str(star) and v >= lam_star - tol}
    ok = not rivals and abs(lam_star - n) <= tol
    witness = None if ok else {"rivals": rivals, "star_lambda": lam_star}
    runner = max((v for s, v in values.items() if s != str(star)), default=None)
    return VerificationReport("cor3", {"n": n}, ok, tol, witness,
                              {"star_lambda": lam_star, "runner_up_lambda": runner,
                               "sequences": len(values)})


def verify_corollary4(n: int, k: int, tol: float = 1e-9, *, brute_force: bool = True,
                      budget: int = DEFAULT_BUDGET, workers: int | None = 1) -> VerificationReport:
    """Among trees with ``n`` vertices and ``k`` leaves the balanced spider is the unique maximizer."""
    if n < 3 or not 2 <= k <= n - 1:
        raise InvalidSequenceError(f"invalid (n, k) = ({n}, {k})")
    target = spider_sequence(n, k)
    seqs = enumerate_tree_sequences(n, leaves=k)
    values = {str(s): _bfd_lambda(s) for s in seqs}
    lam_t = values[str(target)]
    problems = {}
    rivals = {s: v for s, v in values.items() if s != str(target) and v >= lam_t - tol}
    if rivals:
        problems["sequence_rivals"] = rivals
    spider = build_bfd_tree(target)
    legs = spider_legs(spider)
    if legs is None or len(legs) != k and k > 2 or max(legs) - min(legs) > 1:
        problems["legs"] = legs
    details = {"spider_lambda": lam_t, "legs": legs, "sequences": len(values)}
    if brute_force:
        spider_code = canonical_code(spider)
        best: list[tuple[float, bytes, list]] = []
        for s in seqs:
            rep = find_extremal_bruteforce(s, budget, workers)
            for c, lam in rep.member_lambdas.items():
                best.append((lam, c, rep.members[c].edge_list()))
        top = max(lam for lam, _, _ in best)
        winners = [(lam, c, e) for lam, c, e in best if lam >= top - _group_band(top)]
        details["trees"] = len(best)
        details["brute_max_lambda"] = top
        if [c for _, c, _ in winners] != [spider_code]:
            problems["brute_maximizers"] = [{"lambda": lam, "edges": e} for lam, _, e in winners]
        if abs(top - lam_t) > tol:
            problems["brute_vs_bfd"] = top - lam_t
    return VerificationReport("cor4", {"n": n, "k": k}, not problems, tol,
                              problems or None, details)


# -- single moves ----------------------------------------------------------------
#
# A strict inequality between eigenvector entries only forces a visible rise in
# lambda if the entries are large enough: the gain is quadratic in the entries
# involved, so deep inside long paths it can sit far below double precision.
# Each report therefore carries the Rayleigh-Ritz lower bound that the old
# eigenvector certifies on the new tree. The margin is demanded whenever that
# bound clears it; below it only non-decrease is checked.

_NOISE = 1e-12


def _move_report(name, t, new, res, instance, strict, extra) -> VerificationReport:
    lam = res.lam
    lam_new = dense_max_eigenvalue(new, cap=max(new.n, 1))
    inc = lam_new - lam
    # |f| with the sign pattern of the new tree's bipartition is the test
    # function the rearrangement argument uses
    certified = ritz_lower_bound(new, new.bipartition() * np.abs(res.eigenvector)) - lam
    margin = strict_margin(lam)
    slack = _NOISE * max(1.0, lam)
    resolvable = strict and certified > margin
    problems = {}
    if inc < -slack:
        problems["decrease"] = inc
    if resolvable and not inc > margin:
        problems["not_strict"] = inc
    if inc < certified - slack:
        problems["below_certificate"] = {"increase": inc, "certified": certified}
    details = {"lambda": lam, "lambda_new": lam_new, "increase": inc, "certified": certified,
               "strict": strict, "resolvable": resolvable, **extra}
    witness = {**problems, "edges": t.edge_list()} if problems else None
    return VerificationReport(name, instance, not problems, margin, witness, details)


def verify_switching(t: Tree, e1, e2) -> VerificationReport:
    """Check one switch whose eigenvector magnitude preconditions hold."""
    res = max_laplacian_eigenpair(t, method="dense", dense_cap=max(t.n, 1))
    a = np.abs(res.eigenvector)
    (u1, v1), (u2, v2) = e1, e2
    gu, gv = a[u1] - a[u2], a[v2] - a[v1]
    if gu < 0 or gv < 0:
        raise InvalidMoveError("switch does not satisfy |f(u1)| >= |f(u2)|, |f(v2)| >= |f(v1)|")
    new = switch_edges(t, e1, e2)
    strict = max(gu, gv) > TIE_TOL * a.max()
    inst = {"n": t.n, "e1": [int(u1), int(v1)], "e2": [int(u2), int(v2)]}
    return _move_report("lemma1", t, new, res, inst, bool(strict),
                        {"gap_u": float(gu), "gap_v": float(gv)})


def verify_shifting(t: Tree, u: int, v: int, xs) -> VerificationReport:
    """Check one shift with ``|f(u)| <= |f(v)|``; the rise must be strict."""
    res = max_laplacian_eigenpair(t, method="dense", dense_cap=max(t.n, 1))
    a = np.abs(res.eigenvector)
    if a[u] > a[v]:
        raise InvalidMoveError("shift does not satisfy |f(u)| <= |f(v)|")
    new = shift_edges(t, u, v, xs)
    inst = {"n": t.n, "u": int(u), "v": int(v), "xs": [int(x) for x in xs]}
    return _move_report("lemma2", t, new, res, inst, True, {"gap": float(a[v] - a[u])})


def sample_switching(rng: np.random.Generator, max_n: int = 60, min_n: int = 4):
    """A uniform random labeled tree with a random switch meeting the magnitude preconditions.

    Returns ``(tree, (u1, v1), (u2, v2))``.
    """
    while True:
        t = random_tree(int(rng.integers(min_n, max_n + 1)), rng)
        a = np.abs(max_laplacian_eigenpair(t, method="dense", dense_cap=t.n).eigenvector)
        e = np.array(t.edge_list())
        e = np.vstack([e, e[:, ::-1]])
        i, j = (x.ravel() for x in np.meshgrid(np.arange(len(e)), np.arange(len(e))))
        u1, v1, u2, v2 = e[i, 0], e[i, 1], e[j, 0], e[j, 1]
        ok = (a[u1] >= a[u2]) & (a[v2] >= a[v1]) & (v1 != v2) & (u1 != u2)
        ok &= (u1 != v2) & (u2 != v1)
        for k in rng.permutation(np.flatnonzero(ok))[:50]:
            path = t.path(int(v1[k]), int(v2[k]))
            if u1[k] not in path and u2[k] not in path:
                return t, (int(u1[k]), int(v1[k])), (int(u2[k]), int(v2[k]))


def sample_shifting(rng: np.random.Generator, max_n: int = 60, min_n: int = 3):
    """A uniform random labeled tree with a random shift from ``u`` to ``v``, ``|f(u)| <= |f(v)|``.

    Returns ``(tree, u, v, xs)``.
    """
    while True:
        n = int(rng.integers(min_n, max_n + 1))
        t = random_tree(n, rng)
        a = np.abs(max_laplacian_eigenpair(t, method="dense", dense_cap=n).eigenvector)
        u, v = (int(x) for x in rng.choice(n, 2, replace=False))
        if a[u] > a[v]:
            u, v = v, u
        on_path = set(t.path(u, v))
        off = [x for x in t.adjacency[u] if x not in on_path]
        if off:
            k = int(rng.integers(1, len(off) + 1))
            xs = sorted(int(x) for x in rng.choice(off, k, replace=False))
            return t, u, v, xs


def sweep(max_n: int, *, tol: float = 1e-9, budget: int = DEFAULT_BUDGET,
          workers: int | None = 1, skip: Iterable[str] = ()) -> Iterator[VerificationReport]:
    """All checks up to ``max_n`` vertices, one report per instance.

    ``skip`` holds instance keys (see :func:`instance_key`) already done, so an
    interrupted sweep can resume from its JSONL output.
    """
    skip = set(skip)
    seqs = [s for n in range(2, max_n + 1) for s in enumerate_tree_sequences(n)]

    def todo(theorem, instance):
        return instance_key(theorem, instance) not in skip

    for s in seqs:
        if todo("thm1", {"sequence": str(s)}):
            yield verify_theorem1(s, tol, budget, workers)
    for a in seqs:
        for b in seqs:
            if majorization_compare(a, b) is Majorization.LESS and todo(
                    "thm2", {"sequence": str(a), "sequence_prime": str(b)}):
                yield verify_theorem2(a, b, tol)
    for n in range(2, max_n + 1):
        if todo("cor3", {"n": n}):
            yield verify_corollary3(n, tol)
    for n in range(3, max_n + 1):
        for k in range(2, n):
            if todo("cor4", {"n": n, "k": k}):
                yield verify_corollary4(n, k, tol, budget=budget, workers=workers)


def instance_key(theorem: str, instance: dict) -> str:
    return theorem + ":" + json.dumps(instance, sort_keys=True)
