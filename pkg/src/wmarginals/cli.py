"""Command-line front end.

Exit codes: 0 success, 2 malformed input, 3 resource cap, 4 inconsistent,
5 insufficient. Every path argument accepts ``-`` for stdin/stdout.

Party-list syntax: groups separated by ``,`` (subsets) or ``|`` (blocks);
inside a group labels are single digits (``12``) or ``-``-separated
(``10-11``). ``all-pairs`` and ``star`` are accepted wherever pairs are.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

import numpy as np

from . import formats
from .bitindex import all_pairs, canonical_pair, star_pairs
from .errors import CapExceededError
from .oracle import multistart_pure_fit, phase_twist, uniqueness_evidence
from .ptrace import rdm_from_pure
from .reconstruct import Verdict, reconstruct_mixed, reconstruct_pure
from .states import DEFAULT_TOL, PureState, Tolerances, WCoefficients, make_w, w_bipartite_marginal

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CAP = 3
EXIT_INCONSISTENT = 4
EXIT_INSUFFICIENT = 5


def parse_group(token: str) -> list[int]:
    token = token.strip()
    if not token:
        raise formats.FormatError("empty party group")
    parts = token.split("-") if "-" in token else list(token)
    try:
        return [int(p) for p in parts]
    except ValueError as exc:
        raise formats.FormatError(f"bad party group {token!r}") from exc


def parse_subsets(text: str, n: int) -> list[tuple[int, ...]]:
    if text == "all-pairs":
        return all_pairs(n)
    if text == "star":
        return star_pairs(n)
    out = []
    for tok in text.split(","):
        group = sorted(parse_group(tok))
        if len(set(group)) != len(group) or group[0] < 1 or group[-1] > n:
            raise formats.FormatError(f"bad subset {tok!r} for n={n}")
        out.append(tuple(group))
    return out


def parse_pairs(text: str, n: int) -> list[tuple[int, int]]:
    out = []
    for s in parse_subsets(text, n):
        if len(s) != 2:
            raise formats.FormatError(f"expected a pair, got {s}")
        out.append(canonical_pair(s[0], s[1], n))
    return out


def parse_blocks(text: str, n: int) -> list[list[int]]:
    blocks = [parse_group(tok) for tok in text.split("|")]
    flat = sorted(p for b in blocks for p in b)
    if flat != list(range(1, n + 1)):
        raise formats.FormatError(f"blocks {text!r} do not partition parties 1..{n}")
    return blocks


def parse_phases(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise formats.FormatError(f"bad phase list {text!r}") from exc


def _tolerances(args) -> Tolerances:
    return Tolerances(
        zero_tol=args.tol_zero if args.tol_zero is not None else DEFAULT_TOL.zero_tol,
        consistency_tol=args.tol_consistency if args.tol_consistency is not None else DEFAULT_TOL.consistency_tol,
    )


def _load_w(path: str, tol: Tolerances) -> WCoefficients:
    state = formats.state_from_dict(formats.read_json(path), tol)
    if not isinstance(state, WCoefficients):
        raise formats.FormatError("expected a w-state file (kind 'w')")
    return state


def cmd_marginals(args) -> int:
    tol = _tolerances(args)
    state = formats.state_from_dict(formats.read_json(args.state), tol)
    n = state.n
    subsets = parse_subsets(args.subsets, n)
    rdms = []
    psi: PureState | None = state if isinstance(state, PureState) else None
    for s in subsets:
        if isinstance(state, WCoefficients) and len(s) == 2:
            rdms.append(w_bipartite_marginal(state, *s))
            continue
        if psi is None:
            psi = make_w(state)
        rdms.append(rdm_from_pure(psi, s))
    formats.write_text(args.out, formats.dumps(formats.marginals_to_dict(n, rdms)))
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    tol = _tolerances(args)
    ms = formats.marginal_set_from_dict(formats.read_json(args.marginals), tol)
    report = reconstruct_mixed(ms) if args.mode == "mixed" else reconstruct_pure(ms)
    formats.write_text(args.out, formats.dumps(formats.report_to_dict(report)))
    return {
        Verdict.UNIQUE_W: EXIT_OK,
        Verdict.INCONSISTENT: EXIT_INCONSISTENT,
        Verdict.INSUFFICIENT: EXIT_INSUFFICIENT,
    }[report.verdict]


def cmd_verify_unique(args) -> int:
    c = _load_w(args.wstate, _tolerances(args))
    pairs = parse_pairs(args.pairs, c.n)
    ev = uniqueness_evidence(c, pairs, samples=args.samples, seed=args.seed)
    formats.write_text(args.out, formats.dumps(ev))
    return EXIT_OK


def cmd_counterexample(args) -> int:
    c = _load_w(args.wstate, _tolerances(args))
    blocks = parse_blocks(args.blocks, c.n)
    phases = parse_phases(args.phases)
    if len(phases) != len(blocks):
        raise formats.FormatError(f"{len(blocks)} blocks but {len(phases)} phases")
    twisted = phase_twist(c, blocks, phases)
    original = make_w(c)
    table = {}
    for j, k in all_pairs(c.n):
        a = rdm_from_pure(twisted, (j, k)).entries
        b = rdm_from_pure(original, (j, k)).entries
        table[f"{j},{k}"] = float(np.abs(a - b).max())
    formats.write_text(args.out, formats.dumps(formats.pure_state_to_dict(twisted)))
    text = formats.dumps({"residuals": table})
    if args.table:
        formats.write_text(args.table, text)
    else:
        (sys.stderr if args.out == "-" else sys.stdout).write(text)
    return EXIT_OK


def cmd_fit(args) -> int:
    tol = _tolerances(args)
    ms = formats.marginal_set_from_dict(formats.read_json(args.marginals), tol)
    rep = multistart_pure_fit(ms, starts=args.starts, seed=args.seed, max_iters=args.max_iters)
    out = {
        "applicable": rep.applicable,
        "message": rep.message,
        "starts": rep.starts,
        "failures": rep.failures,
        "minimizers": [
            {
                "coefficients": formats.encode_complex_array(m.coefficients),
                "residual": m.residual,
                "converged": m.converged,
                "iterations": m.iterations,
                "count": m.count,
            }
            for m in rep.minimizers
        ],
    }
    formats.write_text(args.out, formats.dumps(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output path (default: stdout)")
    common.add_argument("--tol-zero", type=float, default=None)
    common.add_argument("--tol-consistency", type=float, default=None)
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="wmarginals", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("marginals", parents=[common], help="reduced density matrices of a state")
    p.add_argument("state")
    p.add_argument("--subsets", default="all-pairs")
    p.set_defaults(func=cmd_marginals)

    p = sub.add_parser("reconstruct", parents=[common], help="recover a W state from pair marginals")
    p.add_argument("marginals")
    p.add_argument("--mode", choices=["mixed", "pure-star"], default="mixed")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("verify-unique", parents=[common], help="feasibility scan around a W state")
    p.add_argument("wstate")
    p.add_argument("--pairs", default="all-pairs")
    p.add_argument("--samples", type=int, default=10_000)
    p.set_defaults(func=cmd_verify_unique)

    p = sub.add_parser("counterexample", parents=[common], help="block phase twist of a W state")
    p.add_argument("wstate")
    p.add_argument("--blocks", required=True)
    p.add_argument("--phases", required=True)
    p.add_argument("--table", default=None, help="residual table path (default: stdout, or stderr if --out is stdout)")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("fit", parents=[common], help="multi-start pure-state fit to pair marginals")
    p.add_argument("marginals")
    p.add_argument("--starts", type=int, default=20)
    p.add_argument("--max-iters", type=int, default=5000)
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (formats.FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
