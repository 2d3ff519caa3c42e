"""Command-line surface: compatibility checks, region sweeps, certificate handling.

Exit codes for decisions: 0 compatible/feasible, 1 incompatible, 2
inconclusive; 64 for unparseable input files, 65 for dimension
mismatches.  Sweeps write deterministic CSV (row-major grid, then a
boundary section with the first feasible step per column).  All
configuration is via flags; nothing reads the environment.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import sdp, verify
from .channels import Channel, channel_from_json, partial_depolarizing_channel, xi_channel
from .jordan import jordan_channel
from .sdp.decide import decide
from .witness import JordanWitness, Witness, certificate_from_json, certificate_to_json, verify_jordan_witness, verify_witness

EXIT_PARSE = 64
EXIT_DIMENSION = 65


def _load_channel(path: str) -> Channel:
    try:
        with open(path) as f:
            data = json.load(f)
        return channel_from_json(data)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot parse channel file {path!r}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def _verdict_char(status: str) -> str:
    return {"Feasible": "1", "Infeasible": "0", "Inconclusive": "?"}[status]


def cmd_check(args) -> int:
    a = _load_channel(args.channel_a)
    b = _load_channel(args.channel_b)
    mode = args.mode.replace("-", "_")
    try:
        dec = decide(a, b, mode, decision_tol=args.tol)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    print(f"verdict: {dec.verdict} (optimum {dec.value:.3e})")
    if dec.note:
        print(f"note: {dec.note}")
    if args.cert:
        payload = {"verdict": dec.verdict.lower(), "mode": args.mode, "value": dec.value}
        if dec.witness is not None:
            report = (
                verify_jordan_witness(dec.witness, a, b)
                if isinstance(dec.witness, JordanWitness)
                else verify_witness(dec.witness, a, b)
            )
            if not report.valid:
                print("error: certificate failed re-verification; not writing", file=sys.stderr)
                return 2
            payload.update(certificate_to_json(dec.witness, margin=report.margin))
        elif dec.compatibilizer is not None:
            # written from the raw certificate matrix: decide() validated it
            # at the certificate tolerance, which is looser than the Channel
            # constructor's
            factors = dec.compatibilizer.shape.factors
            from .channels import _matrix_to_json

            payload["compatibilizer"] = {
                "d_in": factors[0],
                "d_out": int(np.prod(factors[1:])),
                "output_factors": list(factors[1:]),
                "choi": _matrix_to_json(dec.compatibilizer.array),
            }
        with open(args.cert, "w") as f:
            json.dump(payload, f, indent=1)
        print(f"certificate written to {args.cert}")
    return dec.exit_code


def cmd_self_compat(args) -> int:
    c = _load_channel(args.channel)
    mode = "interior_point" if args.solver == "ipm" else "projection"
    try:
        problem = sdp.build_k_extension(c, args.k)
        out = sdp.solve(problem, mode=mode, decision_tol=args.tol)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    print(f"k={args.k} self-compatibility: {out.status}"
          + (f" (optimum {out.value:.3e})" if out.status != "Inconclusive" else ""))
    return {"Feasible": 0, "Infeasible": 1, "Inconclusive": 2}[out.status]


# --- sweep workers (module level so process pools can pickle them) ---------


def _point_xi_self_k(task):
    p, q, k, solver = task
    if p + q > 1.0 + 1e-12:
        return "x"
    xi = xi_channel(p, q)
    mode = "interior_point" if solver == "ipm" else "projection"
    out = sdp.solve(sdp.build_k_extension(xi, k), mode=mode)
    return _verdict_char(out.status)


def _point_xi_jordan_vs_self(task):
    p, q = task
    if p + q > 1.0 + 1e-12:
        return ("x", "x", "x")
    xi = xi_channel(p, q)
    out = sdp.solve(sdp.build_compat(xi, xi))
    self_v = _verdict_char(out.status)
    jstd = "1" if np.linalg.eigvalsh(jordan_channel(xi.rep, xi.rep).choi.array).min() >= -1e-10 else "0"
    from .channels import validate

    mp = "1" if validate(xi.rep).eb_2x2 else "0"
    return (self_v, jstd, mp)


def _point_depol_pair(task):
    q0, q1 = task
    f = partial_depolarizing_channel(q0, 2)
    g = partial_depolarizing_channel(q1, 2)
    out = sdp.solve(sdp.build_compat(f, g))
    compat = _verdict_char(out.status)
    jstd = "1" if np.linalg.eigvalsh(jordan_channel(f.rep, g.rep).choi.array).min() >= -1e-10 else "0"
    hull = "1" if (2 * q0 + q1 >= 1 - 1e-12 and q0 + 2 * q1 >= 1 - 1e-12) else "0"
    return (compat, jstd, hull)


def _run_grid(worker, tasks, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(worker, tasks, chunksize=8))
    return [worker(t) for t in tasks]


def _fmt(v: float) -> str:
    return f"{v:.10g}"


def _first_flip(col_rows, feasible_index):
    """Smallest q (second coordinate) in a column whose verdict is '1'."""
    for row in col_rows:
        if row[feasible_index] == "1":
            return row[1]
    return ""


def cmd_sweep(args) -> int:
    n = args.grid
    if n < 2:
        print("error: grid must be at least 2", file=sys.stderr)
        return EXIT_PARSE
    axis = [i / (n - 1) for i in range(n)]
    rows = []
    if args.family == "xi_self_k":
        k = args.k or 2
        if k < 2:
            print("error: k must be at least 2", file=sys.stderr)
            return EXIT_PARSE
        solver = args.solver or ("ipm" if k <= 3 else "projection")
        tasks = [(p, q, k, solver) for p in axis for q in axis]
        verdicts = _run_grid(_point_xi_self_k, tasks, args.jobs)
        header = ["p", "q", "verdict", "k"]
        for (p, q, _k, _s), v in zip(tasks, verdicts):
            rows.append([_fmt(p), _fmt(q), v, str(k)])
        boundary_header = ["boundary_p", "boundary_q"]
        boundaries = []
        for i, p in enumerate(axis):
            col = rows[i * n : (i + 1) * n]
            boundaries.append([_fmt(p), _first_flip(col, 2)])
    elif args.family == "xi_jordan_vs_self":
        tasks = [(p, q) for p in axis for q in axis]
        verdicts = _run_grid(_point_xi_jordan_vs_self, tasks, args.jobs)
        header = ["p", "q", "self", "jordan_std", "mp"]
        for (p, q), (sv, jv, mv) in zip(tasks, verdicts):
            rows.append([_fmt(p), _fmt(q), sv, jv, mv])
        boundary_header = ["boundary_p", "q_self", "q_jordan_std", "q_mp"]
        boundaries = []
        for i, p in enumerate(axis):
            col = rows[i * n : (i + 1) * n]
            boundaries.append([_fmt(p), _first_flip(col, 2), _first_flip(col, 3),
                               _first_flip(col, 4)])
    elif args.family == "depol_pair":
        tasks = [(q0, q1) for q0 in axis for q1 in axis]
        verdicts = _run_grid(_point_depol_pair, tasks, args.jobs)
        header = ["q0", "q1", "verdict_compat", "verdict_jordan_std", "in_hull"]
        for (q0, q1), (cv, jv, hv) in zip(tasks, verdicts):
            rows.append([_fmt(q0), _fmt(q1), cv, jv, hv])
        boundary_header = ["boundary_q0", "boundary_q1"]
        boundaries = []
        for i, q0 in enumerate(axis):
            col = rows[i * n : (i + 1) * n]
            boundaries.append([_fmt(q0), _first_flip(col, 2)])
    else:
        print(f"error: unknown sweep family {args.family!r}", file=sys.stderr)
        return EXIT_PARSE

    with open(args.out, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
        writer.writerow([])
        writer.writerow(boundary_header)
        writer.writerows(boundaries)
    print(f"wrote {len(rows)} grid rows to {args.out}")
    inconclusive = sum(1 for r in rows if "?" in r)
    if inconclusive:
        print(f"warning: {inconclusive} grid points were inconclusive", file=sys.stderr)
    return 0


def cmd_witness_verify(args) -> int:
    try:
        with open(args.cert) as f:
            data = json.load(f)
        w = certificate_from_json(data)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot parse certificate {args.cert!r}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    a = _load_channel(args.channel_a)
    b = _load_channel(args.channel_b)
    try:
        if isinstance(w, Witness):
            report = verify_witness(w, a, b)
        else:
            report = verify_jordan_witness(w, a, b)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    print(f"valid: {report.valid}  margin: {report.margin:.12g}  "
          f"min_eig: {report.min_eig:.3e}")
    return 0 if report.valid else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcc",
                                     description="Decide compatibility of quantum channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="decide compatibility of a channel pair")
    p_check.add_argument("channel_a")
    p_check.add_argument("channel_b")
    p_check.add_argument("--mode", default="compat",
                         choices=["compat", "jordan", "ppt-compat"])
    p_check.add_argument("--tol", type=float, default=1e-7)
    p_check.add_argument("--cert", help="write the certificate JSON here")
    p_check.set_defaults(func=cmd_check)

    p_self = sub.add_parser("self-compat", help="k-fold self-compatibility")
    p_self.add_argument("channel")
    p_self.add_argument("--k", type=int, default=2)
    p_self.add_argument("--tol", type=float, default=1e-7)
    p_self.add_argument("--solver", choices=["ipm", "projection"], default="ipm")
    p_self.set_defaults(func=cmd_self_compat)

    p_sweep = sub.add_parser("sweep", help="region sweep emitting CSV curve data")
    p_sweep.add_argument("family", choices=["xi_self_k", "xi_jordan_vs_self", "depol_pair"])
    p_sweep.add_argument("--grid", type=int, default=21)
    p_sweep.add_argument("--k", type=int)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--solver", choices=["ipm", "projection"])
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)

    p_wit = sub.add_parser("witness", help="certificate operations")
    wit_sub = p_wit.add_subparsers(dest="witness_command", required=True)
    p_wv = wit_sub.add_parser("verify", help="re-verify a certificate file")
    p_wv.add_argument("cert")
    p_wv.add_argument("channel_a")
    p_wv.add_argument("channel_b")
    p_wv.set_defaults(func=cmd_witness_verify)

    p_vp = sub.add_parser("verify-paper",
                          help="re-run the built-in reference examples")
    p_vp.set_defaults(func=lambda args: verify.main())
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:  # file-level errors raised deep in handlers
        return int(exc.code)


if __name__ == "__main__":
    sys.exit(main())
