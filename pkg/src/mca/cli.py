"""Command-line surface: validate, stats, solve, kernelize, generate, bench.

Exit codes: 0 ok, 1 usage error, 2 invalid instance, 3 size guard
exceeded, 4 cross-algorithm disagreement in the bench harness.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import multiprocessing
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import dpcolors, dpdifficult, generators, kernel, oracle, poly, treewidth
from .errors import GuardExceededError, McaError, SolverTimeout
from .instance import (
    Instance,
    Stats,
    color_hierarchy,
    parse_instance,
    renumber_colors,
    stats,
    validate,
    write_instance,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_GUARD = 3
EXIT_DISAGREE = 4

ALGOS = ("auto", "brute", "colors", "difficult", "treewidth", "arbhier")


@dataclass
class Guards:
    brute_n: int = oracle.ORACLE_MAX_N
    colors: int = dpcolors.COLORS_MAX
    difficult: int = dpdifficult.DIFFICULT_MAX
    lc: int = treewidth.LC_MAX
    width: int = treewidth.WIDTH_MAX


def select_algorithm(st: Stats, guards: Guards = Guards()) -> str:
    """Pick the concrete algorithm with the cheapest cost estimate.

    Arborescent hierarchies go to the polynomial solver outright; the
    rest compare 3^nhs, 3^|C|, 2^lc * 4^(ht+1) and 2^n under their size
    guards, preferring the difficult-color DP on ties.
    """
    if st.is_arb_hierarchy:
        return "arbhier"
    candidates: list[tuple[float, int, str]] = []
    if st.nhs <= guards.difficult:
        candidates.append(
            (3.0**st.nhs * st.n * max(st.max_child_colors, 1), 0, "difficult")
        )
    if st.color_count <= guards.colors:
        candidates.append((3.0**st.color_count * max(st.m, 1), 1, "colors"))
    if st.lc <= guards.lc and st.ht_upper <= guards.width:
        candidates.append(
            (2.0**st.lc * 4.0 ** (st.ht_upper + 1) * st.color_count, 2, "treewidth")
        )
    if st.n <= guards.brute_n:
        candidates.append((2.0**st.n * max(st.m, 1), 3, "brute"))
    if not candidates:
        raise GuardExceededError(
            "every solver guard is exceeded; pick one explicitly with --algo"
        )
    return min(candidates)[2]


def run_solver(inst: Instance, algo: str, counters: dict | None = None):
    if algo == "brute":
        return oracle.brute_force_solve(inst)
    if algo == "colors":
        return dpcolors.solve_colors_dp(inst, counters=counters)
    if algo == "difficult":
        return dpdifficult.solve_difficult_dp(inst, counters=counters)
    if algo == "treewidth":
        return treewidth.solve_treewidth(inst, counters=counters)
    if algo == "arbhier":
        hier = color_hierarchy(inst)
        arb, _ = poly.is_arb_hierarchy(hier)
        if not arb:
            raise McaError("the color hierarchy is not an arborescence")
        return poly.solve_arb_hierarchy(inst, inst.root, hier, counters=counters)
    raise McaError(f"unknown algorithm {algo!r}")


# ---------------------------------------------------------------------------
# bench harness


def _bench_worker(path: str, algo: str, pipe) -> None:
    try:
        inst = parse_instance(Path(path).read_text())
        counters: dict = {}
        t0 = time.monotonic()
        sol = run_solver(inst, algo, counters)
        pipe.send(("ok", sol.weight, time.monotonic() - t0, counters))
    except GuardExceededError as exc:
        pipe.send(("guard", str(exc), 0.0, {}))
    except Exception as exc:  # noqa: BLE001 - reported per record
        pipe.send(("error", str(exc), 0.0, {}))
    finally:
        pipe.close()


def run_bench(
    directory: str,
    algos: list[str],
    timeout: float,
    csv_path: str | None = None,
    oracle_max_n: int = 14,
):
    """Run every (instance, algorithm) pair and cross-check the weights.

    Returns (records, disagreements).  Each record is a dict; a weight
    disagreement between finished algorithms is a hard error for the
    caller.  The oracle column is filled when brute force ran as well.
    """
    files = sorted(Path(directory).glob("*.mca"))
    records: list[dict] = []
    disagreements: list[str] = []
    ctx = multiprocessing.get_context("fork")
    for path in files:
        weights: dict[str, float] = {}
        for algo in algos:
            rx, tx = ctx.Pipe(duplex=False)
            proc = ctx.Process(target=_bench_worker, args=(str(path), algo, tx))
            t0 = time.monotonic()
            proc.start()
            tx.close()
            proc.join(timeout)
            rec = {"instance": path.name, "algo": algo, "seconds": time.monotonic() - t0}
            if proc.is_alive():
                proc.terminate()
                proc.join()
                rec.update(status="timeout", weight=None, counters={})
            else:
                try:
                    status, payload, secs, counters = rx.recv()
                except EOFError:
                    status, payload, secs, counters = "error", "worker died", 0.0, {}
                if status == "ok":
                    rec.update(status="ok", weight=payload, seconds=secs, counters=counters)
                    weights[algo] = payload
                else:
                    rec.update(status=status, weight=None, detail=payload, counters={})
            rx.close()
            records.append(rec)
        if len(weights) > 1:
            vals = sorted(weights.values())
            if vals[-1] - vals[0] > 1e-9:
                disagreements.append(f"{path.name}: {weights}")
        ref = weights.get("brute")
        for rec in records:
            if rec["instance"] == path.name and ref is not None and rec["status"] == "ok":
                rec["agrees_oracle"] = abs(rec["weight"] - ref) <= 1e-9
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.DictWriter(
                fh,
                fieldnames=["instance", "algo", "status", "seconds", "weight", "agrees_oracle"],
                extrasaction="ignore",
            )
            writer.writeheader()
            writer.writerows(records)
    return records, disagreements


# ---------------------------------------------------------------------------
# subcommands


def _load(path: str) -> Instance:
    inst = parse_instance(Path(path).read_text())
    report = validate(inst)
    if not report.ok:
        raise McaError("invalid instance: " + "; ".join(report.problems))
    return inst


def _cmd_validate(args) -> int:
    inst = parse_instance(Path(args.file).read_text())
    report = validate(inst)
    if report.ok:
        print("valid")
        return EXIT_OK
    for p in report.problems:
        print(p)
    return EXIT_INVALID


def _cmd_stats(args) -> int:
    st = stats(_load(args.file))
    if args.json:
        print(json.dumps(st.to_json_dict()))
    else:
        for key, val in st.to_json_dict().items():
            print(f"{key} {val}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = _load(args.file)
    algo = args.algo
    if algo == "auto":
        algo = select_algorithm(stats(inst))
    counters: dict | None = {} if args.counters else None
    sol = run_solver(inst, algo, counters)
    if args.json:
        payload = sol.to_json_dict()
        payload["algo"] = algo
        if counters is not None:
            payload["counters"] = counters
        print(json.dumps(payload))
    else:
        print(f"weight {sol.weight!r}")
        for u, v in sorted(sol.arcs):
            print(f"arc {u} {v}")
        if counters is not None:
            print(json.dumps(counters))
    return EXIT_OK


def _cmd_kernelize(args) -> int:
    inst = _load(args.file)
    reduced, log = kernel.kernelize(inst, args.l)
    text = write_instance(renumber_colors(reduced))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.log:
        Path(args.log).write_text(json.dumps(log.to_json_list(), indent=2))
    return EXIT_OK


def _cmd_generate(args) -> int:
    sidecar = None
    if args.kind == "random":
        inst = generators.gen_random(
            n=args.n,
            colors=args.colors,
            arc_density=args.density,
            weight_range=(args.wmin, args.wmax),
            seed=args.seed,
            diamonds=args.diamonds,
            hierarchy=args.hierarchy,
        )
    elif args.kind in ("setcover", "mcsc"):
        sc = generators.parse_set_cover(Path(args.setcover).read_text())
        if args.kind == "setcover":
            inst, target = generators.reduce_set_cover(sc)
        else:
            inst, target = generators.reduce_multicolored_set_cover(sc)
        sidecar = {"target_weight": target, "p": len(sc.sets), "q": sc.universe, "k": sc.k}
    else:  # compose
        parts = [_load(f) for f in args.files]
        inst = generators.or_compose(parts)
    text = write_instance(inst)
    if args.out:
        Path(args.out).write_text(text)
        if sidecar is not None:
            Path(args.out).with_suffix(".json").write_text(json.dumps(sidecar))
    else:
        sys.stdout.write(text)
        if sidecar is not None:
            print(json.dumps(sidecar))
    return EXIT_OK


def _cmd_bench(args) -> int:
    algos = args.algos.split(",") if args.algos else ["brute", "difficult"]
    for a in algos:
        if a not in ALGOS or a == "auto":
            raise McaError(f"bench cannot run algorithm {a!r}")
    records, disagreements = run_bench(args.dir, algos, args.timeout, args.csv)
    if args.json:
        print(json.dumps(records))
    else:
        for rec in records:
            weight = rec["weight"] if rec["weight"] is not None else "-"
            print(f"{rec['instance']} {rec['algo']} {rec['status']} "
                  f"{rec['seconds']:.3f}s {weight}")
    if disagreements:
        for d in disagreements:
            print(f"DISAGREEMENT {d}", file=sys.stderr)
        return EXIT_DISAGREE
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="mca", description=__doc__)
    sub = top.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("file")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("stats", help="structural parameters of an instance")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_stats)

    p = sub.add_parser("solve", help="solve an instance")
    p.add_argument("file")
    p.add_argument("--algo", choices=ALGOS, default="auto")
    p.add_argument("--json", action="store_true")
    p.add_argument("--counters", action="store_true", help="emit debug counters")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("kernelize", help="apply the reduction rules exhaustively")
    p.add_argument("file")
    p.add_argument("--l", type=int, required=True, dest="l",
                   help="allowed number of vertices outside the solution")
    p.add_argument("-o", "--out")
    p.add_argument("--log", help="write the reduction log as JSON")
    p.set_defaults(fn=_cmd_kernelize)

    p = sub.add_parser("generate", help="generate instances")
    gsub = p.add_subparsers(dest="kind", required=True)
    g = gsub.add_parser("random")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--colors", type=int, required=True)
    g.add_argument("--density", type=float, default=0.3)
    g.add_argument("--wmin", type=int, default=-5)
    g.add_argument("--wmax", type=int, default=5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--diamonds", type=int, default=0)
    g.add_argument("--hierarchy", choices=("layered", "tree"), default="layered")
    g.add_argument("-o", "--out")
    g.set_defaults(fn=_cmd_generate)
    for kind in ("setcover", "mcsc"):
        g = gsub.add_parser(kind)
        g.add_argument("setcover", help="set-cover text file")
        g.add_argument("-o", "--out")
        g.set_defaults(fn=_cmd_generate)
    g = gsub.add_parser("compose")
    g.add_argument("files", nargs="+")
    g.add_argument("-o", "--out")
    g.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("bench", help="run a directory of instances")
    p.add_argument("dir")
    p.add_argument("--algos", help="comma-separated algorithm list")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--csv")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_bench)
    return top


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (GuardExceededError, SolverTimeout) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except McaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
