"""The ``gibbslab`` command line.

Every command writes a JSON report ``{"manifest": ..., "result": ...}`` (or
a CSV table with a sidecar manifest) to ``--out`` or standard output.  Exit
status is 0 when every certificate passes, 1 when a property is refuted
(the report carries the witness) and 2 for usage or budget errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import platform
import re
import sys
import time
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .builders import (
    WindowedSpace,
    kozlov_approx_chain,
    kozlov_chain,
    sullivan_interaction,
    sullivan_report,
)
from .cocycles import from_interaction
from .errors import Falsified, GibbsLabError, InputError, SearchExhausted, UsageError
from .lattice import DEFAULT_BUDGET, Shape, check_pivot_window, check_tmp_window, derive_sft_from_tmp_safe, memory_set
from .markers import (
    MarkerData,
    MarkerParams,
    default_workers,
    marker_pair,
    nonsurjectivity_report,
    search_markers,
    verify_markers,
)
from .norms import dual_ns_norm, norm_ns, norm_sullivan, norm_vs
from .serialize import (
    configuration_from_dict,
    dumps,
    interaction_from_dict,
    interaction_to_dict,
    load_json,
    sft_from_dict,
    sft_to_dict,
    sha256_file,
)
from .zoo import builtin_space, height_table, rigid_coloring_witness

EXIT_OK, EXIT_FALSIFIED, EXIT_USAGE = 0, 1, 2


# ---------------------------------------------------------------------------
# Shape literals
# ---------------------------------------------------------------------------


def _split_top(text: str, sep: str = ";") -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "{(":
            depth += 1
        elif ch in "})":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def _parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition("..")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise InputError(f"bad range {text!r}") from None


def parse_shape(text: str, dim: int = 1) -> Shape:
    """Parse ``"a..b"`` (a cube), ``"{s1;s2;...}"`` or a single site.

    Inside braces each item is an integer, a range ``a..b`` (an interval in
    one dimension) or a site ``(i,j)``.
    """
    text = text.strip()
    if not text:
        raise InputError("empty shape literal")
    if text.startswith("{"):
        if not text.endswith("}"):
            raise InputError(f"unbalanced shape literal {text!r}")
        sites = []
        for item in _split_top(text[1:-1]):
            if item.startswith("("):
                try:
                    sites.append(tuple(int(v) for v in item.strip("()").split(",")))
                except ValueError:
                    raise InputError(f"bad site {item!r}") from None
            elif ".." in item:
                lo, hi = _parse_range(item)
                sites.extend(Shape.box(lo, hi, dim))
            else:
                try:
                    sites.append((int(item),) * dim)
                except ValueError:
                    raise InputError(f"bad site {item!r}") from None
        shape = Shape.of(sites)
    elif ".." in text:
        lo, hi = _parse_range(text)
        shape = Shape.box(lo, hi, dim)
    elif text.startswith("("):
        shape = Shape.of([tuple(int(v) for v in text.strip("()").split(","))])
    else:
        try:
            shape = Shape.of([(int(text),) * dim])
        except ValueError:
            raise InputError(f"bad shape literal {text!r}") from None
    if shape and shape.dim != dim:
        raise InputError(f"shape {text!r} has dimension {shape.dim}, expected {dim}")
    return shape


def parse_chain(text: str, dim: int = 1) -> list[Shape]:
    return [parse_shape(p, dim) for p in _split_top(text)]


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


# ---------------------------------------------------------------------------
# Inputs and manifests
# ---------------------------------------------------------------------------


class Run:
    """Collects the manifest while a command reads its inputs."""

    def __init__(self, args: argparse.Namespace, argv: Sequence[str]):
        self.args = args
        self.argv = list(argv)
        self.inputs: dict[str, str] = {}
        self.budgets: dict[str, Any] = {"patterns": args.budget_patterns}
        self.started = time.perf_counter()

    def read(self, path: str) -> Any:
        data = load_json(path)
        self.inputs[path] = sha256_file(path)
        return data

    def sft(self, spec: str):
        if Path(spec).is_file():
            return sft_from_dict(self.read(spec))
        return builtin_space(spec)

    def manifest(self) -> dict:
        out = {
            "argv": self.argv,
            "seed": self.args.seed,
            "budgets": self.budgets,
            "versions": {
                "gibbslab": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            "inputs": self.inputs,
        }
        if self.args.timing:
            out["wall_clock_seconds"] = round(time.perf_counter() - self.started, 3)
        return out


def _emit(run: Run, result: Any, rows: list[dict] | None = None, flat: bool = False) -> None:
    args = run.args
    fmt = args.format or ("csv" if rows is not None and args.command == "zoo" else "json")
    if fmt == "csv":
        if rows is None:
            raise InputError("this command has no tabular output; use --format json")
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else [], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
        if args.out:
            Path(args.out).write_text(text)
            Path(args.out + ".manifest.json").write_text(dumps(run.manifest()))
        else:
            sys.stdout.write(text)
        return
    body = {**result, "manifest": run.manifest()} if flat else {"manifest": run.manifest(), "result": result}
    text = dumps(body)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_space(run: Run) -> int:
    a = run.args
    sft = run.sft(a.sft)
    d = sft.dimension
    if a.action == "check-tmp":
        origin = Shape.of([(0,) * d])
        A = parse_shape(a.a, d) if a.a else origin
        B = parse_shape(a.b, d) if a.b else (memory_set(sft, A) if sft.forbidden else A.expand(1))
        W = parse_shape(a.window, d) if a.window else B.expand(3)
        res = check_tmp_window(sft, A, B, W, a.halo, a.budget_patterns)
        result = {"holds": res.holds, "pairs_checked": res.pairs_checked, "witness": res.witness,
                  "a": A, "b": B, "window": W, "halo": a.halo, "mode": "window"}
        _emit(run, result)
        return EXIT_OK if res.holds else EXIT_FALSIFIED
    if a.action == "check-pivot":
        box = parse_shape(a.window, d) if a.window else Shape.ball(2, d)
        bg = configuration_from_dict(run.read(a.background), sft) if a.background else None
        res = check_pivot_window(sft, box, bg, a.budget_patterns)
        result = {"holds": res.holds, "fillings": res.pairs_checked, "witness": res.witness,
                  "box": box, "mode": "window"}
        _emit(run, result)
        return EXIT_OK if res.holds else EXIT_FALSIFIED
    derived = derive_sft_from_tmp_safe(sft, a.halo or 3, a.budget_patterns)
    _emit(run, {"sft": sft_to_dict(derived), "forbidden_count": len(derived.forbidden)})
    return EXIT_OK


def cmd_markers(run: Run) -> int:
    a = run.args
    workers = a.workers or default_workers()
    if a.action == "search":
        params = MarkerParams(k=a.k, n=a.n, epsilon=a.epsilon, delta=a.delta, seed=a.seed, attempts=a.attempts)
        run.budgets["attempts"] = a.attempts
        try:
            data = search_markers(params, workers)
        except SearchExhausted as exc:
            _emit(run, {"found": False, "best": exc.best})
            raise
        _emit(run, data.to_dict(), flat=True)
        return EXIT_OK
    if a.action == "verify":
        if not a.file:
            raise InputError("markers verify needs a marker file")
        data = MarkerData.from_dict(run.read(a.file))
        rep = verify_markers(data.params, data.u, data.v)
        _emit(run, rep.to_dict())
        return EXIT_OK if rep.full else EXIT_FALSIFIED
    ks = _int_list(a.ks)
    ns = _int_list(a.ns)
    run.budgets.update(attempts=a.attempts, sullivan_samples=a.samples)
    rep = nonsurjectivity_report(ks, ns, a.epsilon, a.delta, a.seed, a.attempts, workers,
                                 sullivan_samples=a.samples)
    table = [{k: r[k] for k in ("k", "n", "psi_on_marker_pair", "dual_norm_proxy", "dual_norm_bound",
                                "sullivan_sampled_max", "sullivan_bound")} for r in rep["rows"]]
    _emit(run, rep, table)
    ok = all(r["linear_growth_ok"] and r["dual_norm_ok"] and r["sullivan_ok"] for r in rep["rows"])
    return EXIT_OK if ok else EXIT_FALSIFIED


def _load_cocycle(run: Run, sft):
    return from_interaction(interaction_from_dict(run.read(run.args.cocycle), sft))


def cmd_kozlov(run: Run) -> int:
    a = run.args
    sft = run.sft(a.sft)
    d = sft.dimension
    psi = _load_cocycle(run, sft)
    window = parse_shape(a.window, d)
    chain = parse_chain(a.chain, d)
    boundary = configuration_from_dict(run.read(a.boundary), sft) if a.boundary else None
    ws = WindowedSpace(sft, window, boundary, a.budget_patterns)
    if a.eps0 is not None:
        phi, certs = kozlov_approx_chain(ws, psi, chain, a.eps0)
        ok = all(c.details.get("error_ok", True) and c.details.get("mass_ok", True) for c in certs)
        ok = ok and certs[-1].max_error < certs[-1].details["final_tolerance"]
    else:
        phi, certs = kozlov_chain(ws, psi, chain, a.tol)
        ok = all(c.max_error <= a.tol for c in certs)
    result = {
        "interaction": interaction_to_dict(phi, sft),
        "certificates": [c.to_dict() for c in certs],
        "window_configurations": len(ws),
    }
    _emit(run, result)
    return EXIT_OK if ok else EXIT_FALSIFIED


def cmd_sullivan(run: Run) -> int:
    a = run.args
    sft = run.sft(a.sft)
    psi = _load_cocycle(run, sft)
    anchor = configuration_from_dict(run.read(a.anchor), sft) if a.anchor else None
    phi = sullivan_interaction(sft, psi, a.n, anchor, a.budget_patterns)
    rep = sullivan_report(sft, psi, phi, a.n, samples=a.samples, seed=a.seed, budget=a.budget_patterns)
    run.budgets["samples"] = a.samples
    rd = rep.to_dict()
    if a.report:
        Path(a.report).write_text(dumps({"manifest": run.manifest(), "result": rd}))
    _emit(run, {"interaction": interaction_to_dict(phi, sft), "report": rd})
    return EXIT_OK if rd["vs_within_three_sullivan"] else EXIT_FALSIFIED


def cmd_dualnorm(run: Run) -> int:
    a = run.args
    if a.marker:
        data = MarkerData.from_dict(run.read(a.marker))
        pair = marker_pair(data)
        n = data.n
    else:
        raise InputError("dualnorm needs --marker")
    max_interval = a.max_interval or 3 * n
    max_diameter = a.max_diameter or 2 * n
    run.budgets.update(max_interval=max_interval, max_shape_size=a.max_shape_size, max_diameter=max_diameter)
    rep = dual_ns_norm(pair, max_interval, a.max_shape_size, max_diameter, q=2)
    bound = 6 * n / data.params.k
    _emit(run, {"norm": rep.to_dict(), "bound": bound, "within_bound": rep.value <= bound})
    return EXIT_OK if rep.value <= bound else EXIT_FALSIFIED


def cmd_zoo(run: Run) -> int:
    a = run.args
    if a.action == "heights":
        rows = height_table(a.i_max)
        _emit(run, {"rows": rows}, rows)
        return EXIT_OK
    wit = rigid_coloring_witness(a.q, a.radius)
    result = wit.to_dict()
    _emit(run, result)
    return EXIT_OK if not wit.single_site_moves else EXIT_FALSIFIED


def cmd_norms(run: Run) -> int:
    a = run.args
    sft = run.sft(a.sft)
    phi = interaction_from_dict(run.read(a.interaction), sft)
    psi = from_interaction(phi)
    result = {
        "ns": norm_ns(phi, sft, budget=a.budget_patterns).to_dict(),
        "vs": norm_vs(phi, sft, budget=a.budget_patterns).to_dict(),
        "sullivan": norm_sullivan(psi, sft, a.mode, samples=a.samples, seed=a.seed,
                                  budget=a.budget_patterns).to_dict(),
    }
    _emit(run, result)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _workers(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("workers must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=_workers, default=None,
                        help="worker processes (default: $GIBBSLAB_WORKERS or all cores)")
    common.add_argument("--budget-patterns", type=int, default=DEFAULT_BUDGET,
                        help="cap on materialized pattern rows per enumeration")
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--timing", action="store_true", help="record wall-clock time in the manifest")

    p = argparse.ArgumentParser(prog="gibbslab", description="Cocycles, interactions and marker words on lattice spaces.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("space", parents=[common], help="window checks of structural properties")
    sp.add_argument("action", choices=("check-tmp", "check-pivot", "derive-sft"))
    sp.add_argument("--sft", required=True, help="JSON file or builtin such as hardcore:1")
    sp.add_argument("--a", default=None, help="inner region for check-tmp")
    sp.add_argument("--b", default=None, help="candidate memory set for check-tmp")
    sp.add_argument("--window", default=None)
    sp.add_argument("--halo", type=int, default=0)
    sp.add_argument("--background", default=None)
    sp.set_defaults(func=cmd_space)

    mp = sub.add_parser("markers", parents=[common], help="marker word search and certification")
    mp.add_argument("action", choices=("search", "verify", "report"))
    mp.add_argument("file", nargs="?", default=None)
    mp.add_argument("--k", dest="k", type=int, default=2)
    mp.add_argument("--n", dest="n", type=int, default=400)
    mp.add_argument("--ks", default="2", help="comma list of k for report")
    mp.add_argument("--ns", default="400", help="one n or one n per k for report")
    mp.add_argument("--epsilon", default="1/5")
    mp.add_argument("--delta", default="1/2")
    mp.add_argument("--attempts", type=int, default=1_000_000)
    mp.add_argument("--samples", type=int, default=100_000)
    mp.set_defaults(func=cmd_markers)

    kp = sub.add_parser("kozlov", parents=[common], help="exact or approximate chain of partial extensions")
    kp.add_argument("--sft", required=True)
    kp.add_argument("--cocycle", required=True, help="interaction JSON whose cocycle is represented")
    kp.add_argument("--window", required=True)
    kp.add_argument("--chain", required=True)
    kp.add_argument("--boundary", default=None)
    kp.add_argument("--tol", type=float, default=1e-10)
    kp.add_argument("--eps0", type=float, default=None, help="use the approximate builder with this tolerance")
    kp.set_defaults(func=cmd_kozlov)

    sv = sub.add_parser("sullivan", parents=[common], help="shift-invariant interaction from a cocycle")
    sv.add_argument("--sft", required=True)
    sv.add_argument("--cocycle", required=True)
    sv.add_argument("--n", type=int, required=True)
    sv.add_argument("--anchor", default=None)
    sv.add_argument("--report", default=None)
    sv.add_argument("--samples", type=int, default=2000)
    sv.set_defaults(func=cmd_sullivan)

    dp = sub.add_parser("dualnorm", parents=[common], help="dual norm proxy of a marker pair")
    dp.add_argument("--marker", required=True)
    dp.add_argument("--max-interval", type=int, default=None)
    dp.add_argument("--max-shape-size", type=int, default=3)
    dp.add_argument("--max-diameter", type=int, default=None)
    dp.set_defaults(func=cmd_dualnorm)

    zp = sub.add_parser("zoo", parents=[common], help="height tables and rigid colorings")
    zp.add_argument("action", choices=("heights", "rigid"))
    zp.add_argument("--i-max", type=int, default=15)
    zp.add_argument("--q", type=int, default=4)
    zp.add_argument("--radius", type=int, default=3)
    zp.set_defaults(func=cmd_zoo)

    np_ = sub.add_parser("norms", parents=[common], help="NS, VS and Sullivan norms of an interaction")
    np_.add_argument("--sft", required=True)
    np_.add_argument("--interaction", required=True)
    np_.add_argument("--mode", choices=("exact", "sample"), default="exact")
    np_.add_argument("--samples", type=int, default=2000)
    np_.set_defaults(func=cmd_norms)
    return p


def _join_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--window -8..8`` into ``--window=-8..8`` so argparse keeps the value."""
    out: list[str] = []
    for tok in argv:
        if out and re.match(r"^-\d", tok) and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.workers is None and "GIBBSLAB_WORKERS" in os.environ:
        args.workers = default_workers()
    run = Run(args, argv)
    try:
        return args.func(run)
    except Falsified as exc:
        report = {"falsified": str(exc), "witness": exc.witness}
        _emit(run, report)
        print(f"gibbslab: falsified: {exc}", file=sys.stderr)
        return EXIT_FALSIFIED
    except (UsageError, ValueError) as exc:
        print(f"gibbslab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GibbsLabError as exc:  # pragma: no cover
        print(f"gibbslab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
