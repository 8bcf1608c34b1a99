"""Command-line driver. Subcommands gen | dims | gtable | tangents | verify
| report. Every artifact embeds the config hash, seed, and tool version, and
identical configs reproduce byte-identical payloads."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import dims
from . import fractals as fr
from . import gtable as gt
from . import metric
from . import quasicocycle as qc
from . import svgplot
from . import tangent as tg
from . import verify
from .errors import BudgetExhausted, GridRangeError, InputError, InternalInvariantError

NAMED_FAMILY = {
    "sierpinski-23": fr.SIERPINSKI,
    "vicsek-12": fr.CHESSBOARD,
    "vicsek-caption": fr.CHESSBOARD,
}


class RunConfig:
    """Resolved command parameters; hashed into every artifact."""

    def __init__(self, args):
        # the output path does not affect any computed value, so it stays out
        # of the hashed config and artifacts stay byte-identical across dirs
        self.params = {k: v for k, v in sorted(vars(args).items())
                       if k not in ("func", "out") and v is not None}
        self.seed = int(getattr(args, "seed", 0) or 0)
        self.workers = int(os.environ.get("TANDIM_WORKERS", "1"))
        self.out = Path(getattr(args, "out", None) or ".")

    @property
    def hash(self) -> str:
        blob = json.dumps(self.params, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def meta(self) -> dict:
        return {"configHash": self.hash, "seed": self.seed,
                "version": __version__, "workers": self.workers,
                "config": self.params}


def _write_json(path: Path, payload: dict, cfg: RunConfig):
    doc = {"meta": cfg.meta()}
    doc.update(payload)
    path.write_text(json.dumps(doc, sort_keys=True, indent=1,
                               default=_jsonable) + "\n")


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, fr.FractalSpec):
        return v.to_json()
    return str(v)


def _stamp_csv(path: Path, cfg: RunConfig):
    body = path.read_text()
    path.write_text(f"# configHash={cfg.hash} seed={cfg.seed} "
                    f"version={__version__}\n" + body)


def parse_spec(text: str, depth: int | None):
    """Fractal spec from a schedule name, 'family:[q1,q2,...]' literal, or a
    JSON file path."""
    if text is None:
        raise InputError("this command needs --spec")
    p = Path(text)
    if p.is_file():
        return fr.FractalSpec.from_json(p.read_text())
    if ":" in text:
        family, _, sched = text.partition(":")
        try:
            vals = json.loads(sched)
        except json.JSONDecodeError as e:
            raise InputError(f"bad explicit schedule {sched!r}: {e}") from None
        if not isinstance(vals, list) or not vals:
            raise InputError(f"explicit schedule must be a non-empty list, got {sched!r}")
        return fr.FractalSpec(family, vals, depth or len(vals))
    if text in NAMED_FAMILY:
        return fr.FractalSpec(NAMED_FAMILY[text], text, depth or 8)
    raise InputError(f"unknown spec {text!r}: expected a named schedule "
                     f"({', '.join(NAMED_FAMILY)}), 'family:[...]', "
                     "'counterexample', or a JSON file path")


def _out_dir(cfg: RunConfig) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    return cfg.out


def cmd_gen(args) -> int:
    cfg = RunConfig(args)
    out = _out_dir(cfg)
    if args.spec == "counterexample":
        K = args.depth or 6
        cloud = fr.counterexample_points(K, args.shells_per_cap)
        cloud.verify()
        path = out / "cloud.csv"
        cloud.to_csv(path)
        _stamp_csv(path, cfg)
        _write_json(out / "gen.json", {"kind": "cloud", "K": K,
                                       "shells": len(cloud.shells),
                                       "files": ["cloud.csv"]}, cfg)
        print(f"wrote {path} ({len(cloud.shells)} shells)")
        return 0
    spec = parse_spec(args.spec, args.depth)
    cells = fr.build(spec)
    path = out / "cells.csv"
    fr.cells_to_csv(cells, path)
    _stamp_csv(path, cfg)
    _write_json(out / "gen.json", {"kind": "cells", "spec": spec.to_json(),
                                   "level": cells.level,
                                   "cells": len(cells.addresses),
                                   "files": ["cells.csv"]}, cfg)
    print(f"wrote {path} ({len(cells.addresses)} cells)")
    return 0


def _grids(spec: fr.FractalSpec, kappa: float, t_max, h_max):
    _, ls = spec.level_logs()
    total = float(np.sum(ls))
    if t_max is None:
        t_max = 0.4 * total
    if h_max is None:
        h_max = 0.4 * total
    nt = max(int(math.floor(t_max / kappa)), 1)
    nh = max(int(math.floor(h_max / kappa)), 1)
    return kappa * np.arange(0, nt + 1), kappa * np.arange(1, nh + 1)


def build_table(args) -> gt.GFunction:
    backend = args.backend
    if backend == "comb":
        spec = parse_spec(args.spec, args.depth)
        return gt.g_combinatorial(spec)
    if backend == "geom":
        spec = parse_spec(args.spec, args.depth or 12)
        tGrid, hGrid = _grids(spec, args.kappa, args.t_max, args.h_max)
        return gt.g_geometric(spec, tGrid=tGrid, hGrid=hGrid, budget=args.budget)
    if backend == "finite":
        p = Path(args.spec or "")
        if not p.is_file():
            raise InputError("finite backend needs --spec pointing to a "
                             "metric-space JSON file")
        space = metric.FiniteMetricSpace.from_json(p.read_text())
        ps = metric.PointedSpace(space, space.labels[0])
        t_max = args.t_max if args.t_max is not None else 3.0
        h_max = args.h_max if args.h_max is not None else 2.0
        nt = max(int(math.floor(t_max / args.kappa)), 1)
        nh = max(int(math.floor(h_max / args.kappa)), 1)
        tGrid = args.kappa * np.arange(0, nt + 1)
        hGrid = args.kappa * np.arange(1, nh + 1)
        return gt.g_finite(ps, tGrid, hGrid, budget=args.budget)
    raise InputError(f"unknown backend {backend!r}")


def cmd_dims(args) -> int:
    cfg = RunConfig(args)
    out = _out_dir(cfg)
    G = build_table(args)
    cb = qc.coboundary_bound(G, seed=cfg.seed)
    report = dims.dimension_report(G)
    _write_json(out / "dims.json", {
        "report": json.loads(report.to_json()),
        "coboundary": json.loads(cb.to_json()),
        "chain": dims.dim_chain_check(report),
    }, cfg)
    csv = out / "dims.csv"
    csv.write_text("source,deltaLower,dLower,dUpper,deltaUpper,bracketWidth\n"
                   + report.csv_row() + "\n")
    _stamp_csv(csv, cfg)
    (out / "dims.svg").write_text(svgplot.ratio_chart(G, title="g/h profile"))
    print(f"deltaLower={report.deltaLower:.6f} dLower={report.dLower:.6f} "
          f"dUpper={report.dUpper:.6f} deltaUpper={report.deltaUpper:.6f}")
    print(f"wrote {out / 'dims.json'}, {csv}, {out / 'dims.svg'}")
    return 0


def cmd_gtable(args) -> int:
    cfg = RunConfig(args)
    out = _out_dir(cfg)
    G = build_table(args)
    if args.format == "svg":
        path = out / "gtable.svg"
        path.write_text(svgplot.ratio_chart(G, title="g/h profile"))
    elif args.format == "json":
        path = out / "gtable.json"
        rows = [[float(G.t[i]), G.h_of(i, m), G.g_im(i, m)]
                for i in range(G.N) for m in range(1, G.max_offset(i) + 1)]
        _write_json(path, {"backend": G.backend, "basepoint": G.basepoint,
                           "columns": ["t", "h", "g"], "rows": rows}, cfg)
    else:
        path = out / "gtable.csv"
        G.to_csv(path)
        _stamp_csv(path, cfg)
    print(f"wrote {path} ({G.N} grid points, backend {G.backend})")
    return 0


def cmd_tangents(args) -> int:
    cfg = RunConfig(args)
    out = _out_dir(cfg)
    R = args.radius
    if args.spec == "counterexample":
        K = args.depth or 3
        cloud = fr.counterexample_points(K, args.shells_per_cap)
        snaps = []
        for k, n, logr in cloud.shells:
            if n > 2:
                continue
            s = tg.snapshot_log(cloud, -logr, R, args.budget)
            s.flags["k"] = k
            snaps.append(s)
        scales = [s.flags["logt"] for s in snaps]
        cands = tg.tangent_clusters(snaps, R)
    else:
        spec = parse_spec(args.spec, args.depth)
        _, ls = spec.level_logs()
        logQ = np.concatenate(([0.0], np.cumsum(ls)))
        # keep at least six unresolved levels below each snapshot scale so
        # resolution error stays well under the cluster merge threshold
        scales = [float(math.exp(v)) for v in logQ[:max(spec.depth - 5, 0)]
                  if v <= 300.0]
        if len(scales) < 2:
            raise InputError("spec too shallow for tangent snapshots "
                             "(needs depth >= 7)")
        snaps = [tg.snapshot(spec, None, t, R, args.budget) for t in scales]
        cands = tg.tangent_clusters(snaps, R)
    path = out / "tangents.json"
    _write_json(path, {
        "clusters": len(cands),
        "scales": [float(s) for s in scales],
        "candidates": [json.loads(c.to_json()) for c in cands],
    }, cfg)
    print(f"wrote {path} ({len(cands)} clusters from {len(snaps)} snapshots)")
    return 0


def cmd_verify(args) -> int:
    cfg = RunConfig(args)
    out = _out_dir(cfg)
    names = [args.suite] if args.suite else sorted(verify.SUITES)
    all_ok = True
    results = {}
    for name in names:
        rep = verify.run_suite(name)
        results[name] = rep
        ok = bool(rep.get("pass"))
        all_ok = all_ok and ok
        print(f"{name}: {'PASS' if ok else 'FAIL'}")
    _write_json(out / "verify.json", {"pass": all_ok, "suites": results}, cfg)
    return 0 if all_ok else 1


def cmd_report(args) -> int:
    cfg = RunConfig(args)
    out = _out_dir(cfg)
    depth = args.depth or 2000
    rows = []
    payload = {}
    series = []
    for name in ("sierpinski-23", "vicsek-12"):
        spec = fr.FractalSpec(NAMED_FAMILY[name], name, depth)
        G = gt.g_combinatorial(spec)
        rep = dims.dimension_report(G)
        oracle = dims.closed_form_dims(spec)
        payload[name] = {"report": json.loads(rep.to_json()),
                         "oracle": list(oracle)}
        rows.append(f"{name},{rep.csv_row()}")
        i = G.N // 2
        M = min(G.max_offset(i), 200)
        series.append((name,
                       [math.log(G.h_of(i, m)) for m in range(1, M + 1)],
                       [G.ratio_im(i, m) for m in range(1, M + 1)]))
    _write_json(out / "report.json", payload, cfg)
    csv = out / "report.csv"
    csv.write_text("schedule,source,deltaLower,dLower,dUpper,deltaUpper,"
                   "bracketWidth\n" + "\n".join(rows) + "\n")
    _stamp_csv(csv, cfg)
    (out / "report.svg").write_text(
        svgplot.line_chart(series, title="dimension ratio profiles",
                           xlabel="log h", ylabel="g/h"))
    print(f"wrote {out / 'report.json'}, {csv}, {out / 'report.svg'}")
    return 0


def _add_common(p):
    p.add_argument("--spec", help="schedule name, 'family:[q,...]', "
                                  "'counterexample', or JSON file")
    p.add_argument("--depth", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=0)
    p.add_argument("--out", default=".")
    p.add_argument("--format", choices=("json", "csv", "svg"), default="csv")


def _add_grid(p):
    p.add_argument("--backend", choices=("comb", "geom", "finite"),
                   default="comb")
    p.add_argument("--kappa", type=float, default=0.25)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--h-max", dest="h_max", type=float)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tandim",
        description="covering/packing counts, tangential dimensions, "
                    "translation fractals, tangent-cone audits")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate fractal cells or the shell cloud")
    _add_common(p)
    p.add_argument("--shells-per-cap", type=int, default=4)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("dims", help="dimension report from a g-table")
    _add_common(p)
    _add_grid(p)
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("gtable", help="emit a g-table")
    _add_common(p)
    _add_grid(p)
    p.set_defaults(func=cmd_gtable)

    p = sub.add_parser("tangents", help="tangent-set candidates by clustering")
    _add_common(p)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--shells-per-cap", type=int, default=4)
    p.set_defaults(func=cmd_tangents)

    p = sub.add_parser("verify", help="run a named verification suite")
    _add_common(p)
    p.add_argument("--suite", choices=sorted(verify.SUITES))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="summary over the named schedules")
    _add_common(p)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if args.command == "tangents" and getattr(args, "budget", 0) in (0, None):
        args.budget = tg.DEFAULT_POINT_BUDGET
    try:
        return args.func(args)
    except InputError as e:
        print(f"input error: {e}", file=sys.stderr)
        return 2
    except GridRangeError as e:
        print(f"grid range error: {e}", file=sys.stderr)
        return 3
    except BudgetExhausted as e:
        print(f"budget exhausted: {e}", file=sys.stderr)
        return 4
    except InternalInvariantError as e:
        print(f"internal invariant breached: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
