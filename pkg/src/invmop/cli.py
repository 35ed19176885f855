"""Command-line entry point: invmop generate | infer | sweep | verify | estimate-alpha | eval."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .alpha_estimation import estimate_kkt_vectors
from .basis import generate_monomial_basis
from .critical_set import (NODE_BUDGET, GridBudgetError, cluster_components, component_sizes,
                           filter_near_data, grid_scan, hausdorff, save_cloud)
from .generators import (DescentOptions, SaaConfig, gen_circle, gen_ellipse, gen_saa_location,
                         gen_scalarized_dataset, gen_three_lines)
from .kkt import DataFormatError, DataSet, load_dataset, read_rows, save_dataset
from .objective import best_alpha_many, get_objective
from .solver import (NoSolutionError, OverfittingError, SolverError, degree_sweep, load_model,
                     save_solution, save_spectrum_csv, solve_inverse)

log = logging.getLogger("invmop")

GENERATORS = ("circle", "ellipse", "three-lines", "saa-location", "scalarize:<objective>")


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument parsing helpers

def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _box(text: str) -> np.ndarray:
    """'lo,hi;lo,hi' -> (n, 2)."""
    try:
        rows = [[float(v) for v in part.split(",")] for part in text.split(";")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad box {text!r}; use lo,hi;lo,hi") from None
    if any(len(r) != 2 for r in rows):
        raise argparse.ArgumentTypeError(f"bad box {text!r}; use lo,hi;lo,hi")
    return np.array(rows)


def _points(text: str) -> np.ndarray:
    """'x,y;x,y' -> (m, n)."""
    try:
        rows = [[float(v) for v in part.split(",")] for part in text.split(";")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad point list {text!r}") from None
    if len({len(r) for r in rows}) != 1:
        raise argparse.ArgumentTypeError("points must all have the same dimension")
    return np.array(rows)


def _degrees(text: str) -> list[int]:
    """'1..7', '2-4', '3' or '1,3,5'."""
    for sep in ("..", "-"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            try:
                lo, hi = int(lo), int(hi)
            except ValueError:
                break
            if lo < 1 or hi < lo:
                raise argparse.ArgumentTypeError(f"bad degree range {text!r}")
            return list(range(lo, hi + 1))
    try:
        degs = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad degree range {text!r}") from None
    if any(d < 1 for d in degs):
        raise argparse.ArgumentTypeError("degrees must be >= 1")
    return degs


def _write_rows(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        fh.write("# " + ",".join(header) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _distinct(*paths) -> None:
    ps = [Path(p).resolve() for p in paths if p is not None]
    if len(ps) != len(set(ps)):
        raise UsageError("input and output paths must be distinct")


# ---------------------------------------------------------------------------
# commands

def cmd_generate(args) -> int:
    name = args.name
    out = Path(args.out)
    prov = {"generator": name, "seed": args.seed}
    if name == "circle":
        data = gen_circle(args.n_points)
    elif name == "ellipse":
        data = gen_ellipse(args.a, args.b, args.n_points)
    elif name == "three-lines":
        data = gen_three_lines(args.per_segment)
    elif name == "saa-location":
        count = None if args.sample_count == 0 else args.sample_count
        data = gen_saa_location(SaaConfig(sample_count=count, scalarization_count=args.scalarization_count,
                                          seed=args.seed))
    elif name.startswith("scalarize:"):
        f = get_objective(name.split(":", 1)[1])
        box = args.box
        if args.starts is not None:
            starts = args.starts
        elif box is not None:
            rng = np.random.default_rng(args.seed)
            starts = rng.uniform(box[:, 0], box[:, 1], size=(args.random_starts, f.n))
        else:
            starts = np.zeros((1, f.n))
        opts = DescentOptions(tol=args.tol, max_iter=args.max_iter, max_step=args.max_step)
        data = gen_scalarized_dataset(f, args.weight_count, starts, opts, box=box)
        prov["objective"] = f.spec
    else:
        raise UsageError(f"unknown generator {name!r}; known: {', '.join(GENERATORS)}")
    save_dataset(data, out, header=args.header, meta=prov)
    log.info("wrote %d points to %s", data.N, out)
    return 0


def cmd_infer(args) -> int:
    spectrum_path = Path(args.spectrum) if args.spectrum else Path(args.out).with_suffix(".spectrum.csv")
    _distinct(args.data, args.out, spectrum_path)
    data = load_dataset(args.data, args.n, args.k)
    basis = generate_monomial_basis(data.n, args.degree)
    threshold = None if args.threshold in (None, "gap") else float(args.threshold)
    sol = solve_inverse(data, basis, threshold, args.weights, align_to=args.align_to,
                        skip_degenerate=args.skip_degenerate, guard_overfitting=args.guard_overfitting)
    save_solution(sol, args.out)
    save_spectrum_csv(sol.spectrum, spectrum_path)
    s = sol.spectrum.singular_values
    shown = min(10, s.size)
    print("singular values: " + " ".join(f"s{i + 1}={v:.6g}" for i, v in enumerate(s[:shown])))
    print(f"threshold: {sol.threshold:.6g}")
    print("selected: {" + ",".join(str(i + 1) for i in sol.selected) + "}")
    deg = np.nonzero(sol.degenerate)[0]
    print("degenerate variables: " + (", ".join(f"x{i + 1}" for i in deg) if deg.size else "none"))
    for note in sol.notes:
        log.info(note)
    return 0


def cmd_sweep(args) -> int:
    data = load_dataset(args.data, args.n, args.k)
    res = degree_sweep(data, args.degrees)
    rows = [(deg, s1) for deg, s1 in res.items()]
    if args.out:
        _distinct(args.data, args.out)
        _write_rows(Path(args.out), ["degree", "smallest_singular_value"], rows)
    else:
        for deg, s1 in rows:
            print(f"{deg},{s1!r}")
    return 0


def _reference_points(args, n: int, cloud_kw: dict) -> np.ndarray | None:
    given = [a for a in (args.reference_points, args.reference_objective, args.reference_cloud) if a]
    if len(given) > 1:
        raise UsageError("give at most one reference")
    if args.reference_points:
        rows = read_rows(args.reference_points)
        P = np.array(rows, dtype=float)
        if P.ndim != 2 or P.shape[1] < n:
            raise DataFormatError(f"reference points need at least {n} columns")
        return P[:, :n]
    if args.reference_objective:
        ref = get_objective(args.reference_objective)
        if ref.n != n:
            raise UsageError(f"reference objective has n = {ref.n}, model has n = {n}")
        return grid_scan(ref, **cloud_kw).X
    if args.reference_cloud:
        return np.array([row[:n] for row in read_rows(args.reference_cloud)], dtype=float).reshape(-1, n)
    return None


def cmd_verify(args) -> int:
    _distinct(args.model, args.out, args.report)
    f, meta = load_model(args.model)
    if args.box.shape[0] != f.n:
        raise UsageError(f"box has {args.box.shape[0]} axes, model has n = {f.n}")
    scan_kw = dict(box=args.box, resolution=args.resolution, tol=args.tol, method=args.method,
                   budget=args.budget)
    cloud = cluster_components(grid_scan(f, **scan_kw), args.radius)
    report = {"model": str(args.model), "points": len(cloud),
              "component_sizes": component_sizes(cloud.labels)}
    if args.data:
        data = load_dataset(args.data, f.n, f.k)
        cloud = filter_near_data(cloud, data, args.filter_radius)
        report["filtered"] = {"radius": args.filter_radius, "points": len(cloud),
                              "component_sizes": np.unique(cloud.labels, return_counts=True)[1].tolist()}
    report["components"] = len(np.unique(cloud.labels)) if len(cloud) else 0
    ref = _reference_points(args, f.n, scan_kw)
    if ref is not None:
        if len(cloud) == 0 or len(ref) == 0:
            raise UsageError("Hausdorff distance needs a nonempty cloud and reference")
        report["hausdorff"] = hausdorff(cloud.X, ref)
    save_cloud(cloud, args.out)
    text = json.dumps(report, indent=2) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    print(text, end="")
    return 0


def cmd_estimate_alpha(args) -> int:
    _distinct(args.front, args.out, args.rejects)
    rows = np.array(read_rows(args.front), dtype=float)
    k = args.k
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise DataFormatError(f"{args.front}: no front points")
    if rows.shape[1] < k:
        raise DataFormatError(f"{args.front}: expected at least k = {k} columns, got {rows.shape[1]}")
    F, X = rows[:, :k], rows[:, k:]
    if X.shape[1] == 0:
        X = F  # no decision columns: the image points stand in
    est = estimate_kkt_vectors(F, args.neighborhood)
    ok = est.accepted
    rejects = Path(args.rejects) if args.rejects else Path(args.out).with_suffix(".rejects.csv")
    if ok.any():
        save_dataset(DataSet(X[ok], est.alpha[ok]), args.out, meta={"generator": "estimate-alpha"})
    else:
        raise SolverError("every front point was flagged; no data written")
    with rejects.open("w", newline="") as fh:
        fh.write("# row,reason\n")
        w = csv.writer(fh, lineterminator="\n")
        for i in np.nonzero(~ok)[0]:
            w.writerow([int(i) + 1, est.reasons[i]])
    log.info("%d accepted, %d flagged (see %s)", int(ok.sum()), int((~ok).sum()), rejects)
    return 0


def cmd_eval(args) -> int:
    _distinct(args.model, args.points, args.out)
    f, _ = load_model(args.model)
    rows = np.array(read_rows(args.points), dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise DataFormatError(f"{args.points}: no points")
    if rows.shape[1] not in (f.n, f.n + f.k):
        raise DataFormatError(f"points have {rows.shape[1]} columns; the model needs n = {f.n} "
                              f"(or n + k = {f.n + f.k} for a data file)")
    X = rows[:, :f.n]
    V, J = f.value(X), f.jacobian(X)
    A, r = best_alpha_many(f, X)
    n, k = f.n, f.k
    header = ([f"x{i + 1}" for i in range(n)] + [f"f{i + 1}" for i in range(k)]
              + [f"df{i + 1}_dx{j + 1}" for i in range(k) for j in range(n)]
              + [f"alpha{i + 1}" for i in range(k)] + ["residual"])
    out_rows = [[*x, *v, *jac.reshape(-1), *a, res] for x, v, jac, a, res in zip(X, V, J, A, r)]
    if args.out:
        _write_rows(Path(args.out), header, ([float(t) for t in row] for row in out_rows))
    else:
        print(",".join(header))
        for row in out_rows:
            print(",".join(repr(float(t)) for t in row))
    return 0


# ---------------------------------------------------------------------------

def _dims(parser) -> None:
    parser.add_argument("--n", type=int, help="number of variables (default: from the JSON sidecar)")
    parser.add_argument("--k", type=int, help="number of objectives (default: from the JSON sidecar)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="invmop", description="Objective vectors from Pareto critical data.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--quiet", action="store_true", help="suppress informational messages")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a data set")
    g.add_argument("name", help="one of: " + ", ".join(GENERATORS))
    g.add_argument("--out", required=True)
    g.add_argument("--header", action="store_true", help="write a '#' column header line")
    g.add_argument("--n-points", type=int, default=1000)
    g.add_argument("--a", type=float, default=2.0)
    g.add_argument("--b", type=float, default=1.0)
    g.add_argument("--per-segment", type=int, default=500)
    g.add_argument("--sample-count", type=int, default=50, help="N_s; 0 uses the exact expectation")
    g.add_argument("--scalarization-count", type=int, default=1000)
    g.add_argument("--weight-count", type=int, default=26)
    g.add_argument("--starts", type=_points, help="start points 'x,y;x,y'")
    g.add_argument("--random-starts", type=int, default=5, help="seeded starts in --box when --starts is absent")
    g.add_argument("--box", type=_box, help="'lo,hi;lo,hi'; minimizers outside are discarded")
    g.add_argument("--tol", type=float, default=1e-8)
    g.add_argument("--max-iter", type=int, default=10_000)
    g.add_argument("--max-step", type=float, default=1.0)
    g.set_defaults(func=cmd_generate)

    i = sub.add_parser("infer", help="fit an objective vector to a data set")
    i.add_argument("data")
    _dims(i)
    i.add_argument("--degree", type=int, required=True)
    i.add_argument("--out", required=True, help="model JSON")
    i.add_argument("--spectrum", help="spectrum CSV (default: <out>.spectrum.csv)")
    i.add_argument("--threshold", default="gap", help="explicit s_bar or 'gap' (default)")
    i.add_argument("--weights", type=_floats, help="lambda over the selected indices")
    i.add_argument("--align-to", type=_floats, help="coefficient vector to project onto the selected span")
    i.add_argument("--skip-degenerate", action="store_true")
    i.add_argument("--guard-overfitting", action="store_true", help="refuse n*N < k*d")
    i.set_defaults(func=cmd_infer)

    s = sub.add_parser("sweep", help="smallest singular value per maximal degree")
    s.add_argument("data")
    _dims(s)
    s.add_argument("--degrees", type=_degrees, default=_degrees("1..7"), help="e.g. 1..7, 2-4 or 1,3")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="grid-scan a model's critical set and compare")
    v.add_argument("model")
    v.add_argument("--box", type=_box, required=True)
    v.add_argument("--resolution", type=int, default=301)
    v.add_argument("--tol", type=float, default=1e-2)
    v.add_argument("--method", choices=("residual", "crossing"), default="residual")
    v.add_argument("--radius", type=float, help="linking radius (default: twice the grid spacing)")
    v.add_argument("--budget", type=int, default=NODE_BUDGET)
    v.add_argument("--data", help="data CSV for filtering components")
    v.add_argument("--filter-radius", type=float, default=0.1)
    v.add_argument("--reference-points", help="CSV whose first n columns are reference points")
    v.add_argument("--reference-objective", help="built-in objective scanned with the same settings")
    v.add_argument("--reference-cloud", help="cloud CSV from an earlier verify")
    v.add_argument("--out", required=True, help="cloud CSV")
    v.add_argument("--report", help="report JSON")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("estimate-alpha", help="KKT vectors from a Pareto front sample")
    e.add_argument("front", help="CSV: k image columns, then optional decision columns")
    e.add_argument("--k", type=int, default=2)
    e.add_argument("--neighborhood", type=int)
    e.add_argument("--out", required=True)
    e.add_argument("--rejects", help="flagged rows (default: <out>.rejects.csv)")
    e.set_defaults(func=cmd_estimate_alpha)

    ev = sub.add_parser("eval", help="values, Jacobians and best KKT vectors of a model")
    ev.add_argument("model")
    ev.add_argument("points", help="CSV with n columns, or a data CSV")
    ev.add_argument("--out")
    ev.set_defaults(func=cmd_eval)
    return p


def _setup_logging(quiet: bool) -> None:
    # a fresh handler per call picks up the current sys.stderr
    for h in [h for h in log.handlers if getattr(h, "_invmop_cli", False)]:
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    handler._invmop_cli = True
    log.addHandler(handler)
    log.setLevel(logging.WARNING if quiet else logging.INFO)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.quiet)
    try:
        return args.func(args)
    except (NoSolutionError, OverfittingError, GridBudgetError) as exc:
        log.error("%s", exc)
        return 1
    except (UsageError, DataFormatError, SolverError, KeyError, ValueError, OSError) as exc:
        log.error("%s", exc.args[0] if isinstance(exc, KeyError) and exc.args else exc)
        return 2 if isinstance(exc, UsageError) else 1


if __name__ == "__main__":
    sys.exit(main())
