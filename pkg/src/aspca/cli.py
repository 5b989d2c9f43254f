"""Command-line interface: ``aspca {fit,scores,cluster,simulate,bench}``.

Exit codes: 0 success, 2 usage error, 3 unreadable or invalid input,
4 numerical failure (for instance a non-positive NR eigenvalue).
"""

import argparse
import json
import os
import sys

import numpy as np

from . import bench, files
from .errors import (
    AbsentComponentError,
    ConvergenceError,
    InvalidComponentError,
    InvalidInputError,
    NotPositiveDefiniteError,
)
from .linalg import center_columns, symmetric_eigen
from .pca import MIN_SAMPLES, fit_nr
from .simgen import SETTINGS, make_setting, sample, spec_to_text
from .sparse import cluster_by_sign, label_agreement, sparse_scores, threshold_auto, threshold_omega, tspca

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4
METHODS = ("pca", "nr", "aspca", "tspca", "shrink")


class UsageError(Exception):
    pass


def _check_method_flags(args):
    if args.zeta is not None and args.method != "tspca":
        raise UsageError("--zeta only applies to --method tspca")
    if args.omega is not None and args.method != "shrink":
        raise UsageError("--omega only applies to --method shrink")
    if args.method == "tspca" and args.zeta is None:
        raise UsageError("--method tspca requires --zeta")
    if args.method == "shrink" and args.omega is None:
        raise UsageError("--method shrink requires --omega")
    if args.zeta is not None and not args.zeta > 0:
        raise UsageError("--zeta must be positive")
    if args.omega is not None and not 0 < args.omega <= 1:
        raise UsageError("--omega must lie in (0, 1]")
    if args.components < 1:
        raise UsageError("--components must be at least 1")


def _directions(nr, method, m, zeta=None, omega=None):
    """component -> (indices, values) for the chosen method."""
    out = {}
    for j in range(1, m + 1):
        if method == "pca":
            h = nr.base.direction(j)
            out[j] = (np.arange(h.size), h)
        elif method == "nr":
            h = nr.direction(j)
            out[j] = (np.arange(h.size), h)
        else:
            if method == "aspca":
                sd = threshold_auto(nr, j)
            elif method == "tspca":
                sd = tspca(nr.base.direction(j), zeta, j)
            else:
                sd = threshold_omega(nr, omega, j)
            out[j] = (sd.indices, sd.values)
    return out


def _fit(args, x):
    nr = fit_nr(x)
    if args.components > nr.r:
        raise UsageError(f"--components {args.components} exceeds min(n-2, d) = {nr.r}")
    return nr, _directions(nr, args.method, args.components, args.zeta, args.omega)


def cmd_fit(args):
    _check_method_flags(args)
    x = files.read_matrix(args.input, args.samples_in_rows)
    nr, dirs = _fit(args, x)
    outdir = files.output_path(args.out, ".")
    os.makedirs(outdir, exist_ok=True)
    rows = [
        (j, nr.base.lambda_hat[j - 1], nr.lambda_tilde[j - 1], nr.delta_hat[j - 1], len(dirs[j][0]))
        for j in sorted(dirs)
    ]
    files.write_eigenvalues(os.path.join(outdir, "eigenvalues.csv"), rows)
    files.write_triplets(os.path.join(outdir, "directions.csv"), dirs)
    return EXIT_OK


def _score_matrix(x, dirs, normalized):
    cols = []
    for j in sorted(dirs):
        idx, vals = dirs[j]
        if idx.size and (idx.min() < 0 or idx.max() >= x.shape[0]):
            raise files.MatrixParseError(f"direction {j} has indices outside 0..{x.shape[0] - 1}")
        if normalized:
            vals = vals / np.linalg.norm(vals)
        cols.append(sparse_scores(x, idx, vals))
    return np.column_stack(cols)


def _maybe_svg(args, scores, labels, title):
    if args.svg:
        second = scores[:, 1] if scores.shape[1] > 1 else None
        files.scatter_svg(files.output_path(args.svg, "scores.svg"), scores[:, 0], second, labels, title)


def cmd_scores(args):
    x = files.read_matrix(args.input, args.samples_in_rows)
    dirs = files.read_triplets(args.directions)
    if not dirs:
        raise files.MatrixParseError(f"{args.directions}: no directions")
    scores = _score_matrix(x, dirs, args.normalized)
    files.write_scores(files.output_path(args.out, "scores.csv"), scores)
    _maybe_svg(args, scores, None, "PC scores")
    return EXIT_OK


def _leading_scores_small(x):
    # too few samples for NR: first conventional score from the dual matrix
    centered, _ = center_columns(x)
    n = x.shape[1]
    if n < 2:
        return np.zeros((n, 1))
    eig = symmetric_eigen(centered.T @ centered / (n - 1))
    lam = max(eig.values[0], 0.0)
    return (np.sqrt((n - 1) * lam) * eig.vectors[:, 0])[:, None]


def cmd_cluster(args):
    _check_method_flags(args)
    x = files.read_matrix(args.input, args.samples_in_rows)
    if x.shape[1] < MIN_SAMPLES:
        print(
            f"warning: only {x.shape[1]} samples; clustering on the conventional first PC score",
            file=sys.stderr,
        )
        scores = _leading_scores_small(x)
    else:
        nr = fit_nr(x)
        args.components = min(args.components, nr.r)
        dirs = _directions(nr, args.method, args.components, args.zeta, args.omega)
        scores = _score_matrix(x, dirs, args.normalized)
    labels = cluster_by_sign(scores[:, 0])
    files.write_scores(files.output_path(args.out, "clusters.csv"), scores, labels)
    if args.truth:
        truth = files.read_labels(args.truth)
        print(f"agreement: {label_agreement(labels, truth):.6f}", file=sys.stderr)
    _maybe_svg(args, scores, labels, f"{args.method} scores")
    return EXIT_OK


def cmd_simulate(args):
    if args.d < 1 or args.n < MIN_SAMPLES or args.seed < 0:
        raise UsageError(f"need d >= 1, n >= {MIN_SAMPLES} and seed >= 0")
    try:
        spec = make_setting(args.setting, args.d)
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from None
    s = sample(spec, args.n, args.seed)
    out = files.output_path(args.out, f"{args.setting}.csv")
    header = spec_to_text(spec).strip().replace("\n", ";") + f";n={args.n};seed={args.seed}"
    files.write_matrix(out, s.x, header)
    if s.labels is not None:
        files.write_labels(_labels_path(out), s.labels)
    return EXIT_OK


def _labels_path(path):
    root, ext = os.path.splitext(path)
    return root + ".labels" + (ext or ".csv")


def _int_grid(text, flag):
    try:
        values = [int(v) for v in text.replace(":", ",").split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag} must be integers separated by ':' or ','") from None
    if not values:
        raise UsageError(f"{flag} is empty")
    return values


def cmd_bench(args):
    d_grid = _int_grid(args.d_grid, "--d-grid")
    n_grid = _int_grid(args.n_grid, "--n-grid") if args.n_grid else None
    if args.reps < 1 or args.workers < 1 or args.seed < 0:
        raise UsageError("--reps and --workers must be positive, --seed nonnegative")
    try:
        estimators = bench.parse_estimators(args.estimators)
        for d in d_grid:
            make_setting(args.setting, d)
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from None
    if n_grid is not None and min(n_grid) < MIN_SAMPLES:
        raise UsageError(f"--n-grid values must be at least {MIN_SAMPLES}")
    records = bench.sweep(
        args.setting, d_grid, estimators, R=args.reps, seed=args.seed,
        n_grid=n_grid, workers=args.workers,
    )
    out = files.output_path(args.out, f"bench_{args.setting}.csv")
    with open(out, "w", newline="") as fh:
        bench.write_records(records, fh)
    meta = {
        "design": "paired: every estimator sees the same sample in each replication",
        "streams": "replication r of a cell uses SeedSequence([cell_seed, r]); cell_seed is the seed column",
        "invalid_policy": "replications with a non-positive NR eigenvalue are excluded; see invalid_count",
        "setting": args.setting,
        "base_seed": args.seed,
    }
    with open(out + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    return EXIT_OK


def _add_input(p):
    p.add_argument("input", help="CSV matrix, variables in rows unless --samples-in-rows")
    p.add_argument("--samples-in-rows", action="store_true", help="input rows are samples")


def _add_method(p, default):
    p.add_argument("--method", choices=METHODS, default=default)
    p.add_argument("--components", "-m", type=int, default=1, help="number of components m")
    p.add_argument("--zeta", type=float, help="TSPCA threshold (tspca only)")
    p.add_argument("--omega", type=float, help="cumulative contribution ratio (shrink only)")


def build_parser():
    parser = argparse.ArgumentParser(prog="aspca", description="Automatic sparse PCA for HDLSS data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="estimate eigenvalues and PC directions")
    _add_input(p)
    _add_method(p, "aspca")
    p.add_argument("--out", help="output directory for eigenvalues.csv and directions.csv")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("scores", help="PC scores on directions from a triplet file")
    _add_input(p)
    p.add_argument("directions", help="component,index,value CSV written by 'fit'")
    p.add_argument("--normalized", action="store_true", help="use unit-length directions")
    p.add_argument("--out", help="scores CSV path")
    p.add_argument("--svg", help="also write a scatter plot of the first two scores")
    p.set_defaults(func=cmd_scores)

    p = sub.add_parser("cluster", help="two-group clustering by the sign of the first score")
    _add_input(p)
    _add_method(p, "aspca")
    p.set_defaults(components=2)
    p.add_argument("--normalized", action="store_true", help="use unit-length directions")
    p.add_argument("--truth", help="labels CSV (sample,label) to report agreement against")
    p.add_argument("--out", help="cluster CSV path")
    p.add_argument("--svg", help="also write a scatter plot colored by label")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("simulate", help="draw a synthetic data matrix")
    p.add_argument("--setting", choices=sorted(SETTINGS), required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="matrix CSV path (labels go to <stem>.labels.csv)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="Monte-Carlo MSE comparison over a dimension grid")
    p.add_argument("--setting", choices=sorted(SETTINGS), required=True)
    p.add_argument("--d-grid", required=True, help="dimensions, e.g. 64:128:256")
    p.add_argument("--n-grid", help="sample sizes; default n = ceil(sqrt(d))")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--estimators", default="pca,tspca:0.01,tspca:0.05,tspca:0.1,aspca")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="long-form CSV path")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"aspca: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidComponentError, AbsentComponentError, ConvergenceError, NotPositiveDefiniteError) as exc:
        print(f"aspca: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidInputError as exc:
        print(f"aspca: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
