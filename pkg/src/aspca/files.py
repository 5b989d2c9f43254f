"""CSV and SVG formats used by the command line.

Matrix files are plain comma-separated numbers, one matrix row per line, with
an optional first line starting with ``#`` that readers skip. By default rows
are variables and columns are samples (a d x n layout). Numbers are written
with 17 significant digits so every float survives a round trip.
"""

import csv
import html
import os
from collections import defaultdict

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "OUTPUT_DIR_ENV",
    "MatrixParseError",
    "output_path",
    "read_matrix",
    "write_matrix",
    "read_labels",
    "write_labels",
    "write_eigenvalues",
    "write_triplets",
    "read_triplets",
    "write_scores",
    "scatter_svg",
]

OUTPUT_DIR_ENV = "ASPCA_OUTPUT_DIR"
SVG_WIDTH, SVG_HEIGHT = 640, 480
LABEL_COLORS = {1: "#1f77b4", 2: "#d62728"}


class MatrixParseError(InvalidInputError):
    """A CSV input could not be parsed."""


def fmt(value):
    return format(float(value), ".17g")


def output_path(path, default_name):
    """Resolve an output path; relative paths land in ``$ASPCA_OUTPUT_DIR`` when set."""
    base = os.environ.get(OUTPUT_DIR_ENV, "")
    path = path or default_name
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        path = os.path.join(base, path)
    return path


def _data_lines(path):
    try:
        with open(path, newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise MatrixParseError(f"cannot read {path}: {exc}") from None
    body = [(no, line) for no, line in enumerate(lines, 1) if line.strip()]
    if body and body[0][1].lstrip().startswith("#"):
        body = body[1:]
    return body


def read_matrix(path, samples_in_rows=False):
    """Read a numeric CSV matrix and return it as d x n (variables in rows)."""
    rows = []
    width = None
    for no, line in _data_lines(path):
        cells = line.split(",")
        try:
            row = [float(c) for c in cells]
        except ValueError:
            raise MatrixParseError(f"{path}:{no}: non-numeric entry in {line!r}") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise MatrixParseError(
                f"{path}:{no}: ragged row with {len(row)} entries, expected {width}"
            )
        rows.append(row)
    if not rows:
        raise MatrixParseError(f"{path}: no data rows")
    x = np.array(rows)
    if not np.all(np.isfinite(x)):
        raise MatrixParseError(f"{path}: non-finite entries")
    return x.T.copy() if samples_in_rows else x


def write_matrix(path, x, header=None):
    with open(path, "w", newline="") as fh:
        if header:
            fh.write("# " + header.replace("\n", " ") + "\n")
        for row in np.asarray(x):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_labels(path, labels):
    with open(path, "w", newline="") as fh:
        fh.write("sample,label\n")
        for i, label in enumerate(labels):
            fh.write(f"{i},{int(label)}\n")


def read_labels(path):
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            return np.array([int(row["label"]) for row in reader])
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise MatrixParseError(f"cannot read labels from {path}: {exc}") from None


def write_eigenvalues(path, rows):
    """``rows`` are ``(component, lambda_hat, lambda_tilde, delta_hat, k_support)``."""
    with open(path, "w", newline="") as fh:
        fh.write("component,lambda_hat,lambda_tilde,delta_hat,k_support\n")
        for j, lam, lam_t, delta, k in rows:
            fh.write(f"{j},{fmt(lam)},{fmt(lam_t)},{fmt(delta)},{k}\n")


def write_triplets(path, directions):
    """``directions`` maps component -> (indices, values)."""
    with open(path, "w", newline="") as fh:
        fh.write("component,index,value\n")
        for j in sorted(directions):
            indices, values = directions[j]
            for i, v in zip(indices, values):
                fh.write(f"{j},{int(i)},{fmt(v)}\n")


def read_triplets(path):
    """Inverse of :func:`write_triplets`: component -> (indices, values), indices ascending."""
    parts = defaultdict(list)
    try:
        with open(path, newline="") as fh:
            lines = [line for line in fh if line.strip() and not line.startswith("#")]
    except OSError as exc:
        raise MatrixParseError(f"cannot read {path}: {exc}") from None
    if not lines or lines[0].strip() != "component,index,value":
        raise MatrixParseError(f"{path}: expected header 'component,index,value'")
    for no, line in enumerate(lines[1:], 2):
        try:
            j, i, v = line.strip().split(",")
            parts[int(j)].append((int(i), float(v)))
        except ValueError:
            raise MatrixParseError(f"{path}:{no}: malformed triplet {line.strip()!r}") from None
    out = {}
    for j, items in parts.items():
        items.sort()
        idx = np.array([i for i, _ in items], dtype=np.int64)
        if np.any(np.diff(idx) == 0):
            raise MatrixParseError(f"{path}: duplicate index in component {j}")
        out[j] = (idx, np.array([v for _, v in items]))
    return out


def write_scores(path, scores, labels=None):
    """``scores`` has shape (n, m); writes ``sample,score_1..score_m[,label]``."""
    scores = np.asarray(scores)
    header = ["sample"] + [f"score_{j}" for j in range(1, scores.shape[1] + 1)]
    if labels is not None:
        header.append("label")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i, row in enumerate(scores):
            cells = [str(i)] + [fmt(v) for v in row]
            if labels is not None:
                cells.append(str(int(labels[i])))
            fh.write(",".join(cells) + "\n")


def _axis(values, lo, hi):
    vmin, vmax = float(np.min(values)), float(np.max(values))
    if vmax == vmin:
        return np.full(len(values), 0.5 * (lo + hi))
    return lo + (np.asarray(values) - vmin) / (vmax - vmin) * (hi - lo)


def scatter_svg(path, first, second=None, labels=None, title=""):
    """Static 640x480 scatter of (first, second) scores, one circle per sample."""
    first = np.asarray(first, dtype=np.float64)
    second = np.zeros_like(first) if second is None else np.asarray(second, dtype=np.float64)
    margin = 40
    xs = _axis(first, margin, SVG_WIDTH - margin)
    ys = _axis(second, SVG_HEIGHT - margin, margin)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
        f'<line x1="{margin}" y1="{SVG_HEIGHT - margin}" x2="{SVG_WIDTH - margin}" '
        f'y2="{SVG_HEIGHT - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{SVG_HEIGHT - margin}" stroke="black"/>',
        f'<text x="{SVG_WIDTH // 2}" y="{SVG_HEIGHT - 10}" text-anchor="middle" '
        f'font-size="12">first PC score</text>',
        f'<text x="12" y="{SVG_HEIGHT // 2}" font-size="12" '
        f'transform="rotate(-90 12 {SVG_HEIGHT // 2})" text-anchor="middle">second PC score</text>',
    ]
    if title:
        parts.append(f'<text x="{SVG_WIDTH // 2}" y="24" text-anchor="middle" font-size="14">{html.escape(title)}</text>')
    for i, (x, y) in enumerate(zip(xs, ys)):
        color = LABEL_COLORS.get(int(labels[i]), "gray") if labels is not None else "gray"
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
