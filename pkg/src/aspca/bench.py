"""Monte-Carlo comparison of PC-direction estimators against a known truth.

Every replication draws one data matrix that all estimators share (a paired
design), so differences between estimators are not blurred by sampling noise.
Replication ``r`` of seed ``s`` always uses the stream ``(s, r)``; results are
reduced with exactly rounded sums, so worker count and replication order do
not change a single bit of the output.
"""

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from typing import Callable, Optional

import numpy as np

from .errors import AbsentComponentError, InvalidComponentError, InvalidInputError
from .pca import aligned_mse, fit_nr
from .simgen import ceil_root, make_setting, sample
from .sparse import threshold_auto, threshold_omega, tspca

__all__ = [
    "CSV_HEADER",
    "BenchRecord",
    "Estimator",
    "parse_estimators",
    "n_from_d",
    "run_experiment",
    "sweep",
    "write_records",
    "read_records",
    "curve",
    "is_strictly_decreasing",
]

CSV_HEADER = [
    "setting", "d", "n", "R", "estimator", "param", "component",
    "mean_mse", "stderr", "invalid_count", "seed", "seconds",
]


@dataclass(frozen=True)
class BenchRecord:
    setting: str
    d: int
    n: int
    R: int
    estimator: str
    param: Optional[float]
    component: int
    mean_mse: float
    stderr: float
    invalid_count: int
    seed: int
    seconds: float


def _pca(x, nr, j, param):
    return nr.base.direction(j)


def _nr(x, nr, j, param):
    return nr.direction(j)


def _aspca(x, nr, j, param):
    return threshold_auto(nr, j).to_dense()


def _tspca(x, nr, j, param):
    return tspca(nr.base.direction(j), param, j).to_dense()


def _shrink(x, nr, j, param):
    return threshold_omega(nr, param, j).to_dense()


BUILTIN = {
    "pca": (_pca, False),
    "nr": (_nr, False),
    "aspca": (_aspca, False),
    "tspca": (_tspca, True),
    "shrink": (_shrink, True),
}


@dataclass(frozen=True)
class Estimator:
    """A named direction estimator.

    ``fn(x, nr_fit, j, param)`` returns a length-d estimate of direction ``j``;
    when omitted, ``name`` selects a built-in (pca, nr, aspca, tspca, shrink).
    Raising :class:`InvalidComponentError` marks the replication as missing.
    """

    name: str
    param: Optional[float] = None
    fn: Optional[Callable] = None

    def __post_init__(self):
        if self.fn is None:
            if self.name not in BUILTIN:
                raise InvalidInputError(f"unknown estimator {self.name!r}")
            needs_param = BUILTIN[self.name][1]
            if needs_param and self.param is None:
                raise InvalidInputError(f"estimator {self.name!r} needs a parameter")
            if not needs_param and self.param is not None:
                raise InvalidInputError(f"estimator {self.name!r} takes no parameter")

    def __call__(self, x, nr, j):
        fn = self.fn if self.fn is not None else BUILTIN[self.name][0]
        return fn(x, nr, j, self.param)

    @property
    def label(self):
        return self.name if self.param is None else f"{self.name}:{self.param:g}"


def parse_estimators(text):
    """Parse ``"pca,aspca,tspca:0.01"`` into estimators."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, _, param = item.partition(":")
        try:
            value = float(param) if param else None
        except ValueError:
            raise InvalidInputError(f"bad estimator parameter in {item!r}") from None
        out.append(Estimator(name.strip(), value))
    if not out:
        raise InvalidInputError("no estimators given")
    return out


def n_from_d(d):
    """Sample size ``ceil(sqrt(d))`` used along dimension sweeps."""
    return ceil_root(d, 1, 2)


def _replicate(spec, truth, n, seed, r, estimators, components):
    x = sample(spec, n, seed, r).x
    nr = fit_nr(x)
    out = np.full((len(estimators), len(components)), np.nan)
    for e, est in enumerate(estimators):
        for c, j in enumerate(components):
            try:
                out[e, c] = aligned_mse(est(x, nr, j), truth.direction(j))
            except (InvalidComponentError, AbsentComponentError):
                pass
    return out


def _replicate_args(args):
    return _replicate(*args)


def _summary(values):
    ok = [float(v) for v in values if not np.isnan(v)]
    if not ok:
        return math.nan, math.nan
    mean = math.fsum(ok) / len(ok)
    if len(ok) == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in ok) / (len(ok) - 1)
    return mean, math.sqrt(var / len(ok))


def run_experiment(spec, n, estimators, R=100, seed=0, components=None, workers=1, setting=None):
    """Replicated aligned MSE of each estimator for each component.

    Parameters
    ----------
    spec : ModelSpec
    n : int
        Sample size per replication.
    estimators : list of Estimator
    R : int
        Number of replications.
    seed : int
    components : sequence of int, optional
        Components to score; defaults to ``1..truth.m``.
    workers : int
        Processes used for replications; results do not depend on it.
    setting : str, optional
        Label stored in the records (defaults to the spec kind).

    Returns
    -------
    list of BenchRecord, ordered by estimator then component.
    """
    if not estimators:
        raise InvalidInputError("estimators must be non-empty")
    if R < 1:
        raise InvalidInputError(f"need R >= 1, got {R}")
    truth = spec.truth()
    components = tuple(range(1, truth.m + 1)) if components is None else tuple(components)
    for j in components:
        if not 1 <= j <= truth.m:
            raise InvalidInputError(f"component {j} has no true direction (m={truth.m})")
    start = time.perf_counter()
    jobs = [(spec, truth, n, seed, r, tuple(estimators), components) for r in range(R)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replicate_args, jobs, chunksize=max(1, R // (4 * workers))))
    else:
        results = [_replicate_args(job) for job in jobs]
    mse = np.stack(results)  # (R, estimators, components)
    seconds = time.perf_counter() - start

    records = []
    for e, est in enumerate(estimators):
        for c, j in enumerate(components):
            column = mse[:, e, c]
            mean, stderr = _summary(column)
            records.append(
                BenchRecord(
                    setting=setting or spec.kind,
                    d=spec.d,
                    n=n,
                    R=R,
                    estimator=est.name,
                    param=est.param,
                    component=j,
                    mean_mse=mean,
                    stderr=stderr,
                    invalid_count=int(np.isnan(column).sum()),
                    seed=seed,
                    seconds=seconds,
                )
            )
    return records


def _cell_seed(seed, cell):
    return int(np.random.SeedSequence([int(seed), int(cell)]).generate_state(1)[0])


def sweep(setting, d_grid, estimators, R=100, seed=0, n_grid=None, n_rule=n_from_d, workers=1):
    """Run :func:`run_experiment` over a dimension (and optional sample-size) grid.

    Each cell gets its own seed derived from ``(seed, cell index)``; the record
    carries it, so any cell can be re-run on its own.
    """
    d_grid = list(d_grid)
    if not d_grid or (n_grid is not None and not list(n_grid)):
        raise InvalidInputError("empty sweep grid")
    records = []
    cell = 0
    for d in d_grid:
        spec = make_setting(setting, d)
        for n in (list(n_grid) if n_grid is not None else [n_rule(d)]):
            records.extend(
                run_experiment(
                    spec, n, estimators, R=R, seed=_cell_seed(seed, cell),
                    workers=workers, setting=setting,
                )
            )
            cell += 1
    return records


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_records(records, stream):
    """Write records as long-form CSV to an open text stream."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow([_fmt(v) for v in astuple(rec)])


def read_records(stream):
    """Inverse of :func:`write_records`."""
    reader = csv.reader(line for line in stream if not line.startswith("#"))
    header = next(reader)
    if header != CSV_HEADER:
        raise InvalidInputError(f"unexpected bench CSV header {header}")
    types = {f.name: f.type for f in fields(BenchRecord)}
    out = []
    for row in reader:
        values = {}
        for key, raw in zip(header, row):
            if key == "param":
                values[key] = float(raw) if raw else None
            elif types[key] is int:
                values[key] = int(raw)
            elif types[key] is float:
                values[key] = float(raw)
            else:
                values[key] = raw
        out.append(BenchRecord(**values))
    return out


def curve(records, estimator, component=1, param=None, axis="d"):
    """``[(x, mean_mse), ...]`` sorted by ``axis`` for one estimator and component."""
    points = [
        (getattr(r, axis), r.mean_mse)
        for r in records
        if r.estimator == estimator and r.component == component and r.param == param
    ]
    return sorted(points)


def is_strictly_decreasing(points):
    ys = [y for _, y in points]
    return all(a > b for a, b in zip(ys, ys[1:]))
