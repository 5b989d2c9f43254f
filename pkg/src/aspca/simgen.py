"""Seeded synthetic data with a known spiked eigenstructure.

Four model families cover the simulation settings:

==========================  ============================================
``SpikedDiagonal``          diagonal covariance, spikes on the first axes
``BlockIntraclass``         two intraclass-correlation blocks + flat tail
``TwoClassMixture``         two Gaussian classes with means +/- mu
``ChiSqFactor``             intraclass covariance, standardized chi^2 noise
==========================  ============================================

``setting_s1`` .. ``setting_s4`` build the four standard configurations for a
given dimension. Every replication ``r`` of a seed draws from the stream
``SeedSequence([seed, r])`` so replications can be generated in any order.
"""

import functools
import math
from dataclasses import asdict, dataclass, fields
from typing import ClassVar, NamedTuple, Optional

import numpy as np

from .covariance import LowRankFactor
from .errors import InvalidInputError
from .linalg import cholesky

__all__ = [
    "ModelTruth",
    "ModelSpec",
    "SpikedDiagonal",
    "BlockIntraclass",
    "TwoClassMixture",
    "ChiSqFactor",
    "Sample",
    "ceil_root",
    "intraclass_cov",
    "power_correlation",
    "setting_s1",
    "setting_s2",
    "setting_s3",
    "setting_s4",
    "SETTINGS",
    "make_setting",
    "rng_for",
    "sample",
    "spec_to_text",
    "spec_from_text",
]


def ceil_root(d, num, den):
    """Smallest integer k with ``k**den >= d**num``, i.e. ``ceil(d**(num/den))`` exactly."""
    target = d ** num
    k = max(int(math.floor(target ** (1.0 / den))) - 1, 0)
    while k ** den < target:
        k += 1
    return k


def intraclass_cov(q, alpha, beta):
    """``beta * (alpha * I + (1 - alpha) * 1 1^T)`` of order q."""
    if not (isinstance(q, (int, np.integer)) and q >= 1):
        raise InvalidInputError(f"q must be a positive integer, got {q!r}")
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not beta > 0.0:
        raise InvalidInputError(f"beta must be positive, got {beta!r}")
    return beta * (alpha * np.eye(q) + (1.0 - alpha) * np.ones((q, q)))


def power_correlation(d, rho, exponent=1.0 / 3.0):
    """Matrix with entries ``rho ** (|i - j| ** exponent)``."""
    lag = np.abs(np.subtract.outer(np.arange(d), np.arange(d))).astype(np.float64)
    return rho ** (lag ** exponent)


@functools.lru_cache(maxsize=8)
def _power_correlation_factor(d, rho, exponent):
    factor = cholesky(power_correlation(d, rho, exponent))
    factor.setflags(write=False)
    return factor


@dataclass(frozen=True)
class ModelTruth:
    """True leading eigenstructure of a model.

    ``directions`` has shape (d, m). ``exact`` is False when ``lambdas`` and
    ``directions`` are only asymptotic approximations. ``noise_trace`` is
    ``tr(Sigma) - sum(lambdas)``, the trace of the non-spiked part.
    """

    m: int
    lambdas: np.ndarray
    directions: np.ndarray
    exact: bool
    noise_trace: float
    sse_ratio: Optional[float] = None
    k_star: Optional[tuple] = None

    @property
    def sigma1_factor(self):
        return LowRankFactor(self.directions * np.sqrt(self.lambdas))

    def direction(self, j):
        if not 1 <= j <= self.m:
            raise InvalidInputError(f"no true direction for component {j} (m={self.m})")
        return self.directions[:, j - 1]

    def delta(self, n):
        """Noise level ``tr(Sigma_2) / (n - 1)``."""
        return self.noise_trace / (n - 1)


class Sample(NamedTuple):
    x: np.ndarray
    labels: Optional[np.ndarray]


class ModelSpec:
    """Base for model families: ``truth()`` plus ``draw(rng, n)``."""

    kind: ClassVar[str] = ""

    def truth(self):
        raise NotImplementedError

    def draw(self, rng, n):
        raise NotImplementedError

    def covariance(self):
        """Dense population covariance (intended for small d)."""
        raise NotImplementedError


def _unit(d, idx):
    h = np.zeros(d)
    h[idx] = 1.0 / np.sqrt(len(range(d)[idx]))
    return h


@dataclass(frozen=True)
class SpikedDiagonal(ModelSpec):
    """Diagonal covariance: ``spikes`` on coordinates 0..m-1, ``tail`` elsewhere."""

    d: int
    spikes: tuple
    tail: float = 1.0
    kind: ClassVar[str] = "spiked_diagonal"

    def __post_init__(self):
        spikes = tuple(float(s) for s in self.spikes)
        object.__setattr__(self, "spikes", spikes)
        if not spikes or len(spikes) >= self.d:
            raise InvalidInputError("need 1 <= number of spikes < d")
        if not self.tail > 0.0 or any(not s > self.tail for s in spikes):
            raise InvalidInputError("spikes must exceed a positive tail variance")
        if any(a < b for a, b in zip(spikes, spikes[1:])):
            raise InvalidInputError("spikes must be in descending order")

    def variances(self):
        var = np.full(self.d, self.tail)
        var[: len(self.spikes)] = self.spikes
        return var

    def covariance(self):
        return np.diag(self.variances())

    def truth(self):
        m = len(self.spikes)
        lam = np.array(self.spikes)
        var = self.variances()
        return ModelTruth(
            m=m,
            lambdas=lam,
            directions=np.eye(self.d)[:, :m],
            exact=True,
            noise_trace=float(var[m:].sum()),
            sse_ratio=float(lam[0] ** 2 / np.sum(var ** 2)),
            k_star=(1,) * m,
        )

    def draw(self, rng, n):
        z = rng.standard_normal((self.d, n))
        return Sample(z * np.sqrt(self.variances())[:, None], None)


@dataclass(frozen=True)
class BlockIntraclass(ModelSpec):
    """Block diagonal ``diag(Gamma_d1, Gamma_d2, tail * I)`` with intraclass blocks."""

    d: int
    d1: int
    d2: int
    alpha: float = 0.5
    beta: float = 2.0
    tail: float = 1.0
    kind: ClassVar[str] = "block_intraclass"

    def __post_init__(self):
        if not (self.d1 > self.d2 >= 1):
            raise InvalidInputError(f"need d1 > d2 >= 1, got d1={self.d1}, d2={self.d2}")
        if self.d1 + self.d2 >= self.d:
            raise InvalidInputError(
                f"blocks of sizes {self.d1} + {self.d2} do not fit in d={self.d}"
            )
        if not 0.0 < self.alpha < 1.0 or not self.beta > 0.0 or not self.tail > 0.0:
            raise InvalidInputError("need alpha in (0, 1), beta > 0 and tail > 0")

    def _lead(self, q):
        return self.beta * ((1.0 - self.alpha) * q + self.alpha)

    def covariance(self):
        cov = np.diag(np.full(self.d, self.tail))
        cov[: self.d1, : self.d1] = intraclass_cov(self.d1, self.alpha, self.beta)
        b = slice(self.d1, self.d1 + self.d2)
        cov[b, b] = intraclass_cov(self.d2, self.alpha, self.beta)
        return cov

    def truth(self):
        lam = np.array([self._lead(self.d1), self._lead(self.d2)])
        dirs = np.column_stack(
            [_unit(self.d, slice(0, self.d1)), _unit(self.d, slice(self.d1, self.d1 + self.d2))]
        )
        flat = self.alpha * self.beta
        d3 = self.d - self.d1 - self.d2
        n_flat = self.d1 + self.d2 - 2
        noise_trace = n_flat * flat + d3 * self.tail
        tr_sq = lam @ lam + n_flat * flat ** 2 + d3 * self.tail ** 2
        return ModelTruth(
            m=2,
            lambdas=lam,
            directions=dirs,
            exact=True,
            noise_trace=float(noise_trace),
            sse_ratio=float(lam[0] ** 2 / tr_sq),
            k_star=(self.d1, self.d2),
        )

    def _block(self, rng, q, n):
        z = rng.standard_normal((q, n))
        w = rng.standard_normal(n)
        return np.sqrt(self.beta) * (np.sqrt(self.alpha) * z + np.sqrt(1.0 - self.alpha) * w)

    def draw(self, rng, n):
        d3 = self.d - self.d1 - self.d2
        x = np.vstack(
            [
                self._block(rng, self.d1, n),
                self._block(rng, self.d2, n),
                np.sqrt(self.tail) * rng.standard_normal((d3, n)),
            ]
        )
        return Sample(x, None)


@dataclass(frozen=True)
class TwoClassMixture(ModelSpec):
    """Two Gaussian classes, means ``+mu`` and ``-mu`` with ``mu`` = ones on the first k axes.

    Class covariances are ``rho_s ** (|i - j| ** exponent)``. Labels are 1 and 2.
    """

    d: int
    k: int
    rho1: float = 0.3
    rho2: float = 0.4
    eps1: float = 0.5
    exponent: float = 1.0 / 3.0
    kind: ClassVar[str] = "two_class_mixture"

    def __post_init__(self):
        if not 1 <= self.k < self.d:
            raise InvalidInputError(f"need 1 <= k < d, got k={self.k}, d={self.d}")
        if not 0.0 < self.eps1 < 1.0:
            raise InvalidInputError(f"mixture weight must lie in (0, 1), got {self.eps1!r}")
        if not (0.0 < self.rho1 < 1.0 and 0.0 < self.rho2 < 1.0):
            raise InvalidInputError("rho1 and rho2 must lie in (0, 1)")

    def mean(self, label):
        mu = np.zeros(self.d)
        mu[: self.k] = 1.0 if label == 1 else -1.0
        return mu

    def covariance(self):
        mu12 = self.mean(1) - self.mean(2)
        e1, e2 = self.eps1, 1.0 - self.eps1
        return (
            e1 * e2 * np.outer(mu12, mu12)
            + e1 * power_correlation(self.d, self.rho1, self.exponent)
            + e2 * power_correlation(self.d, self.rho2, self.exponent)
        )

    def truth(self):
        # lambda_1 ~ eps1 eps2 ||mu1 - mu2||^2 and h_1 ~ mu_1 / ||mu_1|| as d grows
        e1, e2 = self.eps1, 1.0 - self.eps1
        lam1 = e1 * e2 * 4.0 * self.k
        h = self.mean(1) / np.sqrt(self.k)
        return ModelTruth(
            m=1,
            lambdas=np.array([lam1]),
            directions=h[:, None],
            exact=False,
            noise_trace=float(4.0 * e1 * e2 * self.k + self.d - lam1),
            sse_ratio=None,
            k_star=(self.k,),
        )

    def draw(self, rng, n):
        labels = np.where(rng.random(n) < self.eps1, 1, 2)
        z = rng.standard_normal((self.d, n))
        x = np.empty((self.d, n))
        for label, rho in ((1, self.rho1), (2, self.rho2)):
            cols = labels == label
            if np.any(cols):
                low = _power_correlation_factor(self.d, float(rho), float(self.exponent))
                x[:, cols] = low @ z[:, cols] + self.mean(label)[:, None]
        return Sample(x, labels)


@dataclass(frozen=True)
class ChiSqFactor(ModelSpec):
    """``x = H Lambda^{1/2} z`` for ``Sigma = Gamma_d`` with standardized chi-squared ``z``.

    ``H`` is the Householder reflection sending ``e_1`` to ``1_d / sqrt(d)``,
    which is a valid eigenbasis of the intraclass matrix.
    """

    d: int
    alpha: float = 0.5
    beta: float = 1.0
    df: int = 5
    kind: ClassVar[str] = "chisq_factor"

    def __post_init__(self):
        if self.d < 2:
            raise InvalidInputError(f"need d >= 2, got {self.d}")
        if not 0.0 < self.alpha < 1.0 or not self.beta > 0.0 or self.df < 1:
            raise InvalidInputError("need alpha in (0, 1), beta > 0 and df >= 1")

    def _spectrum(self):
        lam = np.full(self.d, self.alpha * self.beta)
        lam[0] = self.beta * ((1.0 - self.alpha) * self.d + self.alpha)
        return lam

    def covariance(self):
        return intraclass_cov(self.d, self.alpha, self.beta)

    def truth(self):
        lam = self._spectrum()
        return ModelTruth(
            m=1,
            lambdas=lam[:1].copy(),
            directions=np.full((self.d, 1), 1.0 / np.sqrt(self.d)),
            exact=True,
            noise_trace=float(lam[1:].sum()),
            sse_ratio=float(lam[0] ** 2 / np.sum(lam ** 2)),
            k_star=(self.d,),
        )

    def standardized_noise(self, rng, shape):
        """Chi-squared(df) variates as sums of squared normals, centered and scaled."""
        g = rng.standard_normal((self.df,) + tuple(shape))
        y = np.sum(g * g, axis=0)
        return (y - self.df) / np.sqrt(2.0 * self.df)

    def draw(self, rng, n):
        z = self.standardized_noise(rng, (self.d, n))
        y = z * np.sqrt(self._spectrum())[:, None]
        v = -np.full(self.d, 1.0 / np.sqrt(self.d))
        v[0] += 1.0
        y -= np.outer(v, (2.0 / (v @ v)) * (v @ y))
        return Sample(y, None)


def setting_s1(d):
    """Sparse diagonal spikes ``d^(2/3)`` and ``d^(1/2)`` on the first two axes."""
    if d < 4:
        raise InvalidInputError(f"setting s1 needs d >= 4, got {d}")
    return SpikedDiagonal(d=d, spikes=(float(np.cbrt(d) ** 2), math.sqrt(d)), tail=1.0)


def setting_s2(d):
    """Two intraclass blocks of sizes ``ceil(d^(2/3))`` and ``ceil(d^(1/2))``, alpha=0.5, beta=2."""
    d1, d2 = ceil_root(d, 2, 3), ceil_root(d, 1, 2)
    return BlockIntraclass(d=d, d1=d1, d2=d2, alpha=0.5, beta=2.0, tail=1.0)


def setting_s3(d):
    """Balanced two-class mixture with mean shift on the first ``ceil(d^(2/3))`` axes."""
    if d < 8:
        raise InvalidInputError(f"setting s3 needs d >= 8, got {d}")
    return TwoClassMixture(d=d, k=ceil_root(d, 2, 3))


def setting_s4(d):
    """Non-sparse, non-Gaussian: ``Gamma_d`` with alpha=0.5, beta=1 and chi-squared(5) noise."""
    if d < 4:
        raise InvalidInputError(f"setting s4 needs d >= 4, got {d}")
    return ChiSqFactor(d=d, alpha=0.5, beta=1.0, df=5)


SETTINGS = {"s1": setting_s1, "s2": setting_s2, "s3": setting_s3, "s4": setting_s4}


def make_setting(name, d):
    try:
        factory = SETTINGS[name]
    except KeyError:
        raise InvalidInputError(f"unknown setting {name!r}; choose from {sorted(SETTINGS)}") from None
    return factory(d)


def rng_for(seed, replication=0):
    """Generator for replication ``replication`` of ``seed``."""
    if seed < 0 or replication < 0:
        raise InvalidInputError("seed and replication must be nonnegative")
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(replication)]))


def sample(spec, n, seed, replication=0):
    """Draw ``n`` i.i.d. columns from ``spec``; returns ``Sample(x, labels)``."""
    if not isinstance(n, (int, np.integer)) or n < 4:
        raise InvalidInputError(f"need n >= 4 samples, got {n!r}")
    return spec.draw(rng_for(seed, replication), int(n))


_KINDS = {cls.kind: cls for cls in (SpikedDiagonal, BlockIntraclass, TwoClassMixture, ChiSqFactor)}


def spec_to_text(spec):
    """Serialize a spec as ``key=value`` lines, ``kind`` first."""
    lines = [f"kind={spec.kind}"]
    for key, value in asdict(spec).items():
        if isinstance(value, tuple):
            value = ",".join(repr(float(v)) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def spec_from_text(text):
    """Inverse of :func:`spec_to_text`; also accepts ``;``-separated pairs on one line."""
    pairs = {}
    for chunk in text.replace(";", "\n").splitlines():
        chunk = chunk.strip().lstrip("#").strip()
        if not chunk:
            continue
        key, sep, value = chunk.partition("=")
        if not sep:
            raise InvalidInputError(f"malformed spec line {chunk!r}")
        pairs[key.strip()] = value.strip()
    try:
        cls = _KINDS[pairs.pop("kind")]
    except KeyError:
        raise InvalidInputError("spec text lacks a known kind=") from None
    kwargs = {}
    for f in fields(cls):
        if f.name not in pairs:
            continue
        raw = pairs.pop(f.name)
        if f.name == "spikes":
            kwargs[f.name] = tuple(float(v) for v in raw.split(","))
        elif f.type in ("int", int):
            kwargs[f.name] = int(raw)
        else:
            kwargs[f.name] = float(raw)
    if pairs:
        raise InvalidInputError(f"unknown spec keys: {sorted(pairs)}")
    return cls(**kwargs)
