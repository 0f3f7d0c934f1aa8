"""Random streams, sample moments and the CDFs used by the error formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import special

from .errors import DomainError

_U64 = 2**64
_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Poisson mass left out of the noncentral-F mixture
NCF_TAIL_MASS = 1e-12


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by ``(root_seed, stream_index)``.

    The pair is hashed by :class:`numpy.random.SeedSequence` into the key of
    a Philox counter-based generator, so stream ``i`` never depends on how
    many other streams exist or in which order they are consumed.
    """

    root_seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("root_seed", "stream_index"):
            value = getattr(self, name)
            if not (0 <= int(value) < _U64):
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def generator(self) -> np.random.Generator:
        """Return a fresh generator positioned at the start of the stream."""
        seq = np.random.SeedSequence(entropy=int(self.root_seed), spawn_key=(int(self.stream_index),))
        return np.random.Generator(np.random.Philox(seq))

    def spawn(self, stream_index: int) -> "RngStream":
        return RngStream(self.root_seed, stream_index)


RandomSource = Union[RngStream, np.random.Generator]


def _as_generator(source: RandomSource) -> np.random.Generator:
    if isinstance(source, RngStream):
        return source.generator()
    if isinstance(source, np.random.Generator):
        return source
    raise TypeError(f"expected RngStream or numpy Generator, got {type(source).__name__}")


@dataclass
class SampleSet:
    """A ``nu x m`` matrix of i.i.d. draws plus where they came from."""

    data: np.ndarray
    root_seed: int | None = None
    stream_index: int | None = None
    distribution: str = ""

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise DomainError("sample data must be a nu x m matrix")
        self.data = data

    @property
    def count(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def rows(self, index) -> "SampleSet":
        return SampleSet(self.data[index], self.root_seed, self.stream_index, self.distribution)


def as_sample_matrix(samples) -> np.ndarray:
    if isinstance(samples, SampleSet):
        return samples.data
    data = np.asarray(samples, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    return data


@dataclass
class MomentEstimate:
    mean: np.ndarray
    covariance: np.ndarray
    count: int = field(default=1)


# ---------------------------------------------------------------------------
# CDFs
# ---------------------------------------------------------------------------


def normal_cdf(x: float) -> float:
    """Standard normal CDF through the complementary error function."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"normal_cdf needs a finite argument, got {x}")
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_cdf_asymptotic(x: float, n_terms: int) -> tuple[float, bool]:
    """Truncated asymptotic series for the lower tail ``Phi(-x)``.

    Keeps the terms ``i = 0..n_terms`` of
    ``exp(-x^2/2)/sqrt(2 pi) * sum (-1)^i (2i-1)!! / x^(2i+1)``.
    The second return value is True when the truncation bounds the tail
    from above (even ``n_terms``) and False when it bounds it from below.
    This is an audit tool; :func:`normal_cdf` is the production CDF.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"asymptotic tail expansion needs x > 0, got {x}")
    if n_terms < 0:
        raise DomainError("n_terms must be nonnegative")
    total = 0.0
    double_factorial = 1.0
    for i in range(n_terms + 1):
        if i >= 2:
            double_factorial *= 2 * i - 1
        total += (-1) ** i * double_factorial / x ** (2 * i + 1)
    value = math.exp(-0.5 * x * x) / _SQRT2PI * total
    return value, n_terms % 2 == 0


def chi_square_cdf(x: float, k: int) -> float:
    """Chi-square CDF, the regularized lower incomplete gamma ``P(k/2, x/2)``."""
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise DomainError(f"chi-square CDF needs x >= 0, got {x}")
    if k < 1:
        raise DomainError(f"chi-square CDF needs k >= 1 degrees of freedom, got {k}")
    return float(special.gammainc(0.5 * k, 0.5 * x))


def chi_square_sf(x: float, k: int) -> float:
    """Upper tail of the chi-square distribution, accurate when small."""
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise DomainError(f"chi-square tail needs x >= 0, got {x}")
    if k < 1:
        raise DomainError(f"chi-square tail needs k >= 1 degrees of freedom, got {k}")
    return float(special.gammaincc(0.5 * k, 0.5 * x))


def _check_dof(d1, d2):
    if not (d1 > 0 and d2 > 0 and math.isfinite(d1) and math.isfinite(d2)):
        raise DomainError(f"degrees of freedom must be positive, got ({d1}, {d2})")


def central_f_cdf(x: float, d1: float, d2: float) -> float:
    _check_dof(d1, d2)
    x = float(x)
    if not x >= 0.0:
        raise DomainError(f"F CDF needs x >= 0, got {x}")
    if math.isinf(x):
        return 1.0
    z = d1 * x / (d1 * x + d2)
    return float(special.betainc(0.5 * d1, 0.5 * d2, z))


def _poisson_window(mean: float, lo: int, hi: int) -> np.ndarray:
    j = np.arange(lo, hi + 1, dtype=float)
    if mean == 0.0:
        return (j == 0).astype(float)
    return np.exp(-mean + j * math.log(mean) - special.gammaln(j + 1.0))


def noncentral_f_cdf(x: float, d1: float, d2: float, lam: float) -> float:
    """Noncentral F CDF as a Poisson(lam/2) mixture of central F CDFs.

    Terms are added outward from the Poisson mode until the included
    Poisson mass reaches ``1 - 1e-12``; every central term is at most one,
    so the truncation error is at most 1e-12.
    """
    _check_dof(d1, d2)
    x = float(x)
    lam = float(lam)
    if not x >= 0.0:
        raise DomainError(f"noncentral F CDF needs x >= 0, got {x}")
    if not (lam >= 0.0 and math.isfinite(lam)):
        raise DomainError(f"noncentrality must be finite and >= 0, got {lam}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    z = d1 * x / (d1 * x + d2)
    half = 0.5 * lam
    if half == 0.0:
        return float(special.betainc(0.5 * d1, 0.5 * d2, z))

    mode = int(math.floor(half))
    width = max(16, int(4.0 * math.sqrt(half)))
    lo = max(0, mode - width)
    hi = mode + width
    while True:
        weights = _poisson_window(half, lo, hi)
        mass = float(weights.sum())
        if mass >= 1.0 - NCF_TAIL_MASS:
            break
        # the edges carry no representable mass any more; widening cannot help
        if weights[-1] < 1e-300 and (lo == 0 or weights[0] < 1e-300):
            break
        lo = max(0, lo - width)
        hi += width
    j = np.arange(lo, hi + 1, dtype=float)
    terms = special.betainc(0.5 * d1 + j, 0.5 * d2, z)
    value = float(np.dot(weights, terms))
    return min(1.0, max(0.0, value))


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _covariance_factor(cov, m):
    cov = np.asarray(cov, dtype=float)
    if cov.ndim == 0:
        cov = np.full(m, float(cov))
    if cov.ndim == 1:
        if cov.shape != (m,):
            raise DomainError("diagonal covariance length does not match the mean")
        if np.any(cov < 0):
            raise DomainError("covariance must be positive semidefinite")
        return np.sqrt(cov), True
    if cov.shape != (m, m):
        raise DomainError("covariance shape does not match the mean")
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(cov).max())):
        raise DomainError("covariance must be symmetric")
    off = cov - np.diag(np.diag(cov))
    if not off.any():
        return _covariance_factor(np.diag(cov).copy(), m)
    w, V = np.linalg.eigh(0.5 * (cov + cov.T))
    if w.min() < -1e-12 * max(1.0, abs(w.max())):
        raise DomainError("covariance must be positive semidefinite")
    return V * np.sqrt(np.clip(w, 0.0, None)), False


def sample_gaussian(stream: RandomSource, mean, cov, count: int) -> SampleSet:
    """Draw ``count`` i.i.d. Gaussian rows with the given mean and covariance.

    ``cov`` may be a scalar (isotropic), a vector (diagonal) or a full
    matrix. Passing an :class:`RngStream` restarts that stream; passing a
    Generator continues it.
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    m = mean.shape[0]
    if count < 0:
        raise DomainError("count must be nonnegative")
    factor, diagonal = _covariance_factor(cov, m)
    gen = _as_generator(stream)
    z = gen.standard_normal((count, m))
    data = mean + z * factor if diagonal else mean + z @ factor.T
    seed = stream.root_seed if isinstance(stream, RngStream) else None
    index = stream.stream_index if isinstance(stream, RngStream) else None
    return SampleSet(data, seed, index, "gaussian")


def sample_moments(samples) -> MomentEstimate:
    """Sample mean and covariance with divisor ``nu`` (not ``nu - 1``)."""
    data = as_sample_matrix(samples)
    nu = data.shape[0]
    if nu < 1:
        raise DomainError("sample_moments needs at least one observation")
    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / nu
    cov = 0.5 * (cov + cov.T)
    return MomentEstimate(mean, cov, nu)
