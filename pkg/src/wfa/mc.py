"""Monte Carlo engine: null simulation of the full kappa pipeline, inverse-CDF
sampling from the analytic law, and diagnostics comparing the two."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dwt import WAVELETS
from .errors import InputError
from .kappa import TestConfig, compute_kappa, survival_probability
from .profiles import RHO_POLICIES, ProfileSet, is_power_of_two
from .rng import DEFAULT_SEED, check_seed, open_uniform, standard_normal, substream

QUANTILE_LEVELS = (0.90, 0.95, 0.99)


@dataclass(frozen=True)
class SimSpec:
    """A null experiment: T treatments of r noise curves of length n."""

    T: int = 3
    r: int = 10
    n: int = 256
    wavelet: str = "haar"
    l_t: int | None = None
    reps: int = 2000
    seed: int = DEFAULT_SEED
    rho_policy: str = "zero"

    def __post_init__(self):
        if self.T < 2:
            raise InputError(f"need T >= 2 treatments, got {self.T}")
        if self.r < 2:
            raise InputError(f"need r >= 2 replicates to estimate the noise, got {self.r}")
        if not is_power_of_two(self.n) or self.n < 2:
            raise InputError(f"length not a power of two: n={self.n}")
        if self.reps < 1:
            raise InputError(f"reps must be >= 1, got {self.reps}")
        if self.wavelet not in WAVELETS:
            raise InputError(f"unknown wavelet {self.wavelet!r}")
        if self.rho_policy not in RHO_POLICIES:
            raise InputError(f"unknown rho policy {self.rho_policy!r}")
        check_seed(self.seed)
        self.config()  # validates l_t

    def config(self) -> TestConfig:
        cfg = TestConfig(wavelet=self.wavelet, l_t=self.l_t, rho_policy=self.rho_policy)
        J = self.n.bit_length() - 1
        if not 1 <= cfg.levels(self.n) <= J:
            raise InputError(f"l_t must lie in [1, {J}], got {self.l_t}")
        return cfg


@dataclass(frozen=True)
class SimResult:
    spec: SimSpec
    kappa: np.ndarray        # (reps,)
    survivors: np.ndarray    # (reps, T) surviving thresholded coefficients
    p_slots: int             # thresholded slots per treatment
    q_slots: int
    lam: float

    def __len__(self) -> int:
        return self.kappa.size

    def __iter__(self):
        return iter(self.kappa.tolist())

    def __getitem__(self, i):
        return self.kappa[i]


def null_dataset(spec: SimSpec, index: int) -> ProfileSet:
    """Replication ``index``: pure standard-normal noise around a common mean."""
    gen = substream(spec.seed, index)
    noise = standard_normal(gen, (spec.T, spec.r, spec.n))
    return ProfileSet(tuple(noise))


def _replicate(spec: SimSpec, cfg: TestConfig, index: int):
    stat = compute_kappa(null_dataset(spec, index), cfg)
    return stat.value, stat.survivors, stat.per_treatment[0], stat.lam


def simulate_null(spec: SimSpec, workers: int = 1) -> SimResult:
    """Run ``spec.reps`` null datasets through the kappa pipeline.

    Results are collected in replication order, so the output is identical
    for any ``workers`` count.
    """
    cfg = spec.config()
    indices = range(spec.reps)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda i: _replicate(spec, cfg, i), indices))
    else:
        rows = [_replicate(spec, cfg, i) for i in indices]
    kappa = np.array([row[0] for row in rows])
    survivors = np.array([row[1] for row in rows], dtype=np.int64)
    term, lam = rows[0][2], rows[0][3]
    return SimResult(spec, kappa, survivors, term.p_slots, term.q_slots, lam)


def sample_kappa_dist(law, N: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """N inverse-CDF draws from ``law`` (anything with a vectorized ``ppf``)."""
    if N < 1:
        raise InputError(f"need N >= 1 draws, got {N}")
    u = open_uniform(substream(seed, 0), N)
    return np.asarray(law.ppf(u), dtype=float)


@dataclass(frozen=True)
class MomentGap:
    analytic: float
    empirical: float
    gap: float           # analytic minus empirical
    std_error: float     # of the empirical estimate

    @property
    def z(self) -> float:
        return self.gap / self.std_error if self.std_error > 0 else math.copysign(math.inf, self.gap) if self.gap else 0.0


@dataclass(frozen=True)
class QuantileRow:
    level: float
    analytic: float
    empirical: float
    exceedance: float = math.nan  # fraction of samples above the analytic quantile


@dataclass(frozen=True)
class SurvivorRate:
    empirical: float     # mean fraction of thresholded slots that survive
    expected: float      # pi
    std_error: float


@dataclass(frozen=True)
class AdequacyReport:
    n_samples: int
    ks_distance: float
    ks_critical_1pct: float
    mean: MomentGap
    variance: MomentGap
    quantile_table: tuple[QuantileRow, ...]
    survivor_rate: SurvivorRate | None = None
    label: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def moment_gaps(self) -> dict:
        return {"mean": self.mean, "variance": self.variance}

    def to_dict(self) -> dict:
        def gap(g: MomentGap) -> dict:
            return {"analytic": g.analytic, "empirical": g.empirical, "gap": g.gap, "std_error": g.std_error}

        sr = self.survivor_rate
        return {
            "label": self.label,
            "n_samples": self.n_samples,
            "ks_distance": self.ks_distance,
            "ks_critical_1pct": self.ks_critical_1pct,
            "moment_gaps": {"mean": gap(self.mean), "variance": gap(self.variance)},
            "quantile_table": [
                {"level": row.level, "analytic": row.analytic, "empirical": row.empirical}
                for row in self.quantile_table
            ],
            "survivor_rate": None if sr is None else {
                "empirical": sr.empirical, "expected": sr.expected, "std_error": sr.std_error},
            **self.extra,
        }


def ks_distance(samples, cdf) -> float:
    """Kolmogorov-Smirnov sup distance between the empirical CDF and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float))
    N = x.size
    F = np.clip(np.asarray(cdf(x), dtype=float), 0.0, 1.0)
    i = np.arange(1, N + 1)
    return float(max(np.max(i / N - F), np.max(F - (i - 1) / N)))


def adequacy(samples, law, survivors=None, slots: int | None = None,
             pi: float | None = None, label: str = "") -> AdequacyReport:
    """Compare samples with an analytic law.  Purely descriptive: no verdict.

    ``law`` needs ``cdf``, ``ppf``, ``mean`` and ``variance``.  If survivor
    counts (any shape) and the number of thresholded ``slots`` per count are
    given, the empirical survival fraction is reported against ``pi``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    N = x.size
    if N == 0:
        raise InputError("adequacy needs at least one sample")
    if not np.all(np.isfinite(x)):
        raise InputError("samples must be finite")
    mean = float(np.mean(x))
    var = float(np.var(x, ddof=1)) if N > 1 else 0.0
    centered = x - mean
    m4 = float(np.mean(centered ** 4))
    mean_se = math.sqrt(var / N)
    var_se = math.sqrt(max(m4 - var * var, 0.0) / N)
    a_mean, a_var = float(law.mean), float(law.variance)
    levels = np.array(QUANTILE_LEVELS)
    analytic_q = np.atleast_1d(np.asarray(law.ppf(levels), dtype=float))
    empirical_q = np.quantile(x, levels)
    rate = None
    if survivors is not None:
        if slots is None or pi is None:
            raise InputError("survivor diagnostics need slots and pi")
        frac = np.asarray(survivors, dtype=float).ravel() / slots
        rate = SurvivorRate(float(np.mean(frac)), float(pi),
                            math.sqrt(pi * (1.0 - pi) / (slots * frac.size)))
    return AdequacyReport(
        n_samples=N,
        ks_distance=ks_distance(x, law.cdf),
        ks_critical_1pct=1.63 / math.sqrt(N),
        mean=MomentGap(a_mean, mean, a_mean - mean, mean_se),
        variance=MomentGap(a_var, var, a_var - var, var_se),
        quantile_table=tuple(QuantileRow(float(u), float(a), float(e), float(np.mean(x > a)))
                             for u, a, e in zip(levels, analytic_q, empirical_q)),
        survivor_rate=rate,
        label=label,
    )


def null_adequacy(result: SimResult, method: str, df_mode: str = "fractional") -> AdequacyReport:
    """Adequacy of the null law used by ``method`` for a simulated run."""
    from .kappa import null_law

    spec = result.spec
    cfg = TestConfig(wavelet=spec.wavelet, l_t=spec.l_t, method=method, df_mode=df_mode,
                     rho_policy=spec.rho_policy)
    law = null_law(cfg, spec.T, spec.n)
    return adequacy(result.kappa, law, survivors=result.survivors, slots=result.p_slots,
                    pi=survival_probability(result.lam), label=method)
