"""The kappa statistic and the hypothesis test built on it.

Each treatment contrast (group mean minus grand mean, scaled by its
estimated standard deviation) is transformed, hard-thresholded in its finest
``l_t`` levels, and its surviving plus unthresholded coefficients are squared
and summed.  Pooling over treatments gives kappa.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .dist import (
    ChiSquareLaw,
    KappaDist,
    NormalLaw,
    coordinate_moments,
    moment_df,
)
from .dist.specfun import log_norm_sf
from .dwt import WAVELETS, dwt_forward, make_filter
from .errors import InputError
from .profiles import RHO_POLICIES, ProfileSet, estimate_variance, standardized_contrast, summarize
from .shrink import ThresholdPlan, hard_threshold, universal_threshold

METHODS = ("exact", "normal", "chisq", "binom-normal", "binom-chisq")
DF_MODES = ("fractional", "ceil")


@dataclass(frozen=True)
class TestConfig:
    wavelet: str = "haar"
    l_t: int | None = None
    method: str = "binom-chisq"
    alpha: float = 0.05
    df_mode: str = "fractional"
    rho_policy: str = "zero"
    # None means the universal threshold sqrt(2 ln n) on standardized coefficients
    lam: float | None = None

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.wavelet not in WAVELETS:
            raise InputError(f"unknown wavelet {self.wavelet!r}")
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}")
        if not 0.0 < self.alpha < 1.0:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.df_mode not in DF_MODES:
            raise InputError(f"unknown df mode {self.df_mode!r}")
        if self.rho_policy not in RHO_POLICIES:
            raise InputError(f"unknown rho policy {self.rho_policy!r}")
        if self.l_t is not None and self.l_t < 1:
            raise InputError(f"l_t must be >= 1, got {self.l_t}")
        if self.lam is not None and not self.lam >= 0:
            raise InputError(f"lam must be >= 0, got {self.lam}")

    def levels(self, n: int) -> int:
        return n.bit_length() - 1 if self.l_t is None else self.l_t

    def threshold(self, n: int) -> float:
        return universal_threshold(1.0, n) if self.lam is None else self.lam


@dataclass(frozen=True)
class TreatmentTerm:
    survivors: int
    p_slots: int
    q_slots: int
    kept_ss: float
    unthresholded_ss: float


@dataclass(frozen=True)
class KappaStatistic:
    value: float
    p: int
    q: int
    lam: float
    per_treatment: tuple[TreatmentTerm, ...]
    sigma_sq: float = math.nan
    gamma_hat: tuple[float, ...] = ()

    @property
    def survivors(self) -> tuple[int, ...]:
        return tuple(t.survivors for t in self.per_treatment)


@dataclass(frozen=True)
class TestReport:
    statistic: KappaStatistic
    method: str
    alpha: float
    critical_value: float
    p_value: float
    reject: bool
    law_p: float
    law_q: float
    df: float | None = None
    diagnostics: dict = field(default_factory=dict)

    __test__ = False

    def to_dict(self) -> dict:
        st = self.statistic
        return {
            "statistic": st.value,
            "method": self.method,
            "alpha": self.alpha,
            "p": self.law_p,
            "q": self.law_q,
            "lambda": st.lam,
            "df": self.df,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "reject": self.reject,
            "diagnostics": {
                "sigma_sq": st.sigma_sq,
                "gamma_hat": list(st.gamma_hat),
                "survivors": list(st.survivors),
                "slots": {"p": st.p, "q": st.q},
                "per_treatment": [asdict(t) for t in st.per_treatment],
                **self.diagnostics,
            },
        }


def compute_kappa(ps: ProfileSet, cfg: TestConfig = TestConfig()) -> KappaStatistic:
    n = ps.length
    gs = summarize(ps, cfg.rho_policy)
    ve = estimate_variance(gs, ps)
    filt = make_filter(cfg.wavelet)
    plan = ThresholdPlan(cfg.threshold(n), cfg.levels(n), n)
    terms = []
    for i in range(ps.treatments):
        contrast = standardized_contrast(gs, ve, i)
        shrunk = hard_threshold(dwt_forward(contrast, filt, 0), plan)
        terms.append(TreatmentTerm(
            survivors=shrunk.survivors,
            p_slots=plan.p_slots,
            q_slots=plan.q_slots,
            kept_ss=float(np.sum(shrunk.kept ** 2)),
            unthresholded_ss=float(np.sum(shrunk.unthresholded ** 2)),
        ))
    value = math.fsum(t.kept_ss + t.unthresholded_ss for t in terms)
    return KappaStatistic(
        value=value,
        p=sum(t.p_slots for t in terms),
        q=sum(t.q_slots for t in terms),
        lam=plan.lam,
        per_treatment=tuple(terms),
        sigma_sq=ve.sigma_sq,
        gamma_hat=tuple(float(g) for g in ve.gamma_hat),
    )


def survival_probability(lam: float) -> float:
    """P(|Z| > lam) for standard normal Z."""
    if lam == 0:
        return 1.0
    if math.isinf(lam):
        return 0.0
    return math.exp(math.log(2.0) + log_norm_sf(lam))


def degrees(cfg: TestConfig, T: int, n: int) -> tuple[float, float]:
    """(p, q) of the null law: slot counts, or expected survivors for binomial methods."""
    l_t = cfg.levels(n)
    n_t = n >> l_t
    if n_t < 1 or n_t << l_t != n:
        raise InputError(f"l_t={l_t} incompatible with n={n}")
    p = T * (n - n_t)
    if cfg.method.startswith("binom"):
        return p * survival_probability(cfg.threshold(n)), float(T * n_t)
    return float(p), float(T * n_t)


def null_law(cfg: TestConfig, T: int, n: int):
    """The reference law the method compares kappa against."""
    p, q = degrees(cfg, T, n)
    lam = cfg.threshold(n)
    if cfg.method == "exact":
        return KappaDist(p, q, lam)
    mean, var = coordinate_moments(p, q, lam)
    if cfg.method in ("normal", "binom-normal"):
        return NormalLaw(mean, math.sqrt(var))
    return ChiSquareLaw(moment_df(mean, cfg.df_mode))


def run_test(ps: ProfileSet, cfg: TestConfig = TestConfig()) -> TestReport:
    stat = compute_kappa(ps, cfg)
    law = null_law(cfg, ps.treatments, ps.length)
    critical = float(law.ppf(1.0 - cfg.alpha))
    p_value = float(np.clip(law.sf(stat.value), 0.0, 1.0))
    p, q = degrees(cfg, ps.treatments, ps.length)
    return TestReport(
        statistic=stat,
        method=cfg.method,
        alpha=cfg.alpha,
        critical_value=critical,
        p_value=p_value,
        reject=bool(p_value < cfg.alpha),
        law_p=p,
        law_q=q,
        df=law.df if isinstance(law, ChiSquareLaw) else None,
        diagnostics={"pi": survival_probability(stat.lam), "wavelet": cfg.wavelet,
                     "l_t": cfg.levels(ps.length), "df_mode": cfg.df_mode,
                     "rho_policy": cfg.rho_policy, "padded_from": ps.padded_from},
    )
