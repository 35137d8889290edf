from .special import (
    betainc_reg,
    gammainc_lower_reg,
    gammainc_upper_reg,
    t_two_sided_p,
    t_sf,
    chi2_sf,
    f_sf,
)
from .inference import (
    TestResult,
    DegenerateInput,
    InsufficientOverlap,
    ZeroMean,
    paired_t,
    independent_t,
    kruskal_wallis,
    rm_anova,
    bonferroni,
    pearson_r,
    lagged_corr_p,
    coef_variation,
)

__all__ = [
    "betainc_reg",
    "gammainc_lower_reg",
    "gammainc_upper_reg",
    "t_two_sided_p",
    "t_sf",
    "chi2_sf",
    "f_sf",
    "TestResult",
    "DegenerateInput",
    "InsufficientOverlap",
    "ZeroMean",
    "paired_t",
    "independent_t",
    "kruskal_wallis",
    "rm_anova",
    "bonferroni",
    "pearson_r",
    "lagged_corr_p",
    "coef_variation",
]
