"""Differentially private nonparametric hypothesis tests.

Private analogues of the Kruskal-Wallis, absolute-value Kruskal-Wallis,
Mann-Whitney, Wilcoxon signed-rank (Pratt variant) and one-sample t tests,
with Monte-Carlo reference distributions, a power/type-I simulation
harness and a brute-force sensitivity oracle.
"""

from ._backend import BACKEND
from .errors import DegenerateInputError, InvalidInputError, InvalidParameterError
from .harness import (
    PowerEstimate,
    SimulationSpec,
    generate_data,
    qq_pairs,
    simulate_power,
    simulate_type1,
    sweep_budget_split,
)
from .inference import (
    ReferenceCache,
    ReferenceDistribution,
    TestOutcome,
    critical_value,
    p_value,
    ref_kw,
    ref_kwabs,
    ref_mw,
    ref_t,
    ref_wilcoxon,
    run_test,
)
from .privacy import (
    PrivacyBudget,
    PrivateStatResult,
    laplace_sample,
    private_kw,
    private_kwabs,
    private_mw,
    private_t,
    private_wilcoxon,
)
from .rankstats import (
    BoundedSample,
    GroupedSample,
    PairedSample,
    RankVector,
    kw_stat,
    kwabs_stat,
    mw_stat,
    rank_midrank,
    rank_random,
    t_stat,
    wilcoxon_pratt_stat,
    wilcoxon_stat,
)
from .sensitivity import local_sensitivity_oracle
from .streams import RandomStream

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundedSample",
    "DegenerateInputError",
    "GroupedSample",
    "InvalidInputError",
    "InvalidParameterError",
    "PairedSample",
    "PowerEstimate",
    "PrivacyBudget",
    "PrivateStatResult",
    "RandomStream",
    "RankVector",
    "ReferenceCache",
    "ReferenceDistribution",
    "SimulationSpec",
    "TestOutcome",
    "critical_value",
    "generate_data",
    "kw_stat",
    "kwabs_stat",
    "laplace_sample",
    "local_sensitivity_oracle",
    "mw_stat",
    "p_value",
    "private_kw",
    "private_kwabs",
    "private_mw",
    "private_t",
    "private_wilcoxon",
    "qq_pairs",
    "rank_midrank",
    "rank_random",
    "ref_kw",
    "ref_kwabs",
    "ref_mw",
    "ref_t",
    "ref_wilcoxon",
    "run_test",
    "simulate_power",
    "simulate_type1",
    "sweep_budget_split",
    "t_stat",
    "wilcoxon_pratt_stat",
    "wilcoxon_stat",
]
