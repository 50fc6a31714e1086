"""Differentially private incomplete U-statistics over secure aggregation.

Parties hold one row each; a sampled hypergraph decides which size-k
subsets contribute a kernel evaluation. Secure evaluations happen over a
fixed-precision ring with additive secret sharing, discrete noise makes
the released mean differentially private, and the evaluation module
quantifies both error sources.
"""

from umpc.baselines import (
    BellConfig,
    CostParams,
    CostReport,
    bell_estimate,
    bell_mse_bound,
    beta_min,
    cost_eval,
)
from umpc.datasets import Dataset, gen_synthetic, load_csv
from umpc.errors import (
    ConfigError,
    DomainError,
    ParseError,
    RangeError,
    SamplingError,
    ScaleError,
    UmpcError,
    UsageError,
)
from umpc.evaluation import (
    MseConfig,
    MseReport,
    complete_ustat,
    edp_theory,
    einc_bound,
    fast_released,
    hoeffding_variance,
    incomplete_ustat,
    mse_experiment,
)
from umpc.fixedpoint import FpConfig, FpValue, decode, encode, encode_array
from umpc.kernels import KernelSpec, eval_fp, get_kernel, kernel_names, make_kernel
from umpc.noise import NoiseOutcome, NoiseSpec, generate_noise
from umpc.protocol import CostLedger, EstimateResult, run_umpc, sensitivity_bound
from umpc.sampling import (
    Hypergraph,
    backend_name,
    balanced_samp,
    bernoulli_samp,
    degree_profile,
    uniform_without_replacement,
)
from umpc.secretsharing import Sharing, reconstruct, reconstruct_value, share

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BellConfig",
    "ConfigError",
    "CostLedger",
    "CostParams",
    "CostReport",
    "Dataset",
    "DomainError",
    "EstimateResult",
    "FpConfig",
    "FpValue",
    "Hypergraph",
    "KernelSpec",
    "MseConfig",
    "MseReport",
    "NoiseOutcome",
    "NoiseSpec",
    "ParseError",
    "RangeError",
    "SamplingError",
    "ScaleError",
    "Sharing",
    "UmpcError",
    "UsageError",
    "backend_name",
    "balanced_samp",
    "bell_estimate",
    "bell_mse_bound",
    "bernoulli_samp",
    "beta_min",
    "complete_ustat",
    "cost_eval",
    "decode",
    "degree_profile",
    "edp_theory",
    "einc_bound",
    "encode",
    "encode_array",
    "eval_fp",
    "fast_released",
    "gen_synthetic",
    "generate_noise",
    "get_kernel",
    "hoeffding_variance",
    "incomplete_ustat",
    "kernel_names",
    "load_csv",
    "make_kernel",
    "mse_experiment",
    "reconstruct",
    "reconstruct_value",
    "run_umpc",
    "sensitivity_bound",
    "share",
    "uniform_without_replacement",
]
