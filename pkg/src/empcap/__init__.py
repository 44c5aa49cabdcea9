"""Universal feedback coding over channels with unknown, possibly adversarial noise.

Sequential KT estimation drives a Horstein (posterior matching) transmitter;
randomized training and update positions keep the receiver's estimates in
step and let it fall back to a safe decision when the noise looks uniform.
"""

from .core_types import (Alphabet, EmpiricalDistribution, PatternSeq, ScaledSampleDistribution,
                         SymbolSeq, alpha_normalized_sample_distribution, empirical_distribution,
                         empirical_entropy, entropy_linf_lower_bound, linf_distance, sample)
from .estimators import (KtEstimator, UpdateSchedule, assigned_probability, codelength_bits,
                         estimate, observe)
from .posterior import (BinaryInterval, ExactTracker, FastTracker, MessageInterval, Posterior,
                        ambiguity_bit, decode_binary_interval, encode_symbol, horstein_update,
                        interval_by_index, message_interval, partition_points)
from .channels import (DitheredChannel, empirical_capacity, realized_noise)
from .protocol import (BlockPlan, SchemeParams, TrialRecord, UpdatePayload, decode_update_bit,
                       plan_block, range_check, run_dithered, run_finite_horizon, run_genie,
                       run_horizon_free)
from .harness import ExperimentConfig, run_experiment
from .lemmas import lemma_suite
from .seeding import TrialSeeds, splitmix64, trial_seed

__version__ = "0.1.0"
