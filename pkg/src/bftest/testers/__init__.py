from .learning import (
    agreeing_pair_free_probability,
    junta_passive_tester,
    junta_sample_size,
    learn_consistent,
    learn_then_verify,
    learn_via_net,
    net_disagreements,
    net_sample_size,
    verify_block_size,
)
from .linear import (
    active_linear_tester,
    active_query_count,
    blr_acceptance_probability,
    blr_fourier_formula,
    blr_k_test,
    blr_soundness_bound,
    passive_linear_tester,
    passive_polynomial_tester,
)
from .oracle import Decision, LearnerOutput, Model, QueryOracle, Verdict
from .symmetric import (
    psf_active_pair_budget,
    psf_consistency_check,
    psf_passive_sample_size,
    psf_tester,
    same_weight_probability,
    symmetric_passive_sample_size,
    symmetric_tester,
    tolerant_symmetric_tester,
)
