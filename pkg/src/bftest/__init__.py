"""Property testers, learners and lower-bound experiments for Boolean functions."""

from .boolfn import (
    BitVector,
    BooleanFunction,
    FourierSpectrum,
    Gf2Polynomial,
    Junta,
    KLinear,
    PartiallySymmetric,
    SeededRandom,
    TruthTable,
    evaluate,
    exact_distance,
    estimate_distance,
    parse_function,
    truth_table,
    walsh_hadamard,
)
from .errors import (
    BudgetExceeded,
    CapacityError,
    ContractError,
    DimensionError,
    GenerationFailure,
    ModelViolation,
)
from .families import (
    EpsilonNet,
    Family,
    exact_distance_to_family,
    far_function_generator,
    greedy_epsilon_net,
    is_member,
    sample_uniform,
)
from .gf2 import Gf2Matrix, MonomialBasis, d_evaluation, find_subset_summing_to, row_reduce, solve
from .testers import Decision, LearnerOutput, Model, QueryOracle, Verdict

__version__ = "0.1.0"
