"""Exact folding of batch normalization into fixed-point affine operators."""

from .bnfold import BnLayerParams, FoldedLayer, fold_bn, fold_layer, fold_model, quantize_layer, simulate_compare
from .convert import (
    DegenerateSign,
    FixedAffine,
    NoSolution,
    QuantRange,
    SignThreshold,
    candidate_windows,
    detect_degenerate_sign,
    intuitive_candidates,
    reduce_stride,
    shift_range,
    solve_tb,
    solve_tb_strided,
)
from .oracle import EquivalenceReport, brute_force_tb, eval_fixed_side, eval_float_side, verify_equivalence
from .scale_search import (
    ScaleResult,
    ScaleSearchConfig,
    find_tb_for_k,
    is_satisfied_k,
    kn_bounds,
    list_satisfied_k,
    search_kn,
)
from .seqgen import (
    AffineReal,
    CeilSequence,
    NormalizedAffine,
    enumerate_sequences,
    extend_sequences,
    is_realizable,
    make_sequence,
    normalize_affine,
)

__version__ = "0.1.0"
