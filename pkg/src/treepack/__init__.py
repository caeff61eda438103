"""Packing trees of consecutive orders n, n-1, ..., n-k+1 into K_n."""

from .graph import (
    Edge,
    Embedding,
    Graph,
    MalformedEmbedding,
    PackingResult,
    SortedVertexOrder,
    Tree,
    apply_embedding,
    binomial_tail_bound,
    edge_union,
    sorted_vertices,
    verify_packing,
)
from .profiles import DESK, FAITHFUL, ConstantsProfile, make_profile
from .trees import (
    CompletionSpec,
    DegreeClass,
    PendantPath,
    ReservationError,
    ReservedBlock,
    build_reserved,
    check_eligibility,
    classify,
    decode_prufer,
    encode_prufer,
    find_pendant_path,
)
from .smallpack import SmallPackError, SmallPacking, classify_edges, pack_small
from .embed_common import (
    PinConstraint,
    ResampleExhausted,
    StageFailure,
    StageTrace,
)
from .embed_sparse import pack_low_max_degree, sample_stage_sets
from .embed_dense import pack_high_max_degree, sample_dense_stage_sets, select_hub_fringe
from .pairpack import pack_sparse_pair, pair_precondition
from .oracle import consecutive_suite, enumerate_trees, exact_pack
from .pipeline import (
    HypothesisViolated,
    Instance,
    PackResult,
    make_instance,
    pack_consecutive_trees,
)

__version__ = "0.1.0"
