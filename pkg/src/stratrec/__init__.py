"""stratrec: maps strategic-framework parameters to decision heuristics by
semantic vector analysis, ranks heuristics for a situation, validates the
mappings, and renders constrained narrative reports."""

from .embedding import (
    EmbeddingCache,
    EmbeddingVector,
    FixtureProvider,
    ReferenceProvider,
    RemoteProvider,
    TermWeighting,
    compose_parameter_vector,
    embed_heuristic,
    embed_text,
    normalize_tokens,
    reference_embed,
)
from .errors import (
    AnalysisError,
    DegenerateColumnError,
    EmbeddingError,
    ProviderError,
    SpecFormatError,
    StratrecError,
    TemplateError,
    WorkflowError,
    WorkflowValidationError,
)
from .pipeline import AnalysisRecord, run_analysis
from .registry import (
    FrameworkSpec,
    HeuristicSetSpec,
    HeuristicSpec,
    ParameterSpec,
    Registry,
    load_framework_spec,
    load_heuristic_set,
)
from .scenario import ActorSpec, ScenarioRecord, load_scenario
from .selection import (
    RankedRecommendation,
    SelectionResult,
    SituationVector,
    build_situation_vector,
    select_stratagems,
)
from .semantic import (
    AlignmentContext,
    AlignmentScore,
    ParameterDistribution,
    SimilarityMatrix,
    alignment_score,
    build_similarity_matrix,
    compute_term_weights,
    cosine_similarity,
    discover_distribution,
    kl_divergence,
    kl_terms,
)
from .validation import (
    ConfidenceScore,
    ExpertAnnotation,
    compare_to_expert,
    confidence_score,
    cross_validation_score,
    expert_agreement_score,
    load_expert_annotation,
    stability_score,
)

__version__ = "0.1.0"
