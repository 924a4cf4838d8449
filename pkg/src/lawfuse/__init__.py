"""Neuro-symbolic legal case retrieval.

Candidate cases are ranked against a query by fusing three signals: a
pluggable semantic relevance score, a statute-level score induced from
fuzzy-logic evaluation of cited law rules, and a sentence-alignment score.
The fuzzy rule structures double as human-readable explanations and feed
judgment-prediction prompts for LLM-based evaluation.
"""

from .caselevel import AlignedPair, CaseExplanation, align_top_k, induce_case_score
from .corpus import (
    CandidateCase,
    Corpus,
    CorpusConfig,
    Qrels,
    Query,
    build_candidate_pool,
    load_corpus,
    normalize_label,
    split_sentences,
)
from .errors import (
    ConfigError,
    CorpusError,
    DataError,
    EndpointError,
    LawfuseError,
    MissingAssignmentError,
    MissingScoreError,
    RulebaseError,
    RuleSyntaxError,
    ScoreTableError,
)
from .explain import (
    EndpointConfig,
    Exemplar,
    PromptSpec,
    RenderConfig,
    build_prompt,
    judge_accuracy,
    query_llm,
    render_explanation,
)
from .fol import (
    And,
    Atom,
    FolRule,
    Formula,
    Not,
    Or,
    PredicateDef,
    RuleBase,
    eval_formula,
    eval_rule,
    parse_rulebase,
    render_formula,
    render_rule,
    render_rulebase,
)
from .fusion import (
    FusedRanking,
    FusionConfig,
    ModuleRanking,
    fuse,
    rank_candidates,
    wrrf_weight,
)
from .lawlevel import (
    LawExplanation,
    LawScore,
    build_law_explanation,
    extract_rules,
    induce_law_score,
)
from .metrics import (
    MetricReport,
    evaluate_run,
    mean_average_precision,
    ndcg_at_k,
    precision_at_k,
)
from .scorers import (
    Bm25Params,
    EmbeddingTable,
    HashedEmbedder,
    LexicalPredicateScorer,
    ScoreTable,
    bm25_score,
    cosine,
    embed_sentence,
    neural_relevance,
    predicate_score,
)
from .traindata import (
    PretrainRecord,
    TraindataConfig,
    build_pretraining_set,
    make_pseudo_query,
    sample_negatives,
    select_positive_predicates,
)

__version__ = "0.1.0"
