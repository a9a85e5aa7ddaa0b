"""rulelens: reverse-engineer and causally verify the decision rules of
binary classifiers over symbolic scenes.

The pipeline has four stages: minimal-edit counterfactual search, change
captioning, candidate-explanation mining/summarization, and causal
verification (directed information as a coarse filter; CaCE and PNS for the
fine ranking), plus an exploration service for evaluating user-proposed
concept combinations.
"""

from .captioning import (
    ChangeCaption,
    ChangeEvent,
    caption_changes,
    corrupt_caption,
    diff_scenes,
    independent_caption,
    parse_caption,
)
from .classifier import RuleClassifier, WireClassifier, binarize_one_vs_all, classify
from .concepts import (
    Concept,
    ConceptError,
    OpaqueConceptError,
    combine,
    concept_from_string,
    eval_concept,
    parse_concept,
)
from .counterfactual import (
    CounterfactualNotFound,
    CounterfactualPair,
    build_pair_set,
    find_counterfactual,
)
from .metrics import (
    MetricReport,
    OutcomeRow,
    OutcomeTable,
    build_metric_report,
    cace,
    directed_information,
    interventional_bound,
    pn_hat,
    pns_hat,
    ps_hat,
)
from .pipeline import RunConfig, run_all, run_bias_suite, run_recovery_suite
from .render import render_svg
from .scene import Edit, Scene, SceneObject, WorldConfig, edit_add, edit_remove, sample_scene
from .summarizer import CandidateExplanation, dedupe, llm_summarize, mine_candidates
from .verification import (
    OracleEditor,
    ValidationSet,
    build_outcome_table,
    build_validation_set,
    coarse_filter,
    evaluate,
    partition,
    rank,
)

__version__ = "0.1.0"
