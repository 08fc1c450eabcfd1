"""Toolkit for annotating question-answer pairs in spoken dialogue.

Covers corpus ingestion, surface-feature extraction, rule-based and
decision-tree question typing, wh-word semantic-role mapping, answer-type
validation, and inter-annotator agreement scoring.
"""

from .evaluation import (
    AgreementReport,
    ClassScores,
    ConfusionMatrix,
    DisagreementCategory,
    DisagreementRecord,
    EmptyInput,
    EvalReport,
    LengthMismatch,
    NoAlignedItems,
    cohen_kappa,
    confusion,
    disagreement_report,
    observed_agreement,
    pairwise_agreement,
    score,
)
from .features import ExtractorConfig, FeatureVector, detect_inversion, extract_features
from .ingestion import (
    Dialogue,
    DuplicateTurn,
    EmptyTranscript,
    IngestError,
    MalformedLine,
    NonDenseTurns,
    UnknownTag,
    parse_dialogue_jsonl,
    parse_eaf,
    parse_tsv_transcript,
    read_annotations,
    write_annotations,
    write_dialogues,
)
from .lexicon import EmptyLexicon, Lexicon, load_lexicon
from .model import (
    QUESTION_TYPE_ORDER,
    AnswerAnnotation,
    AnswerType,
    Feature,
    QAPair,
    QuestionAnnotation,
    QuestionType,
    Utterance,
    Violation,
    ViolationKind,
    allowed_answer_types,
    feature_applicable,
    pair_annotations,
    validate_annotations,
    validate_corpus,
)
from .rules import DEFAULT_WH_FEATURE_MAP, RuleConfig, load_wh_feature_map, map_wh_feature, rule_classify
from .text import overlap_ratio, tokenize
from .tree import (
    EmptyTrainingSet,
    LabeledInstance,
    MalformedModel,
    Node,
    TrainConfig,
    TreeModel,
    UnsupportedVersion,
    entropy,
    information_gain,
    load_model,
    majority_baseline,
    predict,
    save_model,
    train_tree,
)

__version__ = "0.1.0"

__all__ = [
    "AgreementReport",
    "AnswerAnnotation",
    "AnswerType",
    "ClassScores",
    "ConfusionMatrix",
    "DEFAULT_WH_FEATURE_MAP",
    "Dialogue",
    "DisagreementCategory",
    "DisagreementRecord",
    "DuplicateTurn",
    "EmptyInput",
    "EmptyLexicon",
    "EmptyTranscript",
    "EmptyTrainingSet",
    "EvalReport",
    "ExtractorConfig",
    "Feature",
    "FeatureVector",
    "IngestError",
    "LabeledInstance",
    "LengthMismatch",
    "Lexicon",
    "MalformedLine",
    "MalformedModel",
    "NoAlignedItems",
    "Node",
    "NonDenseTurns",
    "QAPair",
    "QUESTION_TYPE_ORDER",
    "QuestionAnnotation",
    "QuestionType",
    "RuleConfig",
    "TrainConfig",
    "TreeModel",
    "UnknownTag",
    "UnsupportedVersion",
    "Utterance",
    "Violation",
    "ViolationKind",
    "allowed_answer_types",
    "cohen_kappa",
    "confusion",
    "detect_inversion",
    "disagreement_report",
    "entropy",
    "extract_features",
    "feature_applicable",
    "information_gain",
    "load_lexicon",
    "load_model",
    "load_wh_feature_map",
    "majority_baseline",
    "map_wh_feature",
    "observed_agreement",
    "overlap_ratio",
    "pair_annotations",
    "pairwise_agreement",
    "parse_dialogue_jsonl",
    "parse_eaf",
    "parse_tsv_transcript",
    "predict",
    "read_annotations",
    "rule_classify",
    "save_model",
    "score",
    "tokenize",
    "train_tree",
    "validate_annotations",
    "validate_corpus",
    "write_annotations",
    "write_dialogues",
]
