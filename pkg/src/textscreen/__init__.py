"""Screen per-user social-media text for a diagnosed/control signal.

The pipeline is a chain of small modules, each usable on its own:

- :mod:`textscreen.corpus` loads users and assembles per-user documents.
- :mod:`textscreen.preprocess` applies the skip rules and text cleaning.
- :mod:`textscreen.features` builds n-gram vocabularies and sparse vectors.
- :mod:`textscreen.models` trains the mini-batch gradient-descent classifiers.
- :mod:`textscreen.encoder_interface` reads embeddings and scores produced
  by external encoders.
- :mod:`textscreen.evaluation` computes confusion matrices, threshold
  metrics, ROC curves, and k-fold cross-validation.
- :mod:`textscreen.report` writes the delimited outputs and figures.
- :mod:`textscreen.cli` wires the stages into the ``textscreen`` command.
"""

__version__ = "0.1.0"

from .corpus import (
    CONTROL,
    DIAGNOSED,
    CorpusError,
    Dataset,
    Document,
    SplitSpec,
    UserRecord,
    build_documents,
    load_users,
    train_test_split,
)
from .encoder_interface import (
    EmbeddingSet,
    EncoderFileError,
    ScoreSet,
    align,
    load_embeddings,
    load_scores,
)
from .evaluation import (
    ConfusionMatrix,
    CvReport,
    EvaluationError,
    Metrics,
    RocCurve,
    confusion,
    cross_validate,
    kfold_split,
    metrics_from_confusion,
    roc_curve,
)
from .features import (
    FeatureError,
    FeatureVector,
    FeaturizerConfig,
    Vocabulary,
    build_vocabulary,
    extract_ngrams,
    stack_vectors,
    vectorize,
)
from .models import (
    DivergenceError,
    EmbeddingHead,
    LogisticModel,
    MlpModel,
    ModelError,
    TrainConfig,
    load_model,
    predict_proba,
    predict_proba_batch,
    save_model,
    train_embedding_head,
    train_logistic,
    train_mlp,
)
from .preprocess import (
    CleanDocument,
    PreprocessConfig,
    PreprocessError,
    SkipDecision,
    clean_text,
    default_config,
    lemmatize,
    preprocess_corpus,
    preprocess_document,
    read_clean_corpus,
    remove_stopwords,
    should_skip,
    tokenize,
    write_clean_corpus,
)

__all__ = [
    "__version__",
    "CONTROL",
    "DIAGNOSED",
    "CorpusError",
    "Dataset",
    "Document",
    "SplitSpec",
    "UserRecord",
    "build_documents",
    "load_users",
    "train_test_split",
    "EmbeddingSet",
    "EncoderFileError",
    "ScoreSet",
    "align",
    "load_embeddings",
    "load_scores",
    "ConfusionMatrix",
    "CvReport",
    "EvaluationError",
    "Metrics",
    "RocCurve",
    "confusion",
    "cross_validate",
    "kfold_split",
    "metrics_from_confusion",
    "roc_curve",
    "FeatureError",
    "FeatureVector",
    "FeaturizerConfig",
    "Vocabulary",
    "build_vocabulary",
    "extract_ngrams",
    "stack_vectors",
    "vectorize",
    "DivergenceError",
    "EmbeddingHead",
    "LogisticModel",
    "MlpModel",
    "ModelError",
    "TrainConfig",
    "load_model",
    "predict_proba",
    "predict_proba_batch",
    "save_model",
    "train_embedding_head",
    "train_logistic",
    "train_mlp",
    "CleanDocument",
    "PreprocessConfig",
    "PreprocessError",
    "SkipDecision",
    "clean_text",
    "default_config",
    "lemmatize",
    "preprocess_corpus",
    "preprocess_document",
    "read_clean_corpus",
    "remove_stopwords",
    "should_skip",
    "tokenize",
    "write_clean_corpus",
]
