"""absa-forge: instruction-tuning data machinery for aspect-based sentiment analysis."""

__version__ = "0.1.0"

from .core import (
    AE,
    AESC,
    ASQP,
    ASTE,
    TASD,
    TASKS,
    AspectTerm,
    Capabilities,
    CategoryLabel,
    Example,
    Quad,
    SentimentPolarity,
    Task,
    applicable_tasks,
    project,
    task_by_name,
)
from .evaluate import ScoreReport, render_report, score
from .fewshot import FewShotSpec, sample_fewshot
from .ingest import Dataset, load_dataset, parse_aste_line, parse_quad_line, write_canonical
from .mtl import EmitConfig, TrainRecord, emit_corpus, read_corpus, write_corpus
from .parser import ParseOutcome, parse_prediction, parse_segment, split_ssep
from .templates import (
    DEFAULT_LEXICON,
    DEFAULT_REGISTRY,
    SentimentLexicon,
    TemplateRegistry,
    render_input,
    render_target,
    sample_template,
)

__all__ = [
    "__version__",
    "AE",
    "AESC",
    "ASQP",
    "ASTE",
    "TASD",
    "TASKS",
    "AspectTerm",
    "Capabilities",
    "CategoryLabel",
    "Dataset",
    "DEFAULT_LEXICON",
    "DEFAULT_REGISTRY",
    "EmitConfig",
    "Example",
    "FewShotSpec",
    "ParseOutcome",
    "Quad",
    "ScoreReport",
    "SentimentLexicon",
    "SentimentPolarity",
    "Task",
    "TemplateRegistry",
    "TrainRecord",
    "applicable_tasks",
    "emit_corpus",
    "load_dataset",
    "parse_aste_line",
    "parse_prediction",
    "parse_quad_line",
    "parse_segment",
    "project",
    "read_corpus",
    "render_input",
    "render_report",
    "render_target",
    "sample_fewshot",
    "sample_template",
    "score",
    "split_ssep",
    "task_by_name",
    "write_canonical",
    "write_corpus",
]
