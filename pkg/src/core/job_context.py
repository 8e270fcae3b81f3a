"""
Functional Load Toolkit
Job Context Module

Defines the data structure that flows through the job pipeline. Loading
stages fill it with the parsed schema, corpus, contrasts and similarity
model; diagnostics accumulate alongside.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

from ..config import JobConfig
from .analysis import SimilarityModel
from .contrast import ContrastSpec
from .corpus import JoinDiagnostics, TokenStreamCorpus, WeightedLexicon
from .schema import Schema


@dataclass(frozen=True)
class StageDiagnostic:
    """An error or note recorded by a pipeline stage."""

    stage: str
    message: str
    exit_code: int = 1


@dataclass
class JobContext:
    """
    Central context object that flows through the JobOrchestrator pipeline.
    """

    config: JobConfig
    collect_errors: bool = False

    # Schema loading
    schema: Optional[Schema] = None

    # Corpus loading
    corpus: Optional[Union[TokenStreamCorpus, WeightedLexicon]] = None
    join_diagnostics: Optional[JoinDiagnostics] = None

    # Contrast loading: (contrast id, spec) in config order
    contrasts: List[Tuple[str, ContrastSpec]] = field(default_factory=list)

    # Similarity model loading
    similarity: Optional[SimilarityModel] = None

    checks: List[StageDiagnostic] = field(default_factory=list)
    errors: List[StageDiagnostic] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def add_error(self, stage: str, message: str, exit_code: int = 1) -> None:
        self.errors.append(StageDiagnostic(stage, message, exit_code))

    def add_warning(self, warning: str) -> None:
        self.warnings.append(warning)

    def add_check(self, stage: str, message: str) -> None:
        """Record a successful validation step."""
        self.checks.append(StageDiagnostic(stage, message, 0))

    @property
    def exit_code(self) -> int:
        return max((error.exit_code for error in self.errors), default=0)

    def should_continue_processing(self) -> bool:
        """Stages keep running after an error only when collecting diagnostics."""
        return self.collect_errors or not self.errors

    def get_summary(self) -> Dict[str, Any]:
        """Summary of what was loaded."""
        summary: Dict[str, Any] = {
            "status": "error" if self.errors else "ok",
            "types": len(self.schema.typedefs) if self.schema else 0,
            "contrasts": len(self.contrasts),
            "has_errors": bool(self.errors),
            "has_warnings": bool(self.warnings),
        }
        if isinstance(self.corpus, TokenStreamCorpus):
            summary["utterances"] = len(self.corpus.utterances)
            summary["objects"] = self.corpus.size
        elif isinstance(self.corpus, WeightedLexicon):
            summary["entries"] = len(self.corpus.entries)
        return summary
