"""
Functional Load Toolkit
Job Orchestrator Module

Pipeline coordinator behind every CLI command. Loading runs as a sequence
of stages (schema, corpus, contrasts, similarity model) over a shared
JobContext; the ``run_*`` methods then turn a loaded context into a Report.
"""

import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from ..config import CorpusFormat, JobConfig
from .analysis import assess_consistency, fl_matrix, normalize_pair, parse_similarity_model, rank_entry, single_phoneme_fl
from .contrast import ContrastSpec, parse_contrast, parse_guard
from .corpus import (
    MissPolicy,
    WeightedLexicon,
    join_lexicon,
    parse_key_stream,
    parse_pronunciations,
    parse_token_stream,
    parse_weighted_lexicon,
)
from .errors import AlignmentError, ConfigError, FunctionalLoadError, InputError
from .infotheory import cohort_analysis, corpus_entropy, functional_load
from .job_context import JobContext
from .processing_stage import ProcessingStage, ProcessingStageError, SkipStageError
from .report_generator import Report
from .schema import parse_schema


logger = logging.getLogger(__name__)


def read_text(path: str) -> str:
    """Read a UTF-8 input file."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    except UnicodeDecodeError as e:
        raise InputError(f"{path} is not valid UTF-8: {e}") from None


class JobOrchestrator:
    """
    Central orchestrator for toolkit jobs.

    Loads the inputs named by a JobConfig through the stage pipeline and
    runs one analysis command over them.
    """

    def __init__(self, config: JobConfig):
        """
        Initialize the orchestrator.

        Args:
            config: Validated job configuration
        """
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.stages: List[ProcessingStage] = [
            SchemaLoadingStage(),
            CorpusLoadingStage(),
            ContrastLoadingStage(),
            SimilarityLoadingStage(),
        ]

    def load(self, collect_errors: bool = False) -> JobContext:
        """
        Run every loading stage.

        Args:
            collect_errors: Record failures in the context and keep going
                instead of raising (used by ``validate``)

        Returns:
            JobContext with the loaded inputs

        Raises:
            ProcessingStageError: A stage failed and collect_errors is False
        """
        context = JobContext(config=self.config, collect_errors=collect_errors)
        for stage in self.stages:
            self._process_stage(stage, context)
            if not context.should_continue_processing():
                break
        return context

    def _process_stage(self, stage: ProcessingStage, context: JobContext) -> None:
        """Process a single pipeline stage with error handling."""
        stage.log_stage_entry(context)

        try:
            if not stage.can_process(context):
                raise SkipStageError(stage.stage_name, "Stage prerequisites not met")

            validation_error = stage.validate_input(context)
            if validation_error:
                raise ProcessingStageError(stage.stage_name, validation_error, ConfigError(validation_error))

            stage.process(context)
            stage.log_stage_exit(context, success=True)

        except SkipStageError as e:
            self.logger.debug(f"Skipping {stage.stage_name}: {e}")
            stage.log_stage_exit(context, success=False)

        except Exception as e:
            should_continue = stage.handle_error(context, e)
            stage.log_stage_exit(context, success=False)

            if not should_continue:
                if isinstance(e, ProcessingStageError):
                    raise
                raise ProcessingStageError(stage.stage_name, str(e), e) from e

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------

    def _meta(self, command: str, **extra: Any) -> Dict[str, Any]:
        meta: Dict[str, Any] = {"command": command, "inputs": self.config.inputs()}
        meta.update(extra)
        return meta

    def _require_corpus(self, context: JobContext) -> Any:
        if context.corpus is None:
            raise ConfigError("no corpus loaded (use --corpus)")
        return context.corpus

    def _require_contrasts(self, context: JobContext) -> List[Any]:
        if not context.contrasts:
            raise ConfigError("no contrast given (use --contrast)")
        return context.contrasts

    def run_fl(self, context: JobContext) -> Report:
        """Functional load of every configured contrast."""
        corpus = self._require_corpus(context)
        n = self.config.n
        report = Report(
            "fl",
            ["contrast", "n", "h_before", "h_after", "fl", "raw_before", "raw_after", "total_before", "total_after"],
            meta=self._meta("fl"),
        )
        before = corpus_entropy(corpus, n, self.config.jobs)
        for contrast_id, spec in self._require_contrasts(context):
            result = functional_load(corpus, spec, n, contrast_id=contrast_id, jobs=self.config.jobs, before=before)
            report.add_row(**{column: result.to_dict()[column] for column in report.columns})
        return report

    def run_fl_matrix(self, context: JobContext) -> Report:
        """Pairwise FL over ``pairs`` with percentile ranks."""
        corpus = self._require_corpus(context)
        if not self.config.pairs:
            raise ConfigError("fl-matrix needs --pairs")
        guard = parse_guard(self.config.guard) if self.config.guard else None
        atomic_type = self.config.pair_type
        assert atomic_type is not None
        matrix = fl_matrix(corpus, atomic_type, self.config.pairs, self.config.n, guard=guard, jobs=self.config.jobs)

        report = Report(
            "fl-matrix",
            ["x", "y", "n", "fl", "rank"],
            meta=self._meta("fl-matrix", atomic_type=atomic_type, guard=self.config.guard or ""),
        )
        for x, y in matrix.pairs():
            report.add_row(x=x, y=y, n=matrix.n, fl=matrix.entries[(x, y)], rank=rank_entry(matrix, (x, y)))
        return report

    def run_cohorts(self, context: JobContext) -> Report:
        """Cohort statistics of a lexicon under every configured contrast."""
        corpus = self._require_corpus(context)
        if not isinstance(corpus, WeightedLexicon):
            raise ConfigError("cohorts needs a lexicon corpus (--corpus-format lexicon)")
        report = Report(
            "cohorts",
            ["contrast", "words", "cohorts", "shipman", "huttenlocher", "carter", "h_w", "h_w_theta", "pie"],
            meta=self._meta("cohorts"),
        )
        undefined = []
        for contrast_id, spec in self._require_contrasts(context):
            result = cohort_analysis(corpus, spec.with_name(contrast_id))
            report.add_row(**result.to_dict())
            if result.pie is None:
                undefined.append(contrast_id)
        if undefined:
            report.meta["pie_undefined"] = undefined
        return report

    def run_phoneme_fl(self, context: JobContext) -> Report:
        """
        Single-phoneme FL. Each phoneme contributes one row per possible
        merger and a ``*`` row carrying the weighted total.
        """
        corpus = self._require_corpus(context)
        if context.similarity is None:
            raise ConfigError("phoneme-fl needs --similar")
        model = context.similarity
        phonemes = [self.config.phoneme] if self.config.phoneme else sorted(model.similar)

        report = Report(
            "phoneme-fl",
            ["phoneme", "target", "n", "weight", "fl"],
            meta=self._meta("phoneme-fl", weighting=model.mode.value),
        )
        empty = []
        for x in phonemes:
            result = single_phoneme_fl(corpus, x, model, self.config.n, atomic_type=self.config.pair_type, jobs=self.config.jobs)
            for term in result.terms:
                report.add_row(phoneme=x, target=term.target, n=result.n, weight=term.weight, fl=term.fl)
            report.add_row(phoneme=x, target="*", n=result.n, weight=1.0 if result.terms else 0.0, fl=result.fl)
            if result.empty_similarity_set:
                empty.append(x)
        if empty:
            report.meta["empty_similarity_sets"] = empty
        return report

    @staticmethod
    def read_fl_report(path: str) -> pd.DataFrame:
        """
        Read the x, y, fl columns of an fl-matrix report (TSV or JSON).

        Raises:
            AlignmentError: The file is not an fl-matrix report
        """
        text = read_text(path)
        if text.lstrip().startswith("{"):
            try:
                frame = pd.DataFrame(json.loads(text).get("results", []))
            except (ValueError, AttributeError) as e:
                raise InputError(f"{path}: invalid JSON report: {e}") from None
        else:
            try:
                frame = pd.read_csv(io.StringIO(text), sep="\t", dtype={"x": str, "y": str}, keep_default_na=False)
            except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
                raise InputError(f"{path}: invalid TSV report: {e}") from None

        if frame.empty or not {"x", "y", "fl"} <= set(frame.columns):
            raise AlignmentError(f"{path}: not an fl-matrix report (needs x, y and fl columns)")
        pairs = [normalize_pair(str(x), str(y)) for x, y in zip(frame["x"], frame["y"])]
        result = pd.DataFrame({"x": [p[0] for p in pairs], "y": [p[1] for p in pairs], "fl": frame["fl"].astype(float)})
        if result.duplicated(["x", "y"]).any():
            raise AlignmentError(f"{path}: duplicate pair keys")
        return result

    def run_alpha(self, report_a: str, report_b: str) -> Report:
        """Consistency coefficient between two fl-matrix reports aligned by pair."""
        left = self.read_fl_report(report_a)
        right = self.read_fl_report(report_b)
        merged = left.merge(right, on=["x", "y"], how="outer", suffixes=("_a", "_b"), indicator=True)

        only_a = int((merged["_merge"] == "left_only").sum())
        only_b = int((merged["_merge"] == "right_only").sum())
        if only_a or only_b:
            raise AlignmentError(
                f"pair keys differ: {only_a} only in {report_a}, {only_b} only in {report_b}"
            )

        merged = merged.sort_values(["x", "y"])
        result = assess_consistency(
            merged["fl_a"].tolist(), merged["fl_b"].tolist(), threshold=self.config.consistency_threshold
        )
        report = Report(
            "alpha",
            ["alpha", "pairs", "threshold", "consistent"],
            meta={"command": "alpha", "inputs": {"report_a": report_a, "report_b": report_b}},
        )
        report.add_row(alpha=result.alpha, pairs=result.pairs, threshold=result.threshold, consistent=result.consistent)
        return report

    def run_validate(self) -> Report:
        """Load everything, collecting diagnostics instead of stopping."""
        context = self.load(collect_errors=True)
        report = Report("validate", ["stage", "status", "detail"], meta=self._meta("validate"))
        for check in context.checks:
            report.add_row(stage=check.stage, status="ok", detail=check.message)
        for error in context.errors:
            report.add_row(stage=error.stage, status="error", detail=error.message)
        for warning in context.warnings:
            report.add_row(stage="warning", status="warning", detail=warning)
        report.meta["exit_code"] = context.exit_code
        return report


# Concrete loading stages


class SchemaLoadingStage(ProcessingStage):
    """Parse the schema file."""

    def __init__(self) -> None:
        super().__init__("Schema Loading")

    def validate_input(self, context: JobContext) -> Optional[str]:
        if not context.config.schema_file:
            return "no schema given (use --schema)"
        return None

    def process(self, context: JobContext) -> None:
        path = context.config.schema_file
        assert path is not None
        context.schema = parse_schema(read_text(path), source=path)
        context.add_check(self.stage_name, f"{path}: {len(context.schema.typedefs)} types")


class CorpusLoadingStage(ProcessingStage):
    """Parse the corpus (token stream, lexicon, or key stream joined with pronunciations)."""

    def __init__(self) -> None:
        super().__init__("Corpus Loading")

    def can_process(self, context: JobContext) -> bool:
        return context.schema is not None and context.config.corpus is not None

    def validate_input(self, context: JobContext) -> Optional[str]:
        if not context.config.object_type:
            return "no object type given (use --type)"
        return None

    def process(self, context: JobContext) -> None:
        config = context.config
        assert context.schema is not None and config.corpus is not None and config.object_type is not None
        text = read_text(config.corpus)

        if config.join_lexicon:
            keys = parse_key_stream(text, source=config.corpus)
            pronunciations = parse_pronunciations(
                read_text(config.join_lexicon), context.schema, config.object_type, source=config.join_lexicon
            )
            corpus, diagnostics = join_lexicon(keys, pronunciations, MissPolicy(config.miss.value))
            context.join_diagnostics = diagnostics
            if diagnostics.misses:
                context.add_warning(
                    f"lexicon join skipped {diagnostics.misses} tokens: {' '.join(diagnostics.missing_keys)}"
                )
            context.corpus = corpus
            context.add_check(self.stage_name, f"{config.corpus}: joined {diagnostics.joined} tokens")
        elif config.corpus_format is CorpusFormat.LEXICON:
            lexicon = parse_weighted_lexicon(text, context.schema, config.object_type, source=config.corpus)
            context.corpus = lexicon
            context.add_check(self.stage_name, f"{config.corpus}: {len(lexicon.entries)} entries")
        else:
            stream = parse_token_stream(text, context.schema, config.object_type, source=config.corpus)
            context.corpus = stream
            context.add_check(
                self.stage_name, f"{config.corpus}: {len(stream.utterances)} utterances, {stream.size} objects"
            )


class ContrastLoadingStage(ProcessingStage):
    """Parse each contrast file; the file stem is the contrast id."""

    def __init__(self) -> None:
        super().__init__("Contrast Loading")

    def can_process(self, context: JobContext) -> bool:
        return context.schema is not None and bool(context.config.contrasts)

    def validate_input(self, context: JobContext) -> Optional[str]:
        if not context.config.object_type:
            return "no object type given (use --type)"
        return None

    def process(self, context: JobContext) -> None:
        assert context.schema is not None and context.config.object_type is not None
        for path in context.config.contrasts:
            try:
                spec: ContrastSpec = parse_contrast(
                    read_text(path), context.schema, context.config.object_type, source=path
                )
            except FunctionalLoadError as e:
                if not context.collect_errors:
                    raise
                context.add_error(self.stage_name, str(e), e.exit_code)
                continue
            contrast_id = Path(path).stem
            context.contrasts.append((contrast_id, spec.with_name(contrast_id)))
            context.add_check(self.stage_name, f"{path}: {len(spec.rules)} rules")


class SimilarityLoadingStage(ProcessingStage):
    """Parse the similarity model used by phoneme-fl."""

    def __init__(self) -> None:
        super().__init__("Similarity Loading")

    def can_process(self, context: JobContext) -> bool:
        return context.config.similar is not None

    def process(self, context: JobContext) -> None:
        path = context.config.similar
        assert path is not None
        context.similarity = parse_similarity_model(read_text(path), source=path)
        context.add_check(self.stage_name, f"{path}: {len(context.similarity.similar)} similarity sets")
