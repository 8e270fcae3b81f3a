"""
Functional Load Toolkit
Processing Stage Interface

Defines the abstract interface for pipeline stages in the JobOrchestrator.
Each loading step implements this interface for consistent integration.
"""

from abc import ABC, abstractmethod
from typing import Optional
import logging

from .errors import FunctionalLoadError
from .job_context import JobContext


logger = logging.getLogger(__name__)


class ProcessingStage(ABC):
    """
    Abstract base class for all processing stages in the job pipeline.

    Each stage receives a JobContext, loads or computes its part,
    and updates the context before returning.
    """

    def __init__(self, stage_name: str):
        """
        Initialize the processing stage.

        Args:
            stage_name: Human-readable name for this stage (for logging)
        """
        self.stage_name = stage_name
        self.logger = logging.getLogger(f"{__name__}.{stage_name}")

    @abstractmethod
    def process(self, context: JobContext) -> None:
        """
        Process the job context and update it with stage results.

        Args:
            context: The job context containing accumulated results

        Raises:
            FunctionalLoadError: If the stage's input is invalid
        """
        pass

    def can_process(self, context: JobContext) -> bool:
        """
        Check if this stage can process the given context.
        Override in subclasses for dependency checking.
        """
        return True

    def validate_input(self, context: JobContext) -> Optional[str]:
        """
        Validate that the context has required data for this stage.

        Returns:
            Error message if validation fails, None if valid
        """
        return None

    def handle_error(self, context: JobContext, error: Exception) -> bool:
        """
        Handle errors that occur during processing.

        Args:
            context: The job context
            error: The exception that occurred

        Returns:
            True if the error was recorded and processing should continue,
            False if it should propagate
        """
        exit_code = error.exit_code if isinstance(error, FunctionalLoadError) else 1
        if isinstance(error, ProcessingStageError) and isinstance(error.cause, FunctionalLoadError):
            exit_code = error.cause.exit_code
        context.add_error(self.stage_name, str(error), exit_code)

        if context.collect_errors:
            self.logger.debug(f"{self.stage_name} stage recorded error: {error}")
            return True
        if not isinstance(error, FunctionalLoadError):
            self.logger.error(f"{self.stage_name} stage failed: {error}", exc_info=True)
        return False

    def log_stage_entry(self, context: JobContext) -> None:
        """Log entry into this processing stage."""
        self.logger.info(f"Starting {self.stage_name} stage")

    def log_stage_exit(self, context: JobContext, success: bool = True) -> None:
        """Log exit from this processing stage."""
        status = "completed" if success else "failed"
        self.logger.info(f"{self.stage_name} stage {status}")


class ProcessingStageError(Exception):
    """Exception raised when a processing stage encounters a critical error."""

    def __init__(self, stage_name: str, message: str, cause: Optional[Exception] = None):
        self.stage_name = stage_name
        self.cause = cause
        super().__init__(f"Processing stage '{stage_name}' failed: {message}")

    @property
    def exit_code(self) -> int:
        if isinstance(self.cause, FunctionalLoadError):
            return self.cause.exit_code
        return 1


class SkipStageError(ProcessingStageError):
    """Exception to indicate a stage should be skipped (non-critical)."""
    pass
