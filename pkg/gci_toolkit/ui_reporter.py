"""UI reporting abstraction for progress feedback."""

import logging
from abc import ABC, abstractmethod

logger = logging.getLogger(__name__)


class UIReporter(ABC):
    """Abstract base class for UI reporting."""

    @abstractmethod
    def report_recording_start(self, index: int, total: int, name: str) -> None:
        """Report starting processing for a recording."""
        pass

    @abstractmethod
    def report_recording_success(self, name: str, n_reports: int) -> None:
        """Report that every method and condition finished for a recording."""
        pass

    @abstractmethod
    def report_recording_error(self, name: str, error: str) -> None:
        """Report a recording that was skipped."""
        pass


class ConsoleReporter(UIReporter):
    """Console-based UI reporter."""

    def __init__(self, verbose: bool = False):
        self.verbose = verbose

    def report_recording_start(self, index: int, total: int, name: str) -> None:
        if self.verbose:
            print(f"\n  Processing recording {index}/{total}: {name}")
        else:
            print(f"  [{index}/{total}] {name}... ", end="", flush=True)

    def report_recording_success(self, name: str, n_reports: int) -> None:
        if self.verbose:
            print(f"    ✓ {name}: {n_reports} method/condition reports")
        else:
            print("✓")

    def report_recording_error(self, name: str, error: str) -> None:
        if not self.verbose:
            print("✗")
        logger.error(f"Skipped {name}: {error}")


class SilentReporter(UIReporter):
    """Reporter that only logs, for library use and tests."""

    def report_recording_start(self, index: int, total: int, name: str) -> None:
        logger.debug(f"[{index}/{total}] {name}")

    def report_recording_success(self, name: str, n_reports: int) -> None:
        logger.debug(f"{name}: {n_reports} reports")

    def report_recording_error(self, name: str, error: str) -> None:
        logger.error(f"Skipped {name}: {error}")
