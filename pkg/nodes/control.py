"""
Control flow and report nodes for the verification workflow
"""
from typing import Any, Dict, Literal

from core.logging import app_logger
from core.models import VerifyState


def should_continue_verification(state: VerifyState) -> Literal["continue", "report"]:
    """
    Stop early only when fail_fast is set and a suite has failed
    """
    if state.fail_fast and any(not result.passed for result in state.results):
        failed = [result.name for result in state.results if not result.passed]
        app_logger.warning(f"Fail-fast: skipping remaining suites after failure in {failed}")
        return "report"
    return "continue"


def report_node(state: VerifyState) -> Dict[str, Any]:
    """
    Summarize the suite results into the execution log
    """
    failed = [result.name for result in state.results if not result.passed]
    if failed:
        app_logger.error(f"Verification failed in {len(failed)} suite(s): {', '.join(failed)}")
        summary = f"verification FAILED ({', '.join(failed)})"
    else:
        app_logger.info(f"Verification passed: {len(state.results)} suites")
        summary = f"verification passed ({len(state.results)} suites)"
    return {"execution_log": [summary]}
