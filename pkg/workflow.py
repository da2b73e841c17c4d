"""
LangGraph workflow definition for the verification suites
"""
from typing import Optional

from langgraph.graph import END, StateGraph

from core.logging import app_logger
from core.models import OptimizerOptions, SuiteResult, VerifyState
from nodes.control import report_node, should_continue_verification
from nodes.suites import (
    concavity_node,
    epsilon_node,
    identities_node,
    lemma1_node,
    lemma4_node,
    oracle_node,
)

# Suites in execution order
SUITES = [
    ("identities", identities_node),
    ("lemma4", lemma4_node),
    ("lemma1", lemma1_node),
    ("oracle", oracle_node),
    ("epsilon", epsilon_node),
    ("concavity", concavity_node),
]


class VerificationWorkflow:
    """
    LangGraph workflow running every verification suite, then the report
    """

    def __init__(self):
        self.workflow = None
        self.app = None
        self._build_workflow()

    def _build_workflow(self):
        """Build the LangGraph workflow"""
        workflow = StateGraph(VerifyState)

        for name, node in SUITES:
            workflow.add_node(name, node)
        workflow.add_node("report", report_node)

        workflow.set_entry_point(SUITES[0][0])

        # Each suite hands over to the next one unless fail-fast stops the run
        for (name, _), (following, _) in zip(SUITES, SUITES[1:]):
            workflow.add_conditional_edges(
                name,
                should_continue_verification,
                {"continue": following, "report": "report"},
            )
        workflow.add_edge(SUITES[-1][0], "report")
        workflow.add_edge("report", END)

        self.workflow = workflow
        self.app = workflow.compile()

        app_logger.debug("Verification workflow built")

    def run(
        self,
        seed: int = 0,
        trials: int = 100,
        fail_fast: bool = False,
        threads: Optional[int] = None,
        opts: Optional[OptimizerOptions] = None,
    ) -> VerifyState:
        """Run all suites and return the final state"""
        initial_state = VerifyState(
            seed=seed,
            trials=trials,
            fail_fast=fail_fast,
            threads=threads,
            opts=opts if opts is not None else OptimizerOptions.from_settings(seed=seed),
            execution_log=[f"verification started: seed={seed} trials={trials}"],
        )

        try:
            final_state = self.app.invoke(initial_state)
        except Exception as e:
            app_logger.error(f"Verification workflow failed: {e}")
            return initial_state.model_copy(
                update={
                    "results": [SuiteResult(name="workflow", passed=False, error=str(e))],
                    "execution_log": initial_state.execution_log + [f"workflow failed: {e}"],
                }
            )

        if isinstance(final_state, dict):
            final_state = VerifyState.model_validate(final_state)
        return final_state


# Global workflow instance
verification_workflow = VerificationWorkflow()
