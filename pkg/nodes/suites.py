"""
Verification suite nodes for the LangGraph workflow

Each node runs one suite over seeded trials and returns a state update with
its SuiteResult. Exceptions are caught per suite so the graph always reaches
the report node.
"""
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from core.concurrency import parallel_map
from core.config import settings
from core.logging import app_logger
from core.models import ChannelKind, SuiteResult, VerifyState
from tools.channel import standard_channel
from tools.information import entropy, conditional_entropy, mutual_information
from tools.tension import alpha_epsilon_path, alpha_joint
from tools.verify import (
    concavity_trial,
    coupling_concavity_trial,
    decomposition_trial,
    initial_views_joint,
    lemma1_trial,
    lemma4_trial,
    oracle_trial,
    ot_correlation,
)

IDENTITY_TOL = 1e-10
DECOMPOSITION_TOL = 1e-12
LEMMA4_TOL = 1e-9
TERM_GAP_TOL = 1e-9
LEMMA1_SLACK = 1e-2
ORACLE_TOL = 5e-3
MONOTONE_TOL = 1e-12
EXACT_CONCAVITY_TOL = 1e-10
ALPHA_CONCAVITY_TOL = 5e-3

DECOMPOSITION_CASES = 1000
CONCAVITY_PAIRS = 20
EPSILON_GRID = [0.0, 1e-4, 1e-3, 1e-2, 0.05, 0.1]


def reproduction(seed: int, index: int) -> str:
    return f"seed={seed} index={index}"


def _first_failure(seed: int, residuals: List[float], failed: Callable[[float], bool]) -> Optional[str]:
    for index, residual in enumerate(residuals):
        if failed(residual):
            return reproduction(seed, index)
    return None


def _run_suite(name: str, state: VerifyState, body: Callable[[VerifyState], SuiteResult]) -> Dict[str, Any]:
    app_logger.info(f"Running verification suite '{name}' (seed={state.seed})")
    try:
        result = body(state)
    except Exception as e:
        app_logger.error(f"Suite '{name}' raised: {e}")
        result = SuiteResult(name=name, passed=False, error=str(e))

    verdict = "passed" if result.passed else "FAILED"
    app_logger.info(f"Suite '{name}' {verdict}: {result.trials} trials, worst residual {result.worst_residual:.3e}")
    return {"results": [result], "execution_log": [f"{name}: {verdict}"]}


def _identities(state: VerifyState) -> SuiteResult:
    residuals = []
    notes = []
    for m in (1, 2, 3):
        joint = ot_correlation(m).joint
        residuals.extend([
            entropy(joint.row_marginal()) - 2 * m,
            conditional_entropy(joint.transpose()) - 1.0,
            mutual_information(joint) - m,
        ])
    views, _ = alpha_joint(initial_views_joint(1), opts=state.opts)
    residuals.append(views)
    notes.append(f"alpha of the initial views (S0S1;K) = {views:.3e}")
    worst_identity = max(abs(r) for r in residuals)

    cases = min(state.trials, DECOMPOSITION_CASES)
    gaps = parallel_map(lambda index: decomposition_trial(state.seed, index), range(cases), state.threads)
    worst_gap = max(gaps)
    notes.append(f"worst decomposition gap {worst_gap:.3e} over {cases} triples")

    failure = None
    if worst_identity > IDENTITY_TOL:
        failure = "OT correlation entropies or initial-view alpha off target"
    elif worst_gap > DECOMPOSITION_TOL:
        failure = _first_failure(state.seed, gaps, lambda gap: gap > DECOMPOSITION_TOL)
    return SuiteResult(
        name="identities",
        trials=cases,
        worst_residual=max(worst_identity, worst_gap),
        passed=failure is None,
        failure=failure,
        residuals=gaps,
        notes=notes,
    )


def _lemma4(state: VerifyState) -> SuiteResult:
    outcomes = parallel_map(lambda index: lemma4_trial(state.seed, index), range(state.trials), state.threads)
    residuals = [min(residual, appendix) for residual, appendix, _ in outcomes]
    worst_gap = max(gap for _, _, gap in outcomes)
    failure = _first_failure(state.seed, residuals, lambda r: r < -LEMMA4_TOL)
    if failure is None and worst_gap > LEMMA4_TOL:
        failure = _first_failure(state.seed, [gap for _, _, gap in outcomes], lambda gap: gap > LEMMA4_TOL)
    return SuiteResult(
        name="lemma4",
        trials=state.trials,
        worst_residual=min(residuals),
        passed=failure is None,
        failure=failure,
        residuals=residuals,
        notes=[f"worst decomposition gap {worst_gap:.3e}"],
    )


def _lemma1(state: VerifyState) -> SuiteResult:
    cases = min(state.trials, settings.lemma1_cases)
    resolution = settings.lemma1_resolution
    outcomes = parallel_map(
        lambda index: lemma1_trial(state.seed, index, resolution, LEMMA1_SLACK), range(cases), state.threads
    )
    residuals = [outcome.lhs - outcome.rhs for outcome in outcomes]
    failure = None
    for index, outcome in enumerate(outcomes):
        if not outcome.passed or max(outcome.key_term_gap, outcome.dependence_term_gap) > TERM_GAP_TOL:
            failure = reproduction(state.seed, index)
            break
    return SuiteResult(
        name="lemma1",
        trials=cases,
        worst_residual=max(residuals),
        passed=failure is None,
        failure=failure,
        residuals=residuals,
        notes=[
            f"median lhs - rhs {float(np.median(residuals)):.3e} at lattice resolution {resolution}",
            f"grid side chosen in {sum(o.grid_lhs < o.construction_lhs for o in outcomes)} of {cases} cases",
        ],
    )


def _oracle(state: VerifyState) -> SuiteResult:
    cases = min(state.trials, settings.oracle_cases)
    resolution = settings.oracle_resolution
    residuals = parallel_map(
        lambda index: oracle_trial(state.seed, index, resolution, state.opts), range(cases), state.threads
    )
    failure = _first_failure(state.seed, residuals, lambda r: r > ORACLE_TOL)
    return SuiteResult(
        name="oracle",
        trials=cases,
        worst_residual=max(residuals),
        passed=failure is None,
        failure=failure,
        residuals=residuals,
    )


def _epsilon(state: VerifyState) -> SuiteResult:
    joint = ot_correlation(1).joint
    values = alpha_epsilon_path(joint, EPSILON_GRID, opts=state.opts)
    increases = [later - earlier for earlier, later in zip(values, values[1:])]
    worst = max(increases)
    failure = None
    if worst > MONOTONE_TOL:
        failure = f"alpha_eps increases between eps={EPSILON_GRID[increases.index(worst)]}" \
                  f" and eps={EPSILON_GRID[increases.index(worst) + 1]}"
    return SuiteResult(
        name="epsilon",
        trials=len(EPSILON_GRID),
        worst_residual=worst,
        passed=failure is None,
        failure=failure,
        residuals=increases,
        notes=[", ".join(f"eps={eps:g}: {value:.6f}" for eps, value in zip(EPSILON_GRID, values))],
    )


def _concavity(state: VerifyState) -> SuiteResult:
    ch = standard_channel(ChannelKind.ZCHANNEL, 0.5)
    exact = parallel_map(lambda index: coupling_concavity_trial(state.seed, index, ch), range(state.trials), state.threads)
    pairs = min(state.trials, CONCAVITY_PAIRS)
    soft = parallel_map(lambda index: concavity_trial(state.seed, index, ch, state.opts), range(pairs), state.threads)

    failure = _first_failure(state.seed, exact, lambda gap: gap < -EXACT_CONCAVITY_TOL)
    if failure is None:
        failure = _first_failure(state.seed, soft, lambda gap: gap < -ALPHA_CONCAVITY_TOL)
    return SuiteResult(
        name="concavity",
        trials=state.trials + pairs,
        worst_residual=min(exact + soft),
        passed=failure is None,
        failure=failure,
        residuals=soft,
        notes=[f"worst fixed-coupling gap {min(exact):.3e}, worst alpha gap {min(soft):.3e}"],
    )


# Graph nodes


def identities_node(state: VerifyState) -> Dict[str, Any]:
    """OT correlation entropies, initial-view alpha and the objective decomposition"""
    return _run_suite("identities", state, _identities)


def lemma4_node(state: VerifyState) -> Dict[str, Any]:
    """Random couplings never push the OT objective below m"""
    return _run_suite("lemma4", state, _lemma4)


def lemma1_node(state: VerifyState) -> Dict[str, Any]:
    return _run_suite("lemma1", state, _lemma1)


def oracle_node(state: VerifyState) -> Dict[str, Any]:
    return _run_suite("oracle", state, _oracle)


def epsilon_node(state: VerifyState) -> Dict[str, Any]:
    return _run_suite("epsilon", state, _epsilon)


def concavity_node(state: VerifyState) -> Dict[str, Any]:
    return _run_suite("concavity", state, _concavity)
