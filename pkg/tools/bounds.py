"""
Channel-level bounds on the OT capacity

new_upper_bound   max_p min_Q I(X;Q|Y) + I(X;Y|Q)
ac13_bound        max_p min(I(X;Y), H(X|Y))
zchannel_restricted_bound
                  the new bound for the Z-channel with binary Q and p(q=0|x=1)=0
erasure_lower_bound_z
                  min(1-t, t)/2, from two Z-channel uses acting as one erasure channel
"""
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from core.concurrency import derive_seed, parallel_map
from core.exceptions import DistributionError
from core.logging import app_logger
from core.models import (
    BoundResult,
    Channel,
    ChannelKind,
    Coupling,
    JointDist,
    OptimizerDiagnostics,
    OptimizerOptions,
    ProbVector,
    SweepRow,
)
from tools.channel import drop_unreachable_outputs, product_channel, restrict_inputs, standard_channel
from tools.information import (
    batch_information_terms,
    compose_joint,
    conditional_entropy,
    information_terms,
    mutual_information,
)
from tools.simplex import lattice_points, project_rows
from tools.tension import search_alpha

# Bracket width of the one-dimensional searches over p(x)
XATOL = 1e-6
# Dense one-dimensional grid for the AC13 objective (no concavity assumed)
AC13_BINARY_GRID = 1024
# Scan over the coupling parameter a of the restricted Z-channel family
FAMILY_SCAN = 256
# Coarse grid over p(x) before the bounded refinement of the restricted bound
RESTRICTED_OUTER_GRID = 32
# Nelder-Mead evaluation cap per free coordinate
POLISH_EVALS = 60

Payload = Tuple[Optional[Coupling], OptimizerDiagnostics]


class InputEvaluations:
    """Memo of objective evaluations keyed by the input distribution"""

    def __init__(self, evaluate: Callable[[ProbVector], Tuple[float, Payload]], threads: Optional[int] = None):
        self.evaluate = evaluate
        self.threads = threads
        self.records: Dict[Tuple[float, ...], Tuple[float, ProbVector, Payload]] = {}

    def __call__(self, px: ProbVector) -> float:
        key = tuple(px.probs.tolist())
        if key not in self.records:
            value, payload = self.evaluate(px)
            self.records[key] = (value, px, payload)
        return self.records[key][0]

    def evaluate_many(self, inputs: Sequence[ProbVector]) -> None:
        pending = [px for px in inputs if tuple(px.probs.tolist()) not in self.records]
        for px, (value, payload) in zip(pending, parallel_map(self.evaluate, pending, self.threads)):
            self.records[tuple(px.probs.tolist())] = (value, px, payload)

    def best(self) -> Tuple[float, ProbVector, Payload]:
        """Largest value; ties go to the lexicographically smallest p(x)"""
        key = min(self.records, key=lambda k: (-self.records[k][0], k))
        return self.records[key]

    def diagnostics(self) -> OptimizerDiagnostics:
        total = OptimizerDiagnostics()
        for _, _, (_, diagnostics) in self.records.values():
            total = total.combine(diagnostics)
        return total

    def result(self) -> BoundResult:
        value, px, (coupling, _) = self.best()
        return BoundResult(value=value, arg_px=px, arg_coupling=coupling, diagnostics=self.diagnostics())


def binary_input(p: float) -> ProbVector:
    """p(x) = (p, 1-p)"""
    p = float(min(max(p, 0.0), 1.0))
    return ProbVector(probs=[p, 1.0 - p])


def simplex_input(head: np.ndarray) -> ProbVector:
    """All but the last coordinate given; projected back onto the simplex"""
    full = np.append(np.asarray(head, dtype=float), 1.0 - float(np.sum(head)))
    return ProbVector(probs=project_rows(full[None, :])[0])


def _refine_binary(evaluations: InputEvaluations, low: float, high: float) -> None:
    result = minimize_scalar(
        lambda p: -evaluations(binary_input(p)),
        bounds=(max(low, 0.0), min(high, 1.0)),
        method="bounded",
        options={"xatol": XATOL},
    )
    evaluations(binary_input(result.x))


def _polish_simplex(evaluations: InputEvaluations, start: ProbVector, opts: OptimizerOptions) -> None:
    free = start.size - 1
    minimize(
        lambda head: -evaluations(simplex_input(head)),
        start.probs[:-1],
        method="Nelder-Mead",
        options={"xatol": XATOL, "fatol": opts.tol, "maxfev": POLISH_EVALS * free},
    )


def _check_t(t: float) -> float:
    if not 0.0 <= t <= 1.0:
        raise DistributionError(f"t must lie in [0, 1], got {t}")
    return float(t)


def _options(opts: Optional[OptimizerOptions]) -> OptimizerOptions:
    return opts if opts is not None else OptimizerOptions.from_settings()


def ac13_objective(px: ProbVector, ch: Channel) -> float:
    """min(I(X;Y), H(X|Y))"""
    joint = compose_joint(px, ch)
    return min(mutual_information(joint), conditional_entropy(joint))


# Operations


def new_upper_bound(
    ch: Channel,
    opts: Optional[OptimizerOptions] = None,
    qcard: Optional[int] = None,
    threads: Optional[int] = None,
) -> BoundResult:
    """
    max over p(x) of alpha(X;Y).

    alpha is concave in p(x), so binary inputs use a bounded Brent search on
    p(x=0); larger inputs take the best simplex-lattice point and polish it
    with Nelder-Mead.
    """
    opts = _options(opts)

    def evaluate(px: ProbVector) -> Tuple[float, Payload]:
        outcome = search_alpha(compose_joint(px, ch), qcard, opts)
        return outcome.best.value, (Coupling(matrix=outcome.best.coupling), outcome.diagnostics)

    evaluations = InputEvaluations(evaluate, threads)
    if ch.input_card == 1:
        evaluations(ProbVector(probs=[1.0]))
    elif ch.input_card == 2:
        for p in (0.0, 0.5, 1.0):
            evaluations(binary_input(p))
        _refine_binary(evaluations, 0.0, 1.0)
    else:
        grid = [ProbVector(probs=point) for point in lattice_points(ch.input_card, opts.grid_resolution)]
        evaluations.evaluate_many(grid)
        _polish_simplex(evaluations, evaluations.best()[1], opts)

    result = evaluations.result()
    app_logger.info(
        f"New upper bound {result.value:.9f} bits/use at p(x)={np.round(result.arg_px.probs, 6).tolist()} "
        f"after {len(evaluations.records)} input evaluations"
    )
    return result


def ac13_bound(
    ch: Channel,
    opts: Optional[OptimizerOptions] = None,
    extra_candidates: Sequence[ProbVector] = (),
    threads: Optional[int] = None,
) -> BoundResult:
    """
    max over p(x) of min(I(X;Y), H(X|Y)) by dense grid plus local refinement.

    extra_candidates are evaluated alongside the grid; passing the maximizer
    of another bound keeps that bound's value below this one.
    """
    opts = _options(opts)
    evaluations = InputEvaluations(lambda px: (ac13_objective(px, ch), (None, OptimizerDiagnostics())), threads)

    if ch.input_card == 1:
        evaluations(ProbVector(probs=[1.0]))
    elif ch.input_card == 2:
        for p in np.linspace(0.0, 1.0, AC13_BINARY_GRID + 1):
            evaluations(binary_input(p))
        p_best = float(evaluations.best()[1].probs[0])
        _refine_binary(evaluations, p_best - 1.0 / AC13_BINARY_GRID, p_best + 1.0 / AC13_BINARY_GRID)
    else:
        grid = [ProbVector(probs=point) for point in lattice_points(ch.input_card, opts.grid_resolution)]
        evaluations.evaluate_many(grid)
        _polish_simplex(evaluations, evaluations.best()[1], opts)

    for px in extra_candidates:
        if px.size != ch.input_card:
            raise DistributionError(f"candidate input has {px.size} symbols, channel has {ch.input_card} inputs")
        evaluations(px)

    value, px, _ = evaluations.best()
    app_logger.info(f"AC13 bound {value:.9f} bits/use at p(x)={np.round(px.probs, 6).tolist()}")
    return BoundResult(
        value=value,
        arg_px=px,
        diagnostics=OptimizerDiagnostics(evaluations=len(evaluations.records)),
    )


def restricted_coupling(a: float) -> Coupling:
    """Binary Q with p(q=0|x=0)=a and p(q=0|x=1)=0"""
    a = float(min(max(a, 0.0), 1.0))
    return Coupling(matrix=[[a, 1.0 - a], [0.0, 1.0]])


class RestrictedFamily:
    """Inner minimization of the new bound's objective over the restricted Z-channel couplings"""

    def __init__(self, ch: Channel):
        self.ch = ch
        self.scan = np.linspace(0.0, 1.0, FAMILY_SCAN + 1)
        self.evaluations = 0

    def value(self, joint: np.ndarray, a: float) -> float:
        self.evaluations += 1
        coupling = restricted_coupling(a).matrix
        _, s2, s3 = information_terms(joint[:, :, None] * coupling[:, None, :])
        return s2 + s3

    def minimize(self, px: ProbVector) -> Tuple[float, Payload]:
        joint = compose_joint(px, self.ch)
        # a=0 is a constant Q and a=1 the copy Q=X
        candidates = [(mutual_information(joint), 0.0), (conditional_entropy(joint), 1.0)]

        interior = self.scan[1:-1]
        couplings = np.zeros((interior.size, 2, 2))
        couplings[:, 0, 0] = interior
        couplings[:, 0, 1] = 1.0 - interior
        couplings[:, 1, 1] = 1.0
        tensors = joint.matrix[None, :, :, None] * couplings[:, :, None, :]
        _, s2, s3 = batch_information_terms(tensors)
        values = s2 + s3
        self.evaluations += interior.size
        index = int(np.argmin(values))
        candidates.append((float(values[index]), float(interior[index])))

        centre = float(interior[index])
        refined = minimize_scalar(
            lambda a: self.value(joint.matrix, a),
            bounds=(max(centre - 1.0 / FAMILY_SCAN, 0.0), min(centre + 1.0 / FAMILY_SCAN, 1.0)),
            method="bounded",
            options={"xatol": XATOL},
        )
        a_refined = float(min(max(refined.x, 0.0), 1.0))
        candidates.append((self.value(joint.matrix, a_refined), a_refined))

        value, a = min(candidates, key=lambda pair: pair[0])
        return value, (restricted_coupling(a), OptimizerDiagnostics(evaluations=self.evaluations))


def zchannel_restricted_bound(t: float, opts: Optional[OptimizerOptions] = None) -> BoundResult:
    """New bound for zchannel(t) with binary Q and p(q=0|x=1)=0"""
    t = _check_t(t)
    family = RestrictedFamily(standard_channel(ChannelKind.ZCHANNEL, t))
    evaluations = InputEvaluations(family.minimize)

    # a minimum of functions concave in p(x) is concave; the coarse grid only guards the bracket
    for p in np.linspace(0.0, 1.0, RESTRICTED_OUTER_GRID + 1):
        evaluations(binary_input(p))
    _refine_binary(evaluations, 0.0, 1.0)

    value, px, (coupling, _) = evaluations.best()
    app_logger.debug(f"Restricted Z-channel bound t={t:.6f}: {value:.9f} at p(x=0)={px.probs[0]:.6f}")
    return BoundResult(
        value=value,
        arg_px=px,
        arg_coupling=coupling,
        diagnostics=OptimizerDiagnostics(evaluations=family.evaluations),
    )


def erasure_lower_bound_z(t: float) -> float:
    """min(1-t, t)/2: the erasure channel capacity over two Z-channel uses"""
    t = _check_t(t)
    return min(1.0 - t, t) / 2.0


def erasure_embedding_z(t: float) -> Channel:
    """
    Two Z-channel uses with inputs restricted to 01 and 10.

    Output 00 acts as the erasure, and for 0 < t < 1 the result equals bec(t)
    after relabeling outputs (00, 01, 10) -> (erasure, 0, 1).
    """
    z = standard_channel(ChannelKind.ZCHANNEL, _check_t(t))
    pair = product_channel(z, z)
    return drop_unreachable_outputs(restrict_inputs(pair, [0b01, 0b10]))


def source_model_bound(
    j: JointDist, opts: Optional[OptimizerOptions] = None, qcard: Optional[int] = None
) -> BoundResult:
    """alpha(X;Y) of a fixed source p(x,y); no outer maximization"""
    outcome = search_alpha(j, qcard, _options(opts))
    return BoundResult(
        value=outcome.best.value,
        arg_px=j.row_marginal(),
        arg_coupling=Coupling(matrix=outcome.best.coupling),
        diagnostics=outcome.diagnostics,
    )


def zchannel_sweep(
    t_values: Sequence[float],
    opts: Optional[OptimizerOptions] = None,
    full_search: bool = False,
    threads: Optional[int] = None,
    qcard: Optional[int] = None,
) -> List[SweepRow]:
    """All three Z-channel bounds per t, rows in input order; qcard applies to full_search"""
    opts = _options(opts)
    points = list(enumerate(float(t) for t in t_values))

    def sweep_point(point: Tuple[int, float]) -> SweepRow:
        index, t = point
        point_opts = opts.model_copy(update={"seed": derive_seed(opts.seed, index)})
        try:
            ch = standard_channel(ChannelKind.ZCHANNEL, _check_t(t))
            if full_search:
                new = new_upper_bound(ch, point_opts, qcard=qcard, threads=1)
            else:
                new = zchannel_restricted_bound(t, point_opts)
            ac13 = ac13_bound(ch, point_opts, extra_candidates=[new.arg_px], threads=1)
            return SweepRow(t=t, new_upper=new.value, ac13_upper=ac13.value, erasure_lower=erasure_lower_bound_z(t))
        except ValueError as e:
            app_logger.error(f"Sweep point t={t} failed: {e}")
            raise DistributionError(f"sweep point t={t}: {e}") from e

    rows = parallel_map(sweep_point, points, threads)
    app_logger.info(f"Z-channel sweep finished: {len(rows)} points, full_search={full_search}")
    return rows
