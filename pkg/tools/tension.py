"""
The alpha functional, its epsilon relaxation and the s1=0 tension slice

alpha(U;V) = min over Q-U-V of I(U;Q|V) + I(U;V|Q). The minimum is searched by
multistart projected gradient descent on the rows of p(q|u), started from the
constant-Q coupling, the Q=U copy and Dirichlet draws. Returned values are the
best values found, hence upper bounds on the true minima.
"""
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from core.concurrency import task_rng
from core.exceptions import DistributionError
from core.logging import app_logger
from core.models import (
    Channel,
    Coupling,
    JointDist,
    OptimizerDiagnostics,
    OptimizerOptions,
    ProbVector,
    SlicePoint,
    TensionPoint,
)
from tools.information import (
    compose_joint,
    conditional_entropy,
    entropy_bits,
    extend_with_coupling,
    information_terms,
    joint_entropy,
    mutual_information,
)
from tools.simplex import dirichlet_rows, project_rows

LOG_FLOOR = 1e-30
MIN_STEP = 1e-12
MAX_STEP = 16.0
BISECTION_STEPS = 30

# Random-stream tag separating epsilon-search draws from the Markov restarts
EPSILON_STREAM = 1


class Candidate(NamedTuple):
    """A coupling visited by a search together with its tension coordinates"""
    value: float
    s2: float
    s3: float
    coupling: np.ndarray
    s1: float = 0.0


class SearchOutcome(NamedTuple):
    best: Candidate
    candidates: List[Candidate]
    diagnostics: OptimizerDiagnostics


def default_qcard(u_card: int, v_card: int) -> int:
    """Cardinality bound |Q| <= |U||V| + 2"""
    return u_card * v_card + 2


def resolve_qcard(qcard: Optional[int], u_card: int, v_card: int) -> int:
    cap = default_qcard(u_card, v_card)
    if qcard is None:
        return cap
    if not 1 <= qcard <= cap:
        raise DistributionError(f"qcard must lie in [1, {cap}], got {qcard}")
    return qcard


def _options(opts: Optional[OptimizerOptions]) -> OptimizerOptions:
    return opts if opts is not None else OptimizerOptions.from_settings()


def _log2_floor(array: np.ndarray) -> np.ndarray:
    return np.log2(np.maximum(array, LOG_FLOOR))


class CouplingSearch:
    """Minimize w2*I(U;Q|V) + w3*I(U;V|Q) over Markov couplings p(q|u) of a fixed p(u,v)"""

    def __init__(
        self,
        joint: JointDist,
        qcard: int,
        opts: OptimizerOptions,
        weights: Tuple[float, float] = (1.0, 1.0),
    ):
        self.joint = joint.matrix
        self.u_card = joint.u_card
        self.p_u = self.joint.sum(axis=1)
        self.qcard = qcard
        self.opts = opts
        self.w2, self.w3 = weights
        self.h_uv = entropy_bits(self.joint)
        self.h_v = entropy_bits(self.joint.sum(axis=0))
        self.mutual = mutual_information(joint)
        self.equivocation = conditional_entropy(joint)
        self.evaluations = 0

    def score(self, s2: float, s3: float) -> float:
        return self.w2 * s2 + self.w3 * s3

    def terms(self, coupling: np.ndarray) -> Tuple[float, float]:
        self.evaluations += 1
        tensor = self.joint[:, :, None] * coupling[:, None, :]
        p_uq = tensor.sum(axis=1)
        h_uvq = entropy_bits(tensor)
        h_vq = entropy_bits(tensor.sum(axis=0))
        s2 = self.h_uv + h_vq - h_uvq - self.h_v
        s3 = entropy_bits(p_uq) + h_vq - h_uvq - entropy_bits(p_uq.sum(axis=0))
        return max(0.0, s2), max(0.0, s3)

    def gradient(self, coupling: np.ndarray) -> np.ndarray:
        # row-constant terms are dropped; projection onto the row simplex ignores them
        cross = self.joint @ _log2_floor(self.joint.T @ coupling)
        weighted_log_c = self.p_u[:, None] * _log2_floor(coupling)
        weighted_log_q = self.p_u[:, None] * _log2_floor(self.p_u @ coupling)[None, :]
        grad_s2 = weighted_log_c - cross
        grad_s3 = weighted_log_q - cross
        return self.w2 * grad_s2 + self.w3 * grad_s3

    def candidate(self, coupling: np.ndarray) -> Candidate:
        s2, s3 = self.terms(coupling)
        return Candidate(self.score(s2, s3), s2, s3, coupling)

    def seeds(self) -> List[Candidate]:
        """Constant Q scores (0, I(U;V)); the copy Q=U scores (H(U|V), 0)"""
        seeds = [
            Candidate(
                self.score(0.0, self.mutual), 0.0, self.mutual,
                np.array(Coupling.constant(self.u_card, self.qcard).matrix),
            )
        ]
        if self.qcard >= self.u_card:
            seeds.append(
                Candidate(
                    self.score(self.equivocation, 0.0), self.equivocation, 0.0,
                    np.array(Coupling.copy_of_source(self.u_card, self.qcard).matrix),
                )
            )
        return seeds

    def descend(self, start: Candidate) -> Tuple[Candidate, int, bool]:
        """Projected gradient with step halving; stops once a step gains less than tol"""
        current = start
        step = 1.0
        for iteration in range(1, self.opts.max_iters + 1):
            direction = self.gradient(current.coupling)
            trial = None
            while step >= MIN_STEP:
                proposal = self.candidate(project_rows(current.coupling - step * direction))
                if proposal.value < current.value:
                    trial = proposal
                    break
                step /= 2.0
            if trial is None:
                return current, iteration, True
            gain = current.value - trial.value
            current = trial
            step = min(step * 2.0, MAX_STEP)
            if gain < self.opts.tol:
                return current, iteration, True
        return current, self.opts.max_iters, False

    def starts(self) -> List[Candidate]:
        starts = self.seeds()
        for restart in range(max(self.opts.restarts - len(starts), 0)):
            rng = task_rng(self.opts.seed, restart)
            starts.append(self.candidate(dirichlet_rows(rng, self.u_card, self.qcard)))
        return starts

    def run(self) -> SearchOutcome:
        finals = []
        iterations = 0
        converged = True
        for start in self.starts():
            final, used, done = self.descend(start)
            finals.append(final)
            iterations += used
            converged = converged and done
            if not done:
                app_logger.warning(f"Coupling search hit max_iters={self.opts.max_iters} at value {final.value:.9f}")

        best = finals[0]
        for final in finals[1:]:
            if final.value < best.value:
                best = final

        diagnostics = OptimizerDiagnostics(
            restarts=len(finals), iterations=iterations, evaluations=self.evaluations, converged=converged
        )
        app_logger.debug(
            f"Coupling search |U|={self.u_card} qcard={self.qcard} weights=({self.w2:.3f},{self.w3:.3f}) "
            f"best={best.value:.9f} restarts={len(finals)} iterations={iterations}"
        )
        return SearchOutcome(best, finals, diagnostics)


def _degenerate(joint: JointDist) -> bool:
    return joint.u_card == 1 or joint.v_card == 1


def search_alpha(
    j: JointDist,
    qcard: Optional[int] = None,
    opts: Optional[OptimizerOptions] = None,
    weights: Tuple[float, float] = (1.0, 1.0),
) -> SearchOutcome:
    """Full multistart search; alphabets of size 1 short-circuit to the constant coupling"""
    qcard = resolve_qcard(qcard, j.u_card, j.v_card)
    opts = _options(opts)
    if _degenerate(j):
        constant = np.array(Coupling.constant(j.u_card, qcard).matrix)
        best = Candidate(0.0, 0.0, 0.0, constant)
        return SearchOutcome(best, [best], OptimizerDiagnostics())
    return CouplingSearch(j, qcard, opts, weights).run()


# Operations


def objective_f(px: ProbVector, ch: Channel, c: Coupling) -> float:
    """I(X;Q|Y) + I(X;Y|Q) on p(x) p(q|x) p(y|x)"""
    if c.source_card != ch.input_card:
        raise DistributionError(f"coupling has {c.source_card} rows, channel has {ch.input_card} inputs")
    _, s2, s3 = information_terms(extend_with_coupling((px, ch), c).tensor)
    return s2 + s3


def objective_decomposition(px: ProbVector, ch: Channel, c: Coupling) -> float:
    """H(Q|Y) - H(Q|X) + H(Y|Q) - H(Y|X), equal to objective_f under Q-X-Y"""
    j3 = extend_with_coupling((px, ch), c)
    h_x, h_y, h_q = (joint_entropy(j3, name) for name in "uvq")
    h_xy, h_xq, h_yq = (joint_entropy(j3, pair) for pair in ("uv", "uq", "vq"))
    return (h_yq - h_y) - (h_xq - h_x) + (h_yq - h_q) - (h_xy - h_x)


def alpha_joint(
    j: JointDist, qcard: Optional[int] = None, opts: Optional[OptimizerOptions] = None
) -> Tuple[float, Coupling]:
    """alpha(U;V) and the best coupling p(q|u) found"""
    outcome = search_alpha(j, qcard, opts)
    return outcome.best.value, Coupling(matrix=outcome.best.coupling)


def alpha_inner(
    px: ProbVector, ch: Channel, qcard: Optional[int] = None, opts: Optional[OptimizerOptions] = None
) -> Tuple[float, Coupling]:
    """alpha(X;Y) for the input distribution px through the channel"""
    return alpha_joint(compose_joint(px, ch), qcard, opts)


class EpsilonSearch:
    """alpha objective over general couplings p(q|u,v) subject to I(Q;V|U) <= eps"""

    def __init__(self, joint: JointDist, qcard: int, opts: OptimizerOptions):
        self.joint = joint.matrix
        self.u_card, self.v_card = joint.u_card, joint.v_card
        self.weights = self.joint.reshape(-1)
        self.qcard = qcard
        self.opts = opts
        self.key_equivocation = conditional_entropy(joint.transpose())

    def lift(self, coupling: np.ndarray) -> np.ndarray:
        """Markov coupling p(q|u) as a row per (u,v)"""
        return np.repeat(coupling, self.v_card, axis=0)

    def candidate(self, general: np.ndarray) -> Candidate:
        tensor = (self.weights[:, None] * general).reshape(self.u_card, self.v_card, self.qcard)
        s1, s2, s3 = information_terms(tensor)
        return Candidate(s2 + s3, s2, s3, general, s1)

    def gradient(self, general: np.ndarray) -> np.ndarray:
        tensor = (self.weights[:, None] * general).reshape(self.u_card, self.v_card, self.qcard)
        p_vq = tensor.sum(axis=0)
        p_uq = tensor.sum(axis=1)
        log_d = _log2_floor(general).reshape(tensor.shape)
        slope = (
            2.0 * log_d
            - 2.0 * _log2_floor(p_vq)[None, :, :]
            - _log2_floor(p_uq)[:, None, :]
            + _log2_floor(p_uq.sum(axis=0))[None, None, :]
        )
        return (self.joint[:, :, None] * slope).reshape(-1, self.qcard)

    def copy_candidates(self) -> List[Candidate]:
        """Q=V and Q=(U,V): both score 0 with I(Q;V|U) = H(V|U)"""
        rows = self.u_card * self.v_card
        copies = []
        if self.qcard >= self.v_card:
            general = np.zeros((rows, self.qcard))
            general[np.arange(rows), np.tile(np.arange(self.v_card), self.u_card)] = 1.0
            copies.append(Candidate(0.0, 0.0, 0.0, general, self.key_equivocation))
        if self.qcard >= rows:
            general = np.zeros((rows, self.qcard))
            general[np.arange(rows), np.arange(rows)] = 1.0
            copies.append(Candidate(0.0, 0.0, 0.0, general, self.key_equivocation))
        return copies

    def toward(self, anchor: np.ndarray, target: np.ndarray, eps: float) -> Candidate:
        """Furthest feasible point on the segment from a feasible anchor to target"""
        end = self.candidate(target)
        if end.s1 <= eps:
            return end
        low, high = 0.0, 1.0
        best = self.candidate(anchor)
        for _ in range(BISECTION_STEPS):
            middle = (low + high) / 2.0
            point = self.candidate((1.0 - middle) * anchor + middle * target)
            if point.s1 <= eps:
                low, best = middle, point
            else:
                high = middle
        return best

    def descend(self, start: Candidate, eps: float) -> Candidate:
        current = start
        step = 1.0
        for _ in range(self.opts.max_iters):
            direction = self.gradient(current.coupling)
            trial = None
            while step >= MIN_STEP:
                proposal = self.candidate(project_rows(current.coupling - step * direction))
                if proposal.s1 <= eps and proposal.value < current.value:
                    trial = proposal
                    break
                step /= 2.0
            if trial is None:
                return current
            gain = current.value - trial.value
            current = trial
            step = min(step * 2.0, MAX_STEP)
            if gain < self.opts.tol:
                break
        return current

    def run(self, eps: float, anchor: np.ndarray, stream: int) -> List[Candidate]:
        """Feasible candidates visited at this eps (starting points and local minima)"""
        targets = [copy.coupling for copy in self.copy_candidates()]
        for restart in range(self.opts.restarts):
            rng = task_rng(self.opts.seed, EPSILON_STREAM, stream, restart)
            targets.append(dirichlet_rows(rng, self.u_card * self.v_card, self.qcard))

        visited = []
        for target in targets:
            start = self.toward(anchor, target, eps)
            visited.append(start)
            visited.append(self.descend(start, eps))
        return [candidate for candidate in visited if candidate.s1 <= eps]


def alpha_epsilon_path(
    j: JointDist,
    eps_values: Sequence[float],
    qcard: Optional[int] = None,
    opts: Optional[OptimizerOptions] = None,
) -> List[float]:
    """
    alpha_eps(U;V) for every eps in eps_values, computed from one candidate pool.

    Every candidate found at any eps is kept, and each eps takes the minimum
    over the candidates satisfying I(Q;V|U) <= eps, so the values are
    non-increasing in eps. eps = 0 is the Markov search, i.e. alpha(U;V).
    """
    eps_values = [float(eps) for eps in eps_values]
    if any(eps < 0 for eps in eps_values):
        raise DistributionError(f"eps must be nonnegative, got {eps_values}")
    qcard = resolve_qcard(qcard, j.u_card, j.v_card)
    opts = _options(opts)
    if _degenerate(j):
        return [0.0 for _ in eps_values]

    markov = search_alpha(j, qcard, opts)
    search = EpsilonSearch(j, qcard, opts)
    pool = [
        Candidate(c.value, c.s2, c.s3, search.lift(c.coupling), 0.0) for c in markov.candidates
    ]
    pool.extend(search.copy_candidates())

    anchor = search.lift(markov.best.coupling)
    for stream, eps in enumerate(sorted({eps for eps in eps_values if eps > 0})):
        pool.extend(search.run(eps, anchor, stream))

    values = []
    for eps in eps_values:
        if eps == 0:
            values.append(markov.best.value)
        else:
            values.append(min(c.value for c in pool if c.s1 <= eps))
    app_logger.debug(f"alpha_eps over {len(eps_values)} eps values from a pool of {len(pool)} candidates")
    return values


def alpha_epsilon(
    j: JointDist, eps: float, qcard: Optional[int] = None, opts: Optional[OptimizerOptions] = None
) -> float:
    """min of I(U;Q|V) + I(U;V|Q) over Q with I(Q;V|U) <= eps"""
    return alpha_epsilon_path(j, [eps], qcard, opts)[0]


def tension_slice(
    j: JointDist, num_points: int, qcard: Optional[int] = None, opts: Optional[OptimizerOptions] = None
) -> List[SlicePoint]:
    """
    Lower-left frontier of {(I(U;Q|V), I(U;V|Q)) : Q-U-V}.

    Each weight lambda picks, from the pooled candidates of all weighted
    searches, the point minimizing lambda*s2 + (1-lambda)*s3 (ties go to the
    smaller s2+s3). Picked points are vertices of the pool's lower hull, so
    the frontier is convex and non-increasing. Sorted by s2.
    """
    if num_points < 2:
        raise DistributionError(f"num_points must be at least 2, got {num_points}")
    weights = np.linspace(0.0, 1.0, num_points)

    pool: List[Candidate] = []
    for weight in weights:
        pool.extend(search_alpha(j, qcard, opts, weights=(float(weight), 1.0 - float(weight))).candidates)

    points = []
    for weight in weights:
        best = min(pool, key=lambda c: (weight * c.s2 + (1.0 - weight) * c.s3, c.s2 + c.s3))
        points.append(SlicePoint(weight=float(weight), point=TensionPoint(s2=best.s2, s3=best.s3)))
    return sorted(points, key=lambda p: (p.point.s2, -p.point.s3))
