"""
Executable checks of the tension identities on small instances

The OT correlation, the alpha lower bound of the OT joint, the subadditivity
of alpha across one channel use, and a brute-force lattice oracle for alpha.
"""
from typing import Optional, Tuple

import numpy as np

from core.concurrency import task_rng
from core.config import settings
from core.exceptions import BudgetExceededError, DistributionError
from core.logging import app_logger
from core.models import (
    Channel,
    Coupling,
    JointDist,
    Lemma1Outcome,
    OptimizerOptions,
    OTCorrelation,
    ProbVector,
    SubadditivityCase,
)
from tools.information import (
    batch_information_terms,
    compose_joint,
    conditional_entropy_3,
    extend_with_coupling,
    information_terms,
    pushforward,
)
from tools.simplex import dirichlet_rows, iter_lattice_products
from tools.tension import alpha_inner, alpha_joint, objective_decomposition, objective_f, resolve_qcard

# Largest alphabet the subadditivity grid oracle accepts
LEMMA1_MAX_ALPHABET = 3


def ot_correlation(m: int) -> OTCorrelation:
    """
    Ideal joint of U=(S0,S1) and V=(K,S_K) for m-bit strings.

    U = s0 + 2^m s1 and V = k 2^m + s_k; every one of the 2 4^m reachable
    cells has mass 1/(2 4^m).
    """
    if not 1 <= m <= 3:
        raise DistributionError(f"string length m must lie in [1, 3], got {m}")
    size = 2 ** m
    matrix = np.zeros((size * size, 2 * size))
    mass = 1.0 / (2 * size * size)
    for s0 in range(size):
        for s1 in range(size):
            u = s0 + size * s1
            matrix[u, s0] += mass
            matrix[u, size + s1] += mass
    return OTCorrelation(m=m, joint=JointDist(matrix=matrix))


def initial_views_joint(m: int) -> JointDist:
    """Alice's strings (S0,S1) against Bob's choice bit K, independent and uniform"""
    if not 1 <= m <= 3:
        raise DistributionError(f"string length m must lie in [1, 3], got {m}")
    cells = 2 * 4 ** m
    return JointDist(matrix=np.full((4 ** m, 2), 1.0 / cells))


def _ot_extension(ot: OTCorrelation, c: Coupling):
    if c.source_card != ot.joint.u_card:
        raise DistributionError(f"coupling has {c.source_card} rows, OT correlation has {ot.joint.u_card} inputs")
    return extend_with_coupling(ot.joint, c)


def lemma4_residual(ot: OTCorrelation, c: Coupling) -> float:
    """I(U;V|Q) + I(U;Q|V) - m; never below zero for a Markov Q"""
    _, s2, s3 = information_terms(_ot_extension(ot, c).tensor)
    return s3 + s2 - ot.m


def lemma4_appendix_check(ot: OTCorrelation, c: Coupling) -> float:
    """2H(V|Q) - H(U|Q) - 2"""
    j3 = _ot_extension(ot, c)
    return 2.0 * conditional_entropy_3(j3, "v", "q") - conditional_entropy_3(j3, "u", "q") - 2.0


def lemma4_decomposition_gap(ot: OTCorrelation, c: Coupling) -> float:
    """|I(U;V|Q) + I(U;Q|V) - (2[H(V|Q) - H(V|U)] + [H(U|V) - H(U|Q)])|"""
    j3 = _ot_extension(ot, c)
    _, s2, s3 = information_terms(j3.tensor)
    decomposed = 2.0 * (conditional_entropy_3(j3, "v", "q") - conditional_entropy_3(j3, "v", "u")) + (
        conditional_entropy_3(j3, "u", "v") - conditional_entropy_3(j3, "u", "q")
    )
    return abs(s2 + s3 - decomposed)


def random_coupling(rng: np.random.Generator, source_card: int, qcard: int) -> Coupling:
    """Rows drawn from Dirichlet(1, ..., 1)"""
    return Coupling(matrix=dirichlet_rows(rng, source_card, qcard))


def brute_force_cost(u_card: int, qcard: int, resolution: int) -> int:
    """(resolution+1)^(|U|(qcard-1)) bounds the number of lattice couplings"""
    return (resolution + 1) ** (u_card * (qcard - 1))


def brute_force_search(j: JointDist, qcard: int, resolution: int) -> Tuple[float, Coupling]:
    """Exhaustive minimum of the alpha objective over lattice couplings, with its argmin"""
    qcard = resolve_qcard(qcard, j.u_card, j.v_card)
    if resolution < 1:
        raise DistributionError(f"resolution must be positive, got {resolution}")
    if j.u_card == 1 or j.v_card == 1:
        return 0.0, Coupling.constant(j.u_card, qcard)

    cost = brute_force_cost(j.u_card, qcard, resolution)
    if cost > settings.brute_force_budget:
        raise BudgetExceededError(
            f"lattice search needs up to {cost} evaluations, budget is {settings.brute_force_budget}"
        )

    best_value = np.inf
    best_coupling = None
    for chunk in iter_lattice_products(qcard, j.u_card, resolution):
        tensors = j.matrix[None, :, :, None] * chunk[:, :, None, :]
        _, s2, s3 = batch_information_terms(tensors)
        values = s2 + s3
        index = int(np.argmin(values))
        if values[index] < best_value:
            best_value = float(values[index])
            best_coupling = chunk[index]
    return best_value, Coupling(matrix=best_coupling)


def brute_force_alpha(j: JointDist, qcard: int, resolution: int) -> float:
    """Lattice oracle for alpha; finer dyadic resolutions never give larger values"""
    return brute_force_search(j, qcard, resolution)[0]


# Subadditivity across one channel use


def _check_case_size(case: SubadditivityCase) -> None:
    sizes = (case.base_joint.u_card, case.base_joint.v_card, case.channel.input_card, case.channel.output_card)
    if max(sizes) > LEMMA1_MAX_ALPHABET:
        raise DistributionError(f"alphabets {sizes} too large for the grid oracle (max {LEMMA1_MAX_ALPHABET})")


def build_subadditivity_joint(case: SubadditivityCase) -> JointDist:
    """p(u, (v,y)) = p(u,v) W(y | xmap(u)), with V index v |Y| + y"""
    rows = case.channel.matrix[list(case.xmap)]
    matrix = case.base_joint.matrix[:, :, None] * rows[:, None, :]
    return JointDist(matrix=matrix.reshape(case.base_joint.u_card, -1))


def channel_use_joint(case: SubadditivityCase) -> JointDist:
    """p(x,y) with p(x) the image of p(u) under xmap"""
    px = pushforward(case.base_joint.row_marginal(), case.xmap, case.channel.input_card)
    return compose_joint(px, case.channel)


def product_construction(case: SubadditivityCase, base: Coupling, use: Coupling) -> Coupling:
    """Q = (Q~, Q') with Q' drawn from the channel-use coupling at x = xmap(u); index q~ |Q'| + q'"""
    rows = np.asarray(use.matrix)[list(case.xmap)]
    matrix = np.asarray(base.matrix)[:, :, None] * rows[:, None, :]
    return Coupling(matrix=matrix.reshape(base.source_card, -1))


def lemma1_case_check(
    case: SubadditivityCase,
    qcard: int = 2,
    opts: Optional[OptimizerOptions] = None,
    slack: float = 1e-2,
    resolution: Optional[int] = None,
) -> Lemma1Outcome:
    """
    alpha(U;V) <= alpha(U~;V~) + alpha(X;Y) with grid oracles on both sides.

    The left side is the better of the lattice search and the product of the
    two right-side minimizers. The product also yields the term-wise gaps
    I(U;Q|V) - [I(U~;Q~|V~) + I(X;Q'|Y)] and
    I(U;V|Q) - [I(U~;V~|Q~) + I(X;Y|Q')], both at most zero.
    """
    _check_case_size(case)
    resolution = resolution or (opts.grid_resolution if opts is not None else settings.lemma1_resolution)

    base_value, base_coupling = brute_force_search(case.base_joint, qcard, resolution)
    use_joint = channel_use_joint(case)
    use_value, use_coupling = brute_force_search(use_joint, qcard, resolution)
    joint = build_subadditivity_joint(case)
    grid_lhs, _ = brute_force_search(joint, qcard, resolution)

    construction = product_construction(case, base_coupling, use_coupling)
    _, lhs_key, lhs_dependence = information_terms(extend_with_coupling(joint, construction).tensor)
    _, base_key, base_dependence = information_terms(extend_with_coupling(case.base_joint, base_coupling).tensor)
    _, use_key, use_dependence = information_terms(extend_with_coupling(use_joint, use_coupling).tensor)

    lhs = min(grid_lhs, lhs_key + lhs_dependence)
    rhs = base_value + use_value
    return Lemma1Outcome(
        lhs=lhs,
        rhs=rhs,
        passed=lhs <= rhs + slack,
        grid_lhs=grid_lhs,
        construction_lhs=lhs_key + lhs_dependence,
        alpha_base=base_value,
        alpha_channel=use_value,
        key_term_gap=lhs_key - (base_key + use_key),
        dependence_term_gap=lhs_dependence - (base_dependence + use_dependence),
    )


def random_subadditivity_case(
    rng: np.random.Generator, u_card: int = 2, v_card: int = 2, x_card: int = 2, y_card: int = 2
) -> SubadditivityCase:
    """Dirichlet base joint and channel rows, uniform random input map"""
    base = rng.dirichlet(np.ones(u_card * v_card)).reshape(u_card, v_card)
    xmap = tuple(int(x) for x in rng.integers(0, x_card, size=u_card))
    channel = Channel(matrix=dirichlet_rows(rng, x_card, y_card))
    return SubadditivityCase(base_joint=JointDist(matrix=base), xmap=xmap, channel=channel)


# Concavity in p(x)


def _mix(px1: ProbVector, px2: ProbVector, lam: float) -> ProbVector:
    if px1.size != px2.size:
        raise DistributionError(f"input distributions differ in size ({px1.size} vs {px2.size})")
    if not 0.0 <= lam <= 1.0:
        raise DistributionError(f"mixing weight must lie in [0, 1], got {lam}")
    return ProbVector(probs=lam * px1.probs + (1.0 - lam) * px2.probs)


def concavity_gap(px1: ProbVector, px2: ProbVector, ch: Channel, c: Coupling, lam: float = 0.5) -> float:
    """f(lam p1 + (1-lam) p2) - [lam f(p1) + (1-lam) f(p2)] for a fixed coupling; never below zero"""
    mixed = objective_f(_mix(px1, px2, lam), ch, c)
    return mixed - (lam * objective_f(px1, ch, c) + (1.0 - lam) * objective_f(px2, ch, c))


def alpha_concavity_gap(
    px1: ProbVector, px2: ProbVector, ch: Channel, opts: Optional[OptimizerOptions] = None, lam: float = 0.5
) -> float:
    """Same gap for alpha itself, with optimizer values on all three inputs"""
    mixed, _ = alpha_inner(_mix(px1, px2, lam), ch, opts=opts)
    first, _ = alpha_inner(px1, ch, opts=opts)
    second, _ = alpha_inner(px2, ch, opts=opts)
    return mixed - (lam * first + (1.0 - lam) * second)


# Seeded trials, one random stream per (seed, index)


def lemma4_trial(seed: int, index: int) -> Tuple[float, float, float]:
    """Residual, appendix residual and decomposition gap for one random coupling; m and qcard cycle with index"""
    m = 1 + (index // 4) % 2
    ot = ot_correlation(m)
    default = resolve_qcard(None, ot.joint.u_card, ot.joint.v_card)
    qcard = (default, 1, 2, 4)[index % 4]
    coupling = random_coupling(task_rng(seed, index), ot.joint.u_card, qcard)
    return (
        lemma4_residual(ot, coupling),
        lemma4_appendix_check(ot, coupling),
        lemma4_decomposition_gap(ot, coupling),
    )


def lemma1_trial(seed: int, index: int, resolution: int, slack: float = 1e-2) -> Lemma1Outcome:
    case = random_subadditivity_case(task_rng(seed, index))
    return lemma1_case_check(case, qcard=2, slack=slack, resolution=resolution)


def oracle_trial(seed: int, index: int, resolution: int, opts: Optional[OptimizerOptions] = None) -> float:
    """|alpha_joint - brute_force_alpha| on a random 2x2 joint with binary Q"""
    rng = task_rng(seed, index)
    joint = JointDist(matrix=rng.dirichlet(np.ones(4)).reshape(2, 2))
    optimized, _ = alpha_joint(joint, qcard=2, opts=opts)
    oracle = brute_force_alpha(joint, 2, resolution)
    app_logger.debug(f"Oracle trial {index}: optimizer {optimized:.9f}, lattice {oracle:.9f}")
    return abs(optimized - oracle)


def concavity_trial(seed: int, index: int, ch: Channel, opts: Optional[OptimizerOptions] = None) -> float:
    rng = task_rng(seed, index)
    first = ProbVector(probs=rng.dirichlet(np.ones(ch.input_card)))
    second = ProbVector(probs=rng.dirichlet(np.ones(ch.input_card)))
    return alpha_concavity_gap(first, second, ch, opts)


def decomposition_trial(seed: int, index: int) -> float:
    """|objective_f - objective_decomposition| on a random (p(x), channel, coupling) triple"""
    rng = task_rng(seed, index)
    x_card, y_card, qcard = (int(n) for n in rng.integers(2, 5, size=3))
    px = ProbVector(probs=rng.dirichlet(np.ones(x_card)))
    ch = Channel(matrix=dirichlet_rows(rng, x_card, y_card))
    coupling = random_coupling(rng, x_card, qcard)
    return abs(objective_f(px, ch, coupling) - objective_decomposition(px, ch, coupling))


def coupling_concavity_trial(seed: int, index: int, ch: Channel) -> float:
    """concavity_gap for random inputs, a random coupling and a random mixing weight"""
    rng = task_rng(seed, index)
    first = ProbVector(probs=rng.dirichlet(np.ones(ch.input_card)))
    second = ProbVector(probs=rng.dirichlet(np.ones(ch.input_card)))
    coupling = random_coupling(rng, ch.input_card, int(rng.integers(1, 5)))
    return concavity_gap(first, second, ch, coupling, float(rng.uniform()))
