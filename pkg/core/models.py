"""
Data models for distributions, channels, couplings and bound results
"""
import operator
from enum import Enum
from pathlib import Path
from typing import Annotated, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import settings

# Simplex sums are accepted (and renormalized) within this absolute tolerance
SIMPLEX_TOL = 1e-12
# Conditional p(q|u,v) must not depend on v within this tolerance
MARKOV_TOL = 1e-10
# Information quantities below this are numerical noise, not negative values
ZERO_FLOOR = -1e-10


def normalize_simplex(values, axis: Optional[int], what: str) -> np.ndarray:
    """Validate nonnegative finite entries summing to one along axis and renormalize"""
    array = np.array(values, dtype=float, copy=True)
    if array.size == 0:
        raise ValueError(f"{what} is empty")
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{what} contains NaN or infinite entries")
    if np.any(array < 0):
        raise ValueError(f"{what} contains negative entries")
    sums = array.sum(axis=axis, keepdims=axis is not None)
    if np.any(np.abs(sums - 1.0) > SIMPLEX_TOL):
        raise ValueError(f"{what} does not sum to 1 (got {np.ravel(sums).tolist()})")
    if not np.all(sums == 1.0):
        array = array / sums
    array.setflags(write=False)
    return array


class ArrayModel(BaseModel):
    """Immutable model holding numpy arrays"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class ProbVector(ArrayModel):
    """Point on a finite probability simplex"""
    probs: np.ndarray

    @field_validator("probs", mode="before")
    @classmethod
    def _check_probs(cls, value):
        array = np.asarray(value, dtype=float)
        if array.ndim != 1:
            raise ValueError("probability vector must be one-dimensional")
        return normalize_simplex(array, axis=None, what="probability vector")

    @property
    def size(self) -> int:
        return int(self.probs.shape[0])

    @classmethod
    def uniform(cls, size: int) -> "ProbVector":
        return cls(probs=np.full(size, 1.0 / size))


class JointDist(ArrayModel):
    """Joint distribution p(u,v) stored as a |U| x |V| grid"""
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _check_matrix(cls, value):
        array = np.asarray(value, dtype=float)
        if array.ndim != 2:
            raise ValueError("joint distribution must be a two-dimensional grid")
        return normalize_simplex(array, axis=None, what="joint distribution")

    @property
    def u_card(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def v_card(self) -> int:
        return int(self.matrix.shape[1])

    def row_marginal(self) -> ProbVector:
        return ProbVector(probs=self.matrix.sum(axis=1))

    def col_marginal(self) -> ProbVector:
        return ProbVector(probs=self.matrix.sum(axis=0))

    def transpose(self) -> "JointDist":
        """p(v,u) with the same entries; already validated, so not renormalized"""
        matrix = np.ascontiguousarray(self.matrix.T)
        matrix.setflags(write=False)
        return JointDist.model_construct(matrix=matrix)


class JointDist3(ArrayModel):
    """Joint distribution p(u,v,q) stored as a |U| x |V| x |Q| grid"""
    tensor: np.ndarray
    markov_q_u_v: bool = False

    @field_validator("tensor", mode="before")
    @classmethod
    def _check_tensor(cls, value):
        array = np.asarray(value, dtype=float)
        if array.ndim != 3:
            raise ValueError("joint distribution of (U,V,Q) must be three-dimensional")
        return normalize_simplex(array, axis=None, what="joint distribution of (U,V,Q)")

    @model_validator(mode="after")
    def _check_markov(self):
        if self.markov_q_u_v:
            p_uv = self.tensor.sum(axis=2)
            p_uq = self.tensor.sum(axis=1)
            p_u = p_uv.sum(axis=1)
            support = p_uv > 0
            q_given_u = np.divide(p_uq, p_u[:, None], out=np.zeros_like(p_uq), where=p_u[:, None] > 0)
            q_given_uv = np.divide(
                self.tensor, p_uv[:, :, None], out=np.zeros_like(self.tensor), where=support[:, :, None]
            )
            deviation = np.abs(q_given_uv - q_given_u[:, None, :])[support]
            if deviation.size and float(deviation.max()) > MARKOV_TOL:
                raise ValueError("p(q|u,v) depends on v; Q-U-V is not a Markov chain")
        return self

    @property
    def shape(self) -> Tuple[int, int, int]:
        return tuple(int(n) for n in self.tensor.shape)


class Channel(ArrayModel):
    """Discrete memoryless channel p(y|x), one row per input symbol"""
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _check_matrix(cls, value):
        array = np.asarray(value, dtype=float)
        if array.ndim != 2:
            raise ValueError("channel matrix must be two-dimensional")
        return normalize_simplex(array, axis=1, what="channel row")

    @property
    def input_card(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def output_card(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def rows(self) -> List[ProbVector]:
        return [ProbVector(probs=row) for row in self.matrix]


class ChannelDiagnostics(BaseModel):
    """Report produced by validate_channel"""
    row_sums: List[float]
    zero_columns: List[int] = []
    noiseless: bool = False
    useless: bool = False
    errors: List[str] = []


class Coupling(ArrayModel):
    """Conditional distribution p(q|u) of the auxiliary Q, one row per source symbol"""
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _check_matrix(cls, value):
        array = np.asarray(value, dtype=float)
        if array.ndim != 2:
            raise ValueError("coupling must be a two-dimensional row-stochastic matrix")
        return normalize_simplex(array, axis=1, what="coupling row")

    @property
    def source_card(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def qcard(self) -> int:
        return int(self.matrix.shape[1])

    @classmethod
    def constant(cls, source_card: int, qcard: int = 1) -> "Coupling":
        """Q independent of everything (all mass on symbol 0)"""
        matrix = np.zeros((source_card, qcard))
        matrix[:, 0] = 1.0
        return cls(matrix=matrix)

    @classmethod
    def copy_of_source(cls, source_card: int, qcard: Optional[int] = None) -> "Coupling":
        """Q equal to the source symbol, padded with unused symbols up to qcard"""
        qcard = source_card if qcard is None else qcard
        if qcard < source_card:
            raise ValueError(f"copying a source of size {source_card} needs qcard >= {source_card}")
        matrix = np.zeros((source_card, qcard))
        matrix[np.arange(source_card), np.arange(source_card)] = 1.0
        return cls(matrix=matrix)


class InformationTerm(str, Enum):
    """Conditional mutual information terms of the tension region"""
    UV_GIVEN_Q = "I(U;V|Q)"
    UQ_GIVEN_V = "I(U;Q|V)"
    VQ_GIVEN_U = "I(V;Q|U)"


class ChannelKind(str, Enum):
    """Standard channel families"""
    ZCHANNEL = "zchannel"
    BEC = "bec"
    BSC = "bsc"


class TensionPoint(BaseModel):
    """(I(V;Q|U), I(U;Q|V), I(U;V|Q)) for one auxiliary Q, in bits"""
    s1: float = Field(default=0.0, ge=ZERO_FLOOR)
    s2: float = Field(ge=ZERO_FLOOR)
    s3: float = Field(ge=ZERO_FLOOR)


class SlicePoint(BaseModel):
    """Frontier point of the s1=0 slice found with weight lambda on s2"""
    weight: float = Field(ge=0.0, le=1.0)
    point: TensionPoint


class OptimizerOptions(BaseModel):
    """Knobs of the multistart coupling search and the outer grids"""
    model_config = ConfigDict(frozen=True)

    restarts: int = Field(default=32, ge=1)
    tol: float = Field(default=1e-9, gt=0)
    max_iters: int = Field(default=5000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    grid_resolution: int = Field(default=64, ge=2)

    @classmethod
    def from_settings(cls, **overrides) -> "OptimizerOptions":
        values = {
            "restarts": settings.restarts,
            "tol": settings.tol,
            "max_iters": settings.max_iters,
            "seed": settings.seed,
            "grid_resolution": settings.grid_resolution,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


class OptimizerDiagnostics(BaseModel):
    """Work counters of an optimization run"""
    restarts: int = 0
    iterations: int = 0
    evaluations: int = 0
    converged: bool = True

    def combine(self, other: "OptimizerDiagnostics") -> "OptimizerDiagnostics":
        return OptimizerDiagnostics(
            restarts=self.restarts + other.restarts,
            iterations=self.iterations + other.iterations,
            evaluations=self.evaluations + other.evaluations,
            converged=self.converged and other.converged,
        )


class BoundResult(ArrayModel):
    """Bound value in bits per channel use with its maximizing input and minimizing coupling"""
    value: float = Field(ge=ZERO_FLOOR)
    arg_px: ProbVector
    arg_coupling: Optional[Coupling] = None
    diagnostics: OptimizerDiagnostics = Field(default_factory=OptimizerDiagnostics)


class SweepRow(BaseModel):
    """One t of the Z-channel sweep"""
    t: float = Field(ge=0.0, le=1.0)
    new_upper: float
    ac13_upper: float
    erasure_lower: float

    @model_validator(mode="after")
    def _check_order(self):
        if self.erasure_lower > self.ac13_upper + 1e-6:
            raise ValueError(f"t={self.t}: erasure lower bound exceeds the AC13 upper bound")
        if self.new_upper > self.ac13_upper + 1e-9:
            raise ValueError(f"t={self.t}: new upper bound exceeds the AC13 upper bound")
        return self


class OTCorrelation(ArrayModel):
    """Ideal joint of ((S0,S1); (K,S_K)) for m-bit strings"""
    m: int = Field(ge=1, le=3)
    joint: JointDist

    @model_validator(mode="after")
    def _check_shape(self):
        expected = (4 ** self.m, 2 ** (self.m + 1))
        if (self.joint.u_card, self.joint.v_card) != expected:
            raise ValueError(f"OT correlation for m={self.m} must be {expected[0]}x{expected[1]}")
        return self


class SubadditivityCase(ArrayModel):
    """Views before a channel use: p(u~,v~), the deterministic input map u~ -> x and the DMC"""
    base_joint: JointDist
    xmap: Tuple[int, ...]
    channel: Channel

    @model_validator(mode="after")
    def _check_xmap(self):
        if len(self.xmap) != self.base_joint.u_card:
            raise ValueError("xmap must assign an input symbol to every u~")
        if any(x < 0 or x >= self.channel.input_card for x in self.xmap):
            raise ValueError("xmap points outside the channel input alphabet")
        return self


class Lemma1Outcome(BaseModel):
    """Both sides of the subadditivity inequality for one case"""
    lhs: float
    rhs: float
    passed: bool
    grid_lhs: float
    construction_lhs: float
    alpha_base: float
    alpha_channel: float
    key_term_gap: float
    dependence_term_gap: float


class SuiteResult(BaseModel):
    """Outcome of one verification suite"""
    name: str
    trials: int = 0
    worst_residual: float = 0.0
    passed: bool = True
    failure: Optional[str] = None
    error: Optional[str] = None
    residuals: List[float] = []
    notes: List[str] = []


class VerifyState(BaseModel):
    """State model for the LangGraph verification workflow"""
    seed: int = 0
    trials: int = Field(default=100, ge=1)
    fail_fast: bool = False
    threads: Optional[int] = None
    opts: OptimizerOptions = Field(default_factory=OptimizerOptions.from_settings)
    results: Annotated[List[SuiteResult], operator.add] = []
    execution_log: Annotated[List[str], operator.add] = []


class Command(str, Enum):
    """CLI subcommands"""
    BOUND = "bound"
    SWEEP = "sweep"
    VERIFY = "verify"
    SLICE = "slice"


class BoundMethod(str, Enum):
    """Which channel bound(s) the bound command reports"""
    NEW = "new"
    AC13 = "ac13"
    BOTH = "both"


class CliConfig(BaseModel):
    """Parsed and validated command line"""
    command: Command
    channel_path: Optional[Path] = None
    joint_path: Optional[Path] = None
    method: BoundMethod = BoundMethod.BOTH
    qcard: Optional[int] = Field(default=None, ge=1)
    restarts: Optional[int] = Field(default=None, ge=1)
    tol: Optional[float] = Field(default=None, gt=0)
    max_iters: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    grid_resolution: Optional[int] = Field(default=None, ge=2)
    steps: int = Field(default=21, ge=2)
    full: bool = False
    trials: int = Field(default=100, ge=1)
    fail_fast: bool = False
    num_points: int = Field(default=11, ge=2)
    threads: Optional[int] = Field(default=None, ge=0)
    out: Optional[Path] = None
    svg: Optional[Path] = None
    residuals_csv: Optional[Path] = None
    log_level: Optional[str] = None

    @model_validator(mode="after")
    def _check_inputs(self):
        if self.command == Command.BOUND and self.channel_path is None:
            raise ValueError("bound needs --channel")
        if self.command == Command.SLICE and self.joint_path is None:
            raise ValueError("slice needs --joint")
        if self.qcard is not None and self.command == Command.VERIFY:
            raise ValueError("verify does not take --qcard")
        if self.qcard is not None and self.command == Command.SWEEP and not self.full:
            raise ValueError("sweep takes --qcard only with --full")
        return self

    def optimizer_options(self) -> OptimizerOptions:
        return OptimizerOptions.from_settings(
            restarts=self.restarts,
            tol=self.tol,
            max_iters=self.max_iters,
            seed=self.seed,
            grid_resolution=self.grid_resolution,
        )
