"""Request/response models for the completion service.

These define the wire format; unknown fields are rejected so malformed
payloads fail loudly instead of being silently ignored.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..core import PartialSequence, ToleranceOptions


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EntryModel(StrictModel):
    index: int = Field(ge=0)
    value: float


class SequenceModel(StrictModel):
    horizon: Optional[int] = Field(default=None, ge=0)
    entries: list[EntryModel] = Field(default_factory=list)

    def to_partial_sequence(self) -> PartialSequence:
        seen = {}
        for e in self.entries:
            if e.index in seen:
                raise ValueError(f"duplicate index {e.index}")
            seen[e.index] = e.value
        return PartialSequence(seen, self.horizon)

    @classmethod
    def from_partial_sequence(cls, s: PartialSequence) -> "SequenceModel":
        return cls(
            horizon=s.horizon,
            entries=[EntryModel(index=k, value=v) for k, v in s.entries.items()],
        )


class ToleranceModel(StrictModel):
    psd_tol: float = Field(default=1e-9, gt=0)
    pd_margin: float = Field(default=1e-12, gt=0)
    growth: float = Field(default=0.5, gt=0)

    def to_options(self) -> ToleranceOptions:
        return ToleranceOptions(self.psd_tol, self.pd_margin, self.growth)


class CheckRequest(StrictModel):
    sequence: SequenceModel
    order: Optional[int] = Field(default=None, ge=0)
    tolerances: ToleranceModel = Field(default_factory=ToleranceModel)


class CheckResponse(StrictModel):
    partial_positive_definite: bool
    partial_positive_semidefinite: bool
    order: int
    maximal_index_sets: list[list[int]]


class ClassifyRequest(StrictModel):
    indices: list[int]
    horizon: Optional[int] = Field(default=None, ge=0)
    tolerances: ToleranceModel = Field(default_factory=ToleranceModel)


class ReductionModel(StrictModel):
    base: list[int]
    d: int
    l0: int


class ClassifyResponse(StrictModel):
    status: str
    rule: str
    strategy: Optional[str]
    pd_status: str
    psd_status: str
    pd_rule: Optional[str]
    psd_rule: Optional[str]
    witness: Optional[SequenceModel]
    witness_mode: Optional[str]
    witness_order: Optional[int]
    horizon: int
    reduction: ReductionModel


class CompleteRequest(StrictModel):
    sequence: SequenceModel
    horizon: int = Field(ge=0)
    strategy: Literal["auto", "schur", "measure", "geometric", "lift"] = "auto"
    d: Optional[int] = Field(default=None, ge=1)
    l0: Optional[int] = Field(default=None, ge=0)
    tolerances: ToleranceModel = Field(default_factory=ToleranceModel)


class CertificateModel(StrictModel):
    values: list[float]
    strategy: str
    per_order_min_eig: list[tuple[int, float]]
    margins_used: list[float]
    representation: Optional[str]
    unique_psd: bool
    epsilon: Optional[float]


class MeasureExtractRequest(StrictModel):
    values: Optional[list[float]] = None
    sequence: Optional[SequenceModel] = None
    tolerances: ToleranceModel = Field(default_factory=ToleranceModel)


class AtomModel(StrictModel):
    location: float
    weight: float


class MeasureExtractResponse(StrictModel):
    atoms: list[AtomModel]
    mass: float


class OracleRequest(StrictModel):
    sequence: SequenceModel
    order: int = Field(ge=0)
    mode: Literal["pd", "psd"] = "pd"
    budget: int = Field(default=2000, ge=1)
    seed: int = 0
    tolerances: ToleranceModel = Field(default_factory=ToleranceModel)


class MinorConditionModel(StrictModel):
    rows: list[int]
    variable: int
    interval: list[Optional[float]]
    description: str


class ObstructionModel(StrictModel):
    variable: int
    conditions: list[MinorConditionModel]


class SearchStatsModel(StrictModel):
    evaluations: int
    method: str
    best_min_eigenvalue: Optional[float]
    budget_exhausted: bool


class OracleResponse(StrictModel):
    feasible: bool
    certified: bool
    completion: Optional[list[EntryModel]]
    obstruction: Optional[ObstructionModel]
    search_stats: SearchStatsModel


class WitnessRequest(StrictModel):
    indices: list[int]
    order: int = Field(ge=0)
    mode: Literal["pd", "psd"] = "pd"
    budget: int = Field(default=10000, ge=1)
    seed: int = 0
    tolerances: ToleranceModel = Field(default_factory=ToleranceModel)


class WitnessResponse(StrictModel):
    witness: Optional[SequenceModel]


class ErrorBody(StrictModel):
    kind: str
    detail: str


class ErrorResponse(StrictModel):
    error: ErrorBody
