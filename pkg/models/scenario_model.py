"""Pydantic models for scenario configuration and reports."""

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from settings import CONSTRAINT_TOL, WORKERS
from solver.phi import PHI_KINDS

SCENARIOS = (
    "thm2_i",
    "thm2_ii",
    "thm2_iii",
    "proposition_signs",
    "norm_one",
    "eps_bound",
    "bubble_verify",
    "dual_check",
    "sobolev_estimate",
)

Verdict = Literal["pass", "fail", "inconclusive"]


class ScenarioConfig(BaseModel):
    """One scenario run; empty ``phi_norms`` / ``levels`` select the scenario defaults."""

    scenario: str
    n_dim: int = 3
    order: int = 1
    phi_kind: Optional[str] = None
    phi_norms: List[float] = Field(default_factory=list)
    levels: List[int] = Field(default_factory=list)
    tol: float = CONSTRAINT_TOL
    seed: int = 0
    epsilon: float = 0.3
    out: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    workers: int = WORKERS

    @field_validator("scenario")
    @classmethod
    def _known_scenario(cls, v: str) -> str:
        if v not in SCENARIOS:
            raise ValueError(f"unknown scenario {v!r}; expected one of {SCENARIOS}")
        return v

    @field_validator("phi_kind")
    @classmethod
    def _known_kind(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and v not in PHI_KINDS:
            raise ValueError(f"unknown phi kind {v!r}; expected one of {PHI_KINDS}")
        return v

    @field_validator("phi_norms")
    @classmethod
    def _positive_norms(cls, v: List[float]) -> List[float]:
        if any(not x > 0 for x in v):
            raise ValueError("phi norms must be positive")
        return v

    @field_validator("levels")
    @classmethod
    def _valid_levels(cls, v: List[int]) -> List[int]:
        if any(n < 8 for n in v):
            raise ValueError("grid levels need at least 8 nodes")
        return v

    @field_validator("tol", "epsilon")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("must be positive")
        return v

    @field_validator("workers")
    @classmethod
    def _workers(cls, v: int) -> int:
        if v < 1:
            raise ValueError("workers must be positive")
        return v

    @model_validator(mode="after")
    def _critical_dimension(self) -> "ScenarioConfig":
        if self.order < 1:
            raise ValueError("order r must be positive")
        if self.n_dim <= 2 * self.order:
            raise ValueError(f"need N > 2r, got N={self.n_dim}, r={self.order}")
        return self


class MetricRow(BaseModel):
    """One CSV row: a (scenario, φ norm, grid level) measurement."""

    model_config = ConfigDict(populate_by_name=True)

    scenario: str
    N: int
    r: int
    phi_kind: str = ""
    phi_norm: float = float("nan")
    level: int = 0
    nodes: int = 0
    value_dirichlet: float = float("nan")
    value_navier: float = float("nan")
    gap: float = float("nan")
    lambda_: float = Field(default=float("nan"), alias="lambda")
    constraint_res: float = float("nan")
    el_res: float = float("nan")
    converged: bool = True
    verdict: Verdict = "pass"
    extras: Dict[str, Any] = Field(default_factory=dict)


class Report(BaseModel):
    """Scenario echo, metric rows, verdict and diagnostics."""

    config: ScenarioConfig
    rows: List[MetricRow] = Field(default_factory=list)
    verdict: Verdict = "inconclusive"
    wall_time: float = 0.0
    diagnostics: List[str] = Field(default_factory=list)
