import csv
import io
from enum import Enum
from typing import List, Optional

from pydantic import Field

from ncdtree.core.config import settings
from ncdtree.models.cluster_tree import ClusterTree
from ncdtree.schemas.base import BaseSchema


class SearchConfig(BaseSchema):
    """Parameters of the randomized hill-climbing tree search."""

    seed: int = Field(0, ge=0, lt=2**64, description="RNG seed")
    max_stale: int = Field(default_factory=lambda: settings.MAX_STALE, ge=1, description="Non-improving candidates before halting")
    time_budget: Optional[float] = Field(None, gt=0, description="Wall-clock budget in seconds")
    workers: int = Field(1, ge=1, description="Independent climbers")
    s_one_epsilon: float = Field(default_factory=lambda: settings.S_ONE_EPSILON, ge=0, description="Tolerance for S(T) == 1")
    burst_cap: int = Field(default_factory=lambda: settings.BURST_CAP, ge=1, description="Cap on simple mutations per full mutation")
    trace_every: int = Field(default_factory=lambda: settings.TRACE_EVERY, ge=0, description="Extra trace row every N candidates (0 = improvements only)")
    check_invariants: bool = Field(False, description="Validate every candidate tree")


class HaltReason(str, Enum):
    PERFECT = "perfect"
    STALE = "stale"
    TIME = "time"


class TraceRecord(BaseSchema):
    candidates: int = Field(..., description="Candidates examined so far")
    best_S: float = Field(..., description="Best S(T) so far")


class SearchTrace(BaseSchema):
    """Progress of a search: best S(T) as a function of candidates examined."""

    records: List[TraceRecord] = Field(default_factory=list)
    best_tree: Optional[ClusterTree] = None
    total_candidates: int = 0
    halt_reason: Optional[HaltReason] = None
    noop_mutations: int = Field(0, description="Subtree swaps that found no disjoint pair")

    class Config:
        arbitrary_types_allowed = True

    def record(self, candidates: int, best_s: float) -> None:
        self.records.append(TraceRecord(candidates=candidates, best_S=best_s))

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["candidates", "best_S"])
        for row in self.records:
            writer.writerow([row.candidates, f"{row.best_S:.15g}"])
        return buffer.getvalue()


class RestartRun(BaseSchema):
    seed: int
    S: float
    halt_reason: HaltReason
    total_candidates: int


class RestartSummary(BaseSchema):
    """Repeated searches on one matrix from independent seeds."""

    runs: List[RestartRun] = Field(default_factory=list)
    agreement: List[List[float]] = Field(default_factory=list, description="Pairwise quartet agreement of the runs' trees")
    best_run: int = 0

    def to_text(self) -> str:
        lines = [f"{len(self.runs)} runs"]
        for i, run in enumerate(self.runs):
            marker = "*" if i == self.best_run else " "
            lines.append(
                f"{marker} run {i}: seed={run.seed} S(T)={run.S:.6f} "
                f"halt={run.halt_reason.value} candidates={run.total_candidates}"
            )
        if len(self.runs) > 1:
            pairs = [self.agreement[i][j] for i in range(len(self.runs)) for j in range(i + 1, len(self.runs))]
            lines.append(f"quartet agreement: min={min(pairs):.6f} mean={sum(pairs) / len(pairs):.6f}")
        return "\n".join(lines)
