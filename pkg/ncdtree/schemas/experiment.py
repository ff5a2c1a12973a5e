import string
from typing import Any, Dict, List, Optional

from pydantic import Field, field_validator, model_validator

from ncdtree.data import load_yaml
from ncdtree.models.cluster_tree import ClusterTree
from ncdtree.models.distance_matrix import DistanceMatrix
from ncdtree.schemas.base import BaseSchema
from ncdtree.schemas.tree import TreeScore


def default_tag_assignments() -> List[str]:
    return list(load_yaml("tag_subsets.yaml")["assignments"])


class TagSpec(BaseSchema):
    """Layout of the artificial tag-file corpus."""

    tag_count: int = Field(11, ge=1, le=26, description="Number of distinct tags, named a, b, c, ...")
    tag_size: int = Field(1024, ge=1, description="Bytes per tag")
    file_size: int = Field(81920, ge=1, description="Bytes per file")
    placements: int = Field(10, ge=1, description="Copies stamped per tag")
    assignments: List[str] = Field(default_factory=default_tag_assignments, description="Tag set of each file; also its label")

    @field_validator("assignments")
    def check_assignments(cls, v: List[str]) -> List[str]:
        if len(set(v)) != len(v):
            raise ValueError("tag assignments must be unique")
        for subset in v:
            if not subset or len(set(subset)) != len(subset):
                raise ValueError(f"tag assignment {subset!r} must list distinct tags")
        return v

    @model_validator(mode="after")
    def check_layout(self) -> "TagSpec":
        names = set(self.tag_names)
        for subset in self.assignments:
            unknown = set(subset) - names
            if unknown:
                raise ValueError(f"assignment {subset!r} uses unknown tags {sorted(unknown)}")
        if self.tag_size > self.file_size:
            raise ValueError("tags must fit inside a file")
        if self.placements * self.max_tags * self.tag_size * 2 > self.file_size:
            raise ValueError("tags would cover more than half of a file")
        return self

    @property
    def tag_names(self) -> List[str]:
        return list(string.ascii_lowercase[: self.tag_count])

    @property
    def max_tags(self) -> int:
        return max((len(subset) for subset in self.assignments), default=0)


class ExperimentReport(BaseSchema):
    """Outcome of one controlled experiment."""

    name: str
    matrix: DistanceMatrix
    tree: ClusterTree
    score: TreeScore
    checks: Dict[str, bool] = Field(default_factory=dict)
    measurements: Dict[str, Any] = Field(default_factory=dict)
    reference_tree: Optional[ClusterTree] = None

    class Config:
        arbitrary_types_allowed = True

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_text(self) -> str:
        lines = [f"experiment {self.name}: {self.matrix.size} objects", f"S(T)={self.score.S:.6f}"]
        for key, value in self.measurements.items():
            lines.append(f"  {key}: {value}")
        for key, ok in self.checks.items():
            lines.append(f"  check {key}: {'PASS' if ok else 'FAIL'}")
        return "\n".join(lines)
