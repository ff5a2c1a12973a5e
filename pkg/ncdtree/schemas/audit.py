from pydantic import Field

from ncdtree.schemas.base import BaseSchema


class MetricAuditReport(BaseSchema):
    """Empirical check of the metric (in)equalities on a distance matrix."""

    size: int = Field(..., description="Number of objects")
    tolerance: float = Field(..., description="Allowed deviation for symmetry and triangle checks")
    max_symmetry_deviation: float = Field(..., description="max |d(x,y) - d(y,x)|")
    max_triangle_violation: float = Field(..., description="max d(x,y) - d(x,z) - d(z,y), floored at 0")
    triangle_violations: int = Field(..., description="Ordered triples with a positive violation")
    negative_entries: int = Field(..., description="Entries below 0")
    entries_above_1_1: int = Field(..., description="Entries above 1.1")
    max_self_distance: float = Field(..., description="Largest diagonal entry")

    @property
    def passed(self) -> bool:
        return (
            self.max_symmetry_deviation <= self.tolerance
            and self.max_triangle_violation <= self.tolerance
        )

    def to_text(self) -> str:
        return "\n".join([
            f"metric audit over {self.size} objects (tolerance {self.tolerance:g})",
            f"  symmetry   max deviation {self.max_symmetry_deviation:.15g}",
            f"  triangle   max violation {self.max_triangle_violation:.15g} ({self.triangle_violations} triples)",
            f"  negative entries {self.negative_entries}",
            f"  entries > 1.1    {self.entries_above_1_1}",
            f"  max self-distance {self.max_self_distance:.15g}",
            f"  result {'PASS' if self.passed else 'FAIL'}",
        ])
