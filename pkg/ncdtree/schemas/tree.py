from typing import FrozenSet, Tuple

from pydantic import Field, model_validator

from ncdtree.schemas.base import FrozenSchema

# Pairing index order for a label quadruple (u, v, w, x).
PAIRINGS: Tuple[Tuple[Tuple[int, int], Tuple[int, int]], ...] = (
    ((0, 1), (2, 3)),  # uv|wx
    ((0, 2), (1, 3)),  # uw|vx
    ((0, 3), (1, 2)),  # ux|vw
)


class QuartetTopology(FrozenSchema):
    """A pairing of four leaf labels into two sibling pairs, e.g. uv|wx."""

    pair1: Tuple[str, str]
    pair2: Tuple[str, str]

    @model_validator(mode="after")
    def check_distinct(self) -> "QuartetTopology":
        if len(set(self.pair1) | set(self.pair2)) != 4:
            raise ValueError("a quartet topology needs four distinct labels")
        return self

    @classmethod
    def from_pairing(cls, labels: Tuple[str, str, str, str], pairing: int) -> "QuartetTopology":
        (a, b), (c, d) = PAIRINGS[pairing]
        return cls(pair1=(labels[a], labels[b]), pair2=(labels[c], labels[d]))

    @property
    def labels(self) -> FrozenSet[str]:
        return frozenset(self.pair1) | frozenset(self.pair2)

    def key(self) -> FrozenSet[FrozenSet[str]]:
        """Order-free identity: {{u,v},{w,x}}."""
        return frozenset((frozenset(self.pair1), frozenset(self.pair2)))

    def same_as(self, other: "QuartetTopology") -> bool:
        return self.key() == other.key()

    def __str__(self) -> str:
        return f"{' '.join(self.pair1)} | {' '.join(self.pair2)}"


class TreeScore(FrozenSchema):
    """Quartet cost of a tree and its normalized benefit score."""

    C_T: float = Field(..., description="Summed cost of the consistent quartet topologies")
    m: float = Field(..., description="Sum over quartets of the cheapest pairing cost")
    M: float = Field(..., description="Sum over quartets of the most expensive pairing cost")
    S: float = Field(..., description="(M - C_T) / (M - m); 1 when M == m")

    @classmethod
    def from_costs(cls, c_t: float, m: float, M: float) -> "TreeScore":
        s = 1.0 if M == m else (M - c_t) / (M - m)
        return cls(C_T=c_t, m=m, M=M, S=s)

    def is_perfect(self, epsilon: float) -> bool:
        """C_T <= m + epsilon * M, the tolerance form of S == 1."""
        return self.C_T <= self.m + epsilon * abs(self.M)
