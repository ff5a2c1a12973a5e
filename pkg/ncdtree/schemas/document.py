from pydantic import Field, field_validator

from ncdtree.schemas.base import FrozenSchema


class Document(FrozenSchema):
    """A labeled byte string, the atomic clustering object."""

    label: str = Field(..., description="Non-whitespace label, unique within a collection")
    content: bytes = Field(..., description="Raw bytes")

    @field_validator("label")
    def check_label(cls, v: str) -> str:
        if not v:
            raise ValueError("label must be nonempty")
        if any(ch.isspace() for ch in v):
            raise ValueError(f"label {v!r} contains whitespace")
        return v

    def __repr__(self) -> str:
        return f"Document(label={self.label!r}, size={len(self.content)})"
