from pydantic import BaseModel


class BaseSchema(BaseModel):
    """Base schema with common configuration."""

    class Config:
        from_attributes = True
        populate_by_name = True


class FrozenSchema(BaseSchema):
    """Immutable, hashable schema."""

    class Config:
        from_attributes = True
        populate_by_name = True
        frozen = True
