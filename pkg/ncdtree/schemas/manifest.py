from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from pydantic import Field

from ncdtree import __version__
from ncdtree.schemas.base import BaseSchema


class CodecIdentity(BaseSchema):
    """Which compressor produced an artifact."""

    name: str
    kind: str
    command: Optional[List[str]] = None
    executable_digest: Optional[str] = Field(None, description="SHA-256 of the external executable")


class RunManifest(BaseSchema):
    """Provenance record written next to every artifact."""

    command_line: List[str] = Field(..., description="argv that produced the artifact")
    seed: Optional[int] = None
    codec: Optional[CodecIdentity] = None
    input_digests: Dict[str, str] = Field(default_factory=dict, description="SHA-256 per input")
    artifact_digests: Dict[str, str] = Field(default_factory=dict, description="SHA-256 per output file")
    parameters: Dict[str, Any] = Field(default_factory=dict)
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    tool_version: str = __version__
