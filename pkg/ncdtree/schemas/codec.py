import os
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import Field, model_validator

from ncdtree.schemas.base import BaseSchema, FrozenSchema

# Byte length of a compressor's output.
CodeLength = int

AXIOMS = ("idempotency", "monotonicity", "symmetry", "distributivity", "subadditivity")


class CodecKind(str, Enum):
    BUILTIN_LZ = "builtin-lz"
    BUILTIN_BLOCKSORT = "builtin-blocksort"
    IDENTITY = "identity"
    EXTERNAL = "external-command"


BUILTIN_NAMES = {
    "lz": CodecKind.BUILTIN_LZ,
    "blocksort": CodecKind.BUILTIN_BLOCKSORT,
    "identity": CodecKind.IDENTITY,
}


class Codec(FrozenSchema):
    """A code-length function C(x) over byte strings."""

    name: str = Field(..., min_length=1, description="Short identifier")
    kind: CodecKind = Field(..., description="Codec family")
    command: Optional[Tuple[str, ...]] = Field(None, description="argv of an external compressor")

    @model_validator(mode="after")
    def check_command(self) -> "Codec":
        if self.kind == CodecKind.EXTERNAL and not self.command:
            raise ValueError("external-command codecs need a command")
        if self.kind != CodecKind.EXTERNAL and self.command:
            raise ValueError("only external-command codecs take a command")
        return self

    @classmethod
    def builtin(cls, name: str) -> "Codec":
        if name not in BUILTIN_NAMES:
            raise ValueError(f"unknown builtin compressor {name!r}; choose from {sorted(BUILTIN_NAMES)}")
        return cls(name=name, kind=BUILTIN_NAMES[name])

    @classmethod
    def external(cls, command: Sequence[str], name: Optional[str] = None) -> "Codec":
        return cls(name=name or os.path.basename(command[0]), kind=CodecKind.EXTERNAL, command=tuple(command))

    @property
    def identity_key(self) -> str:
        """Stable identity used to namespace cached code lengths."""
        if self.command:
            return f"{self.kind.value}:{self.name}:{' '.join(self.command)}"
        return f"{self.kind.value}:{self.name}"


class AxiomRecord(BaseSchema):
    """Outcome of checking one normal-compressor axiom over a corpus."""

    samples: int = Field(0, description="Number of pairs or triples evaluated")
    max_violation: float = Field(0.0, description="Largest violation in bytes (0 if never violated)")
    max_relative_violation: float = Field(0.0, description="Largest violation as a fraction of the larger operand's C")
    worst_slack: float = Field(0.0, description="Slack that applied to the worst sample")
    passed: bool = Field(True, description="Every sample within slack(n)")


class NormalityReport(BaseSchema):
    """Empirical audit of the normal-compressor axioms."""

    codec: str
    alpha: float
    beta: float
    corpus_size: int
    axioms: Dict[str, AxiomRecord]
    round_trip: Optional[bool] = Field(None, description="Builtin self-test outcome; None for external codecs")

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.axioms.values()) and self.round_trip is not False

    def failed_axioms(self) -> List[str]:
        return [name for name in AXIOMS if name in self.axioms and not self.axioms[name].passed]

    def to_text(self) -> str:
        lines = [
            f"normality audit for compressor {self.codec}",
            f"corpus items: {self.corpus_size}; slack = {self.alpha:g}*log2(n) + {self.beta:g} bytes",
        ]
        for name in AXIOMS:
            record = self.axioms[name]
            status = "PASS" if record.passed else "FAIL"
            lines.append(
                f"  {name:<15} {status}  samples={record.samples} "
                f"max_violation={record.max_violation:g}B "
                f"relative={record.max_relative_violation:.6f}"
            )
        if self.round_trip is not None:
            lines.append(f"  {'round-trip':<15} {'PASS' if self.round_trip else 'FAIL'}")
        return "\n".join(lines)

    def to_key_values(self) -> str:
        pairs = [
            ("codec", self.codec),
            ("alpha", f"{self.alpha:g}"),
            ("beta", f"{self.beta:g}"),
            ("corpus_size", str(self.corpus_size)),
        ]
        for name in AXIOMS:
            record = self.axioms[name]
            pairs.extend([
                (f"{name}.samples", str(record.samples)),
                (f"{name}.max_violation", f"{record.max_violation:g}"),
                (f"{name}.max_relative_violation", f"{record.max_relative_violation:.15g}"),
                (f"{name}.pass", str(record.passed).lower()),
            ])
        if self.round_trip is not None:
            pairs.append(("round_trip.pass", str(self.round_trip).lower()))
        pairs.append(("pass", str(self.passed).lower()))
        return "\n".join(f"{key}={value}" for key, value in pairs)
