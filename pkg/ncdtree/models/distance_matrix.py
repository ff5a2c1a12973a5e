"""Labeled distance matrix and its text format.

Text format (UTF-8): the first line holds n; each of the next n lines holds
a label followed by n decimal values (15 significant digits), separated by
single spaces, rows in label order.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from ncdtree.core.config import settings
from ncdtree.core.exceptions import DuplicateLabel, InputReadError, InvalidInput, MatrixParseError


class DistanceMatrix:
    """n x n matrix of pairwise distances indexed by unique labels."""

    def __init__(
        self,
        labels: Sequence[str],
        values: Union[np.ndarray, Sequence[Sequence[float]]],
        metadata: Optional[Dict[str, Any]] = None,
    ):
        values = np.array(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise InvalidInput(f"distance matrix must be square, got shape {values.shape}")
        if values.shape[0] != len(labels):
            raise InvalidInput(f"{len(labels)} labels for a {values.shape[0]}x{values.shape[0]} matrix")
        seen = set()
        for label in labels:
            if not label or any(ch.isspace() for ch in label):
                raise InvalidInput(f"invalid label {label!r}")
            if label in seen:
                raise DuplicateLabel(label)
            seen.add(label)
        if not np.all(np.isfinite(values)):
            raise InvalidInput("distance matrix entries must be finite")
        self.labels: List[str] = list(labels)
        self.values = values
        self.metadata: Dict[str, Any] = dict(metadata or {})
        self._index = {label: i for i, label in enumerate(self.labels)}

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise InvalidInput(f"label {label!r} not in matrix", details={"label": label})

    def distance(self, a: str, b: str) -> float:
        return float(self.values[self.index(a), self.index(b)])

    def max_asymmetry(self) -> float:
        return float(np.max(np.abs(self.values - self.values.T))) if self.size else 0.0

    def is_symmetric(self, tolerance: float = 0.0) -> bool:
        return self.max_asymmetry() <= tolerance

    def symmetrized(self) -> "DistanceMatrix":
        """Arithmetic mean of the matrix and its transpose (exactly symmetric)."""
        mean = (self.values + self.values.T) / 2.0
        return DistanceMatrix(self.labels, mean, {**self.metadata, "symmetrized": True})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DistanceMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"DistanceMatrix(size={self.size})"

    # Text format

    def to_text(self, digits: Optional[int] = None) -> str:
        digits = digits or settings.MATRIX_SIGNIFICANT_DIGITS
        lines = [str(self.size)]
        for label, row in zip(self.labels, self.values):
            lines.append(" ".join([label] + [f"{value:.{digits}g}" for value in row]))
        return "\n".join(lines) + "\n"

    def render(self, digits: int = 3) -> str:
        """Aligned display form with values truncated to ``digits`` decimals."""
        width = max(len(label) for label in self.labels)
        factor = 10 ** digits
        lines = []
        for label, row in zip(self.labels, self.values):
            cells = [f"{np.trunc(value * factor) / factor:.{digits}f}" for value in row]
            lines.append(f"{label:>{width}} " + " ".join(cells))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DistanceMatrix":
        lines = [line for line in text.splitlines()]
        while lines and not lines[-1].strip():
            lines.pop()
        if not lines:
            raise MatrixParseError("empty matrix file", line=1)
        try:
            n = int(lines[0].strip())
        except ValueError:
            raise MatrixParseError(f"expected the matrix size, got {lines[0]!r}", line=1)
        if n < 1:
            raise MatrixParseError(f"matrix size must be positive, got {n}", line=1)
        if len(lines) != n + 1:
            raise MatrixParseError(f"expected {n} rows, found {len(lines) - 1}", line=min(len(lines), n + 1) + 1)
        labels: List[str] = []
        rows: List[List[float]] = []
        seen = set()
        for lineno, line in enumerate(lines[1:], start=2):
            fields = line.split()
            if len(fields) != n + 1:
                raise MatrixParseError(f"expected a label and {n} values, found {len(fields)} fields", line=lineno)
            label = fields[0]
            if label in seen:
                raise MatrixParseError(f"duplicate label {label!r}", line=lineno)
            seen.add(label)
            try:
                row = [float(field) for field in fields[1:]]
            except ValueError as exc:
                raise MatrixParseError(f"bad value: {exc}", line=lineno)
            if not all(np.isfinite(row)):
                raise MatrixParseError("non-finite value", line=lineno)
            labels.append(label)
            rows.append(row)
        return cls(labels, rows)

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def read(cls, path: Union[str, Path]) -> "DistanceMatrix":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise InputReadError(str(path), str(exc))
        return cls.from_text(text)
