from enum import Enum


class NcdMode(str, Enum):
    """Numerator of the NCD: C(xy), or min{C(xy), C(yx)}."""

    PLAIN = "plain"
    SYMMETRIC_MIN = "symmetric-min"


class ScalingMode(str, Enum):
    """Rescaling applied to block-frequency distances."""

    NONE = "none"
    LINEAR = "linear"
    MINMAX = "minmax"
