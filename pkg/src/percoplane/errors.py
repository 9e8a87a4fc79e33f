"""Exception hierarchy shared by all percoplane modules."""


class PercoplaneError(Exception):
    """Base class for all errors raised by this package."""


class MalformedPermutation(PercoplaneError):
    """Rotation is not a bijection, twin is not a fixed-point-free
    involution, or a vertex's darts do not form a single rotation orbit."""


class EulerMismatch(PercoplaneError):
    """V - E + F does not match the declared surface."""


class NonOrientable(PercoplaneError):
    """Reserved: raised if a face walk is inconsistent with an oriented
    surface.  Rotation-system input is always orientable, so construction
    never raises this; it exists for format-level completeness."""


class NonCycleFace(PercoplaneError):
    """A face boundary walk repeats a vertex."""


class SphericalPair(PercoplaneError):
    """Schlafli pair {p,q} with 1/p + 1/q > 1/2 (spherical tiling)."""


class SizeTooSmall(PercoplaneError):
    """Requested lattice/ball size below the supported minimum."""


class BallClipped(PercoplaneError):
    """A requested ball reaches the truncation boundary of its host map."""


class EmptySet(PercoplaneError):
    """An operation requiring a non-empty vertex set received an empty one."""


class PartitionIncomplete(PercoplaneError):
    """A face partition does not cover every size->=4 interior face."""


class ForcedStateViolated(PercoplaneError):
    """A site configuration contradicts its forced-state mask."""


class MissingDualLink(PercoplaneError):
    """A bond configuration has no dual-edge pairing attached."""


class UnsupportedObservable(PercoplaneError):
    """Observable not defined on the given surface/boundary type."""


class CurvesDoNotCross(PercoplaneError):
    """Threshold estimation failed: sweep curves do not intersect on the
    probed grid (insufficient trials or sizes)."""


class ConfigError(PercoplaneError):
    """Invalid experiment configuration."""
