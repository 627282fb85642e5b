"""Exception hierarchy.

Every error carries a ``kind`` so the CLI can map it to an exit code and a
machine-readable record.
"""


class SiegelLabError(Exception):
    kind = "error"
    #: CLI exit code; 3 is a numerical failure, 2 a usage/config problem.
    exit_code = 3


class RationalInput(SiegelLabError, ValueError):
    kind = "rational_input"


class DepthTooLarge(SiegelLabError, OverflowError):
    kind = "depth_too_large"


class NoConvergence(SiegelLabError):
    kind = "no_convergence"


class TargetTooLarge(SiegelLabError, ValueError):
    kind = "target_too_large"


class CapExceeded(SiegelLabError):
    kind = "cap_exceeded"


class ArcTooLong(SiegelLabError, ValueError):
    kind = "arc_too_long"


class AmbiguousCriticalValue(SiegelLabError):
    kind = "ambiguous_critical_value"


class TreeCap(SiegelLabError):
    kind = "tree_cap"


class NodeCap(TreeCap):
    kind = "node_cap"


class IndexOutOfRange(SiegelLabError, IndexError):
    kind = "index_out_of_range"


class OutsideDomain(SiegelLabError, ValueError):
    kind = "outside_domain"


class OutOfRange(SiegelLabError, ValueError):
    kind = "out_of_range"


class OutsideRegime(SiegelLabError):
    kind = "outside_regime"


class SolverFailure(SiegelLabError):
    kind = "solver_failure"


class CriticalValueOnCurve(SiegelLabError):
    kind = "critical_value_on_curve"


class TrackingLost(SiegelLabError):
    kind = "tracking_lost"


class Escape(SiegelLabError):
    kind = "escape"


class ConfigError(SiegelLabError, ValueError):
    kind = "config_error"
    exit_code = 2
