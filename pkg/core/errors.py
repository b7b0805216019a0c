"""
Slow-Light Simulation Errors
Exception hierarchy shared by the medium, dispersion, polariton and protocol modules.

Every error carries a short machine-readable ``code`` used by the CLI error line.
"""

from typing import Optional, Sequence, Tuple


class SlowLightError(Exception):
    """Base class for all simulation errors"""

    code = "slowlight_error"


class PoleError(SlowLightError):
    """Raised when a response function is evaluated at (or too near) a pole"""

    code = "pole_error"

    def __init__(self, message: str, poles: Tuple[float, ...] = (), value: Optional[float] = None):
        super().__init__(message)
        self.poles = tuple(poles)
        self.value = value


class StopBand(SlowLightError):
    """No propagating mode: n² ≤ 0 at the requested point"""

    code = "stop_band"


class NoConvergence(SlowLightError):
    """Iterative solver exhausted its iteration budget"""

    code = "no_convergence"


class NoRootInWindow(SlowLightError):
    """Dispersion function has no sign change inside a branch window"""

    code = "no_root_in_window"

    def __init__(self, message: str, window: Tuple[float, float] = (float("nan"), float("nan"))):
        super().__init__(message)
        self.window = window


class DegenerateWindow(SlowLightError):
    """A propagation window narrower than the scan tolerance was detected"""

    code = "degenerate_window"


class DomainError(SlowLightError):
    """Input outside the domain where a formula is meaningful"""

    code = "domain_error"


class BandTooWide(SlowLightError):
    """Requested pulse band does not fit inside the slow-branch window"""

    code = "band_too_wide"


class ParseError(SlowLightError):
    """Malformed run configuration text"""

    code = "parse_error"

    def __init__(self, message: str, lines: Sequence[int] = ()):
        if lines:
            where = ", ".join(str(n) for n in lines)
            message = f"line {where}: {message}"
        super().__init__(message)
        self.lines = tuple(lines)


class ValidationError(SlowLightError):
    """A configuration or parameter value violates a documented invariant"""

    code = "validation_error"

    def __init__(self, message: str, invariant: str = ""):
        super().__init__(message)
        self.invariant = invariant
