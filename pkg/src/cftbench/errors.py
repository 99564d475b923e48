"""Exception types shared across the workbench."""


class CftbenchError(Exception):
    """Base class for all workbench errors."""


class PoleError(CftbenchError):
    """A Mobius map was evaluated at a pole of its defining fraction."""

    def __init__(self, z, tau):
        self.z = z
        self.tau = tau
        super().__init__(f"mobius map has a pole at z={z!r} for parameter tau={tau!r}")


class SingularPoint(CftbenchError):
    """The strip coordinate map was evaluated at one of its singular points (+1 or -1)."""


class InvalidArc(CftbenchError):
    """An arc is empty, degenerate, or covers the whole circle."""


class QuadratureNotConverged(CftbenchError):
    """Doubling the quadrature nodes changed the result beyond tolerance."""


class SupportTouchesFixedPoints(CftbenchError):
    """A test function's support is not bounded away from the flow fixed points +1 and -1."""


class ModeCoverageError(CftbenchError):
    """The cached Fourier window is too small to cover every mode acting on the truncation."""


class NoFormError(CftbenchError):
    """Operation requires an invariant Hermitian form, but the model is form-free."""


class DegenerateForm(CftbenchError):
    """The truncated Gram matrix is numerically degenerate."""

    def __init__(self, c, level, min_sv):
        self.c = c
        self.level = level
        self.min_sv = min_sv
        super().__init__(
            f"Gram matrix degenerate at weight level {level} for c={c} "
            f"(min singular value {min_sv:.3e})"
        )


class NotXSpaceWord(CftbenchError):
    """A word letter lacks the exterior-analytic extension required by the strip flow."""


class SupportError(CftbenchError):
    """A word letter's support leaks outside the required semicircle."""


class NotStandard(CftbenchError):
    """A real subspace fails the cyclic or separating test."""


class NotPositive(CftbenchError):
    """Polar data requires a positive-definite form."""


class ConfigError(CftbenchError):
    """An experiment configuration failed to parse or validate."""


class CacheCorrupt(CftbenchError):
    """A cached matrix file failed checksum or spot-check verification."""
