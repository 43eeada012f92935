"""Exception types shared across the package."""

import os

DEFAULT_CAP = 2_000_000


class WentroError(Exception):
    """Base class for package errors."""


class SpecError(WentroError, ValueError):
    """Malformed or inconsistent input data.

    ``field`` names the offending input field when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class CapExceeded(WentroError, RuntimeError):
    """An enumeration or construction would exceed the configured cap."""

    def __init__(self, message, needed=None, cap=None):
        super().__init__(message)
        self.needed = needed
        self.cap = cap


class ConvergenceError(WentroError, RuntimeError):
    """An iterative routine failed to reach its tolerance."""


def enumeration_cap():
    """Current enumeration cap; the ``WENTRO_CAP`` environment variable overrides it."""
    raw = os.environ.get("WENTRO_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise SpecError(f"WENTRO_CAP must be an integer, got {raw!r}", field="WENTRO_CAP") from exc
    if cap < 1:
        raise SpecError("WENTRO_CAP must be positive", field="WENTRO_CAP")
    return cap


def check_cap(needed, what, cap=None):
    cap = enumeration_cap() if cap is None else cap
    if needed > cap:
        raise CapExceeded(f"{what}: {needed} items exceeds cap {cap}", needed=needed, cap=cap)
