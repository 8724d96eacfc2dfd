"""Shared exception types, mapped to CLI exit codes."""


class ConfigError(ValueError):
    """Invalid configuration or domain violation (exit code 1)."""


class NumericsError(RuntimeError):
    """Numerical failure: NaN/Inf state, non-convergence, blow-up (exit code 2)."""
