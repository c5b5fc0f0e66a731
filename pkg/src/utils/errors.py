# -*- coding: utf-8 -*-
"""
src/utils/errors.py
Exception hierarchy shared by the simulator, pipeline and CLI.
"""


class PalpBenchError(Exception):
    """Base class for every error raised by the benchmark."""


class SpecValidationError(PalpBenchError, ValueError):
    """Invalid phantom geometry or configuration; message names the field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ShapeMismatchError(PalpBenchError, ValueError):
    pass


class TraceError(PalpBenchError, ValueError):
    """Malformed time series: non-monotonic time, missing steps, empty windows."""


class SimulationFault(PalpBenchError):
    """Unreachable force, controller instability or training divergence.

    `trace` carries the partial protocol trace when the fault happened mid-run.
    """

    def __init__(self, message: str, trace=None):
        self.trace = trace
        super().__init__(message)


class VerificationMismatch(PalpBenchError):
    pass
