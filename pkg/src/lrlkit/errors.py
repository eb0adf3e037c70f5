"""Exception types shared across the toolkit."""

from __future__ import annotations


class DataError(ValueError):
    """Raised for malformed, inconsistent, or missing input data."""


class BackendError(RuntimeError):
    """Raised when an inference backend fails after retries.

    Carries the request id of the failing call so remote failures can be
    traced in server logs.
    """

    def __init__(self, message: str, request_id: str | None = None):
        self.request_id = request_id
        if request_id:
            message = f"{message} (request_id={request_id})"
        super().__init__(message)


class LeakageError(RuntimeError):
    """Raised when a retrieval pool overlaps the split under evaluation."""
