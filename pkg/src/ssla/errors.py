"""Typed errors mapped to distinct CLI exit codes."""


class SslaError(Exception):
    """Base class for errors raised by this package."""

    exit_code = 1


class InputError(SslaError):
    """Invalid or inconsistent inputs (shape mismatch, bad flag values)."""

    exit_code = 2


class DecodeError(SslaError):
    """An image file could not be decoded."""

    exit_code = 3


class InferenceError(SslaError):
    """Mixture-model fitting failed to produce a usable model."""

    exit_code = 4
