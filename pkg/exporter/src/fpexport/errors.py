"""Error taxonomy mapped to exit codes by the CLI."""


class ExportError(Exception):
    """Base class for every failure this package raises on purpose."""


class JobError(ExportError):
    """The invocation itself is unusable (bad flags, missing backbone)."""


class InputError(ExportError):
    """Labels, embeddings, or images violate the contract."""
