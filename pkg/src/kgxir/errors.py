"""Exception types shared across the package."""


class DataFormatError(ValueError):
    """A data file (corpus, KG, qrels, ...) violates its expected format.

    Messages include the offending path and 1-based line number where known.
    """


class RelatednessUndefinedError(ValueError):
    """Raw-mode relatedness requested for a pair with no shared in-links."""
