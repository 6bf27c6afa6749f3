"""Exception types shared across the package."""


class GridMismatchError(ValueError):
    """Two sampled objects do not live on a common uniform grid."""


class EmbeddingError(RuntimeError):
    """Neither circulant embedding nor dense factorization produced a sampler."""


class NumericalFailure(RuntimeError):
    """A quantity required to be finite came out non-finite."""
