"""High-frequency macro-news event studies: surprises, window returns,
response regressions, a scalar signal-extraction model and beta sorts."""

__version__ = "0.1.0"
