"""Resolution proof tooling around the Ref formulas."""

__version__ = "0.1.0"
