"""Strategy classification, Integrated Gradients explanations and
complex-word alignment for Standard English -> Easy-to-Read simplification."""

__version__ = "0.1.0"
