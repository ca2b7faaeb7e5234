"""Universal Horn sentences: entailment, convexity, joint embedding, and the
grammar-to-Horn reduction."""

__version__ = "0.1.0"
