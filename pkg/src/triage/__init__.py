"""Issue assignment: curated features, from-scratch classifiers, cross-validated evaluation."""

__version__ = "0.1.0"
