"""Battery state-of-health prediction from charging data.

Pipeline: charging records -> incremental-capacity curves -> health
indicators (normalized, SVD-denoised, correlation-ranked) -> dual-module
bidirectional GRU regressor, optionally hyperparameter-tuned with the
sparrow search algorithm.
"""

__version__ = "0.1.0"
