"""Analytic time-optimal control of the chain x1' = u, xj' = x1**(j-1)
via truncated Hausdorff moment problems."""

__version__ = "0.1.0"
