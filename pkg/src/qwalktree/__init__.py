"""Streaming DGA-domain classification toolkit.

Feature rows are embedded as single-qubit states, reduced to a scalar
cycle-length feature via trace distances, and classified online by an
incremental Hoeffding tree with batch-wise evaluation.
"""

__version__ = "0.1.0"
