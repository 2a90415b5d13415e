"""
hspg_ops
--------
Group-sparse stochastic optimisation: operators, problems, solvers and the
benchmark harness around them.

(this file is left intentionally minimal)
"""

__version__ = "0.1.0"
