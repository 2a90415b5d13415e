"""
flows
--------
Prefect flows for the benchmark sweeps.

(this file is left intentionally minimal)
"""
