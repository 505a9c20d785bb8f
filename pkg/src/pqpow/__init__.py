"""Quantum-adversary proof-of-work security toolkit.

Four layers: closed-form bounds (bounds), an exact oracle-register simulator
for Bernoulli search (recording, strategies), a minimal proof-of-work
blockchain protocol (backbone), and round-based protocol executions with
calibrated quantum adversaries plus the standard ledger property checks
(execution). The cli module ties them together.
"""

SCHEMA_VERSION = 1

__all__ = ["SCHEMA_VERSION"]
