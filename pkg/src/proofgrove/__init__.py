"""proofgrove: the MiniLean prover.

A small tactic theorem prover over Peano-style arithmetic and propositional
connectives, with factorized proof states, AND-OR proof search with
transposition merging, three-stage proof-tree extraction, and an incremental
verification kernel.
"""

__version__ = "0.1.0"
