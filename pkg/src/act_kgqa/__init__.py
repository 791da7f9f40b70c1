"""Re-ranking engine for knowledge-graph question answering.

Takes ranked answer-candidate labels from any text-to-text model, infers the
expected answer type from instance-of relations, expands the candidate pool
with one-hop neighbors of the question entities, and ranks everything with a
four-component score to pick a final KG entity.
"""

__version__ = "0.1.0"
