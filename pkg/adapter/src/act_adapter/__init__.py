"""Producers of the ranking engine's input files from live models.

Three operations, each writing one artifact the engine consumes: ranked
candidate lists from a sequence-to-sequence checkpoint via diverse beam
search, an embedding table from a sentence encoder, and question-entity
annotations from a dictionary linker over a knowledge-graph label export.
The engine itself is never imported; the file formats are the contract.
"""

__version__ = "0.1.0"

from .generation import GenerationConfig, generate_candidates
from .embedding import export_embeddings
from .entity_linking import link_questions

__all__ = [
    "GenerationConfig",
    "generate_candidates",
    "export_embeddings",
    "link_questions",
]
