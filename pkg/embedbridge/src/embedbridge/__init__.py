"""Embedding export and contrastive fine-tuning bridge.

Produces EMB1 embedding files for corpus passages and query splits from a
sentence-embedding model, optionally fine-tuned on (question, gold passage)
pairs with the symmetric multiple-negatives objective. The EMB1 format is
the only contract with the retrieval engine.
"""

__version__ = "0.1.0"
