"""Toolkit for retrieval-augmented legal consultation pipelines.

Covers statute ingestion and indexing, lexical article retrieval with
distractor sampling, SFT/benchmark dataset construction, lowest-perplexity
multi-choice evaluation, citation-hallucination auditing and the
consultation inference service.
"""

__version__ = "0.1.0"
