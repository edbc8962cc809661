"""Toolkit for coding Hungarian question-answer responses for information
structure (Topic/Focus realisation via word order), computing discourse
metrics and statistics, clustering production strategies, and running
seeded repeated-run experiments against vision-language-model endpoints.
"""

__version__ = "0.1.0"
