"""Toolchain for generating javadoc comments of overriding Java methods.

Subpackages cover the full pipeline: mining override pairs from Java
source trees (`corpus`), tokenization and vocabularies (`text`), auxiliary
token features and specificity/coherence statistics (`features`), a small
reverse-mode autodiff substrate (`tensor`), the encoder-decoder model with
copy attention (`model`), the training loop (`training`), rule-based
baselines (`baselines`), text-similarity metrics and significance tests
(`metrics`), and the command line front end (`cli`).
"""

__version__ = "0.1.0"
