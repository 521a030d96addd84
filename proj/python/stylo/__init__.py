# SPDX-License-Identifier: Apache-2.0
"""Stylometric detection of machine-generated text.

Sparse matrices are exchanged as CSR arrays: ``indptr``, ``indices`` and
``data``, the same layout ``scipy.sparse.csr_matrix`` uses.
"""

from . import _stylo
from ._stylo import Model, StyloError, Vocabulary, evaluate, extract_features, presets

__all__ = ["Model", "StyloError", "Vocabulary", "evaluate", "extract_features", "presets"]
__version__ = _stylo.__version__
