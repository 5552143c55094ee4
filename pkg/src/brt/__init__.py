"""Executable machinery for big-Ramsey-degree upper bounds at desk scale:
valuation-function trees, strong subtrees, enveloping embeddings, envelopes,
class reductions, and the adversarial colourings behind the negative results.
"""

__version__ = "0.1.0"
