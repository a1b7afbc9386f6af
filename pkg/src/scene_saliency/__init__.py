"""Scene-saliency toolkit: find the scenes of a long script worth summarizing.

Submodules: ``parsing`` (scenes, sentences, tokens), ``rouge``, ``alignment``
(summary-to-scene alignment and evaluation), ``agreement`` (inter-annotator
measures), ``embeddings`` (EMB1 format), ``selection`` (TextRank, majority,
linear scorer, k-fold), ``pipeline`` (stats, prepared inputs, staged runs),
``service`` (annotation HTTP backend), ``cli`` (the ``toolkit`` command).
"""

__version__ = "0.1.0"
