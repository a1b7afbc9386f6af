"""Offline encoder producing EMB1 embedding files for the saliency toolkit.

Reads the toolkit's parsed-scene JSONL or summary JSON, encodes each unit
with a pluggable text encoder, and writes the binary EMB1 format plus its
JSON sidecar. All neural inference stays in this package; the toolkit only
ever sees the files.
"""

__version__ = "0.1.0"
