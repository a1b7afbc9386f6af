"""Script and summary parsing: scene segmentation, sentence splitting, tokenization.

A script is segmented into scenes at slugline boundaries (lines starting with
INT., EXT., EST. and friends). Text before the first slugline becomes a
pseudo-scene with the heading ``FRONTMATTER`` so that scene indices stay
aligned with files that carry title pages. Files without any slugline are
segmented on runs of two or more blank lines instead.

All token counting in the toolkit goes through :func:`tokenize`, a whitespace
tokenizer with punctuation stripping. It deliberately approximates the subword
tokenizers of downstream models; budgets that depend on it are configurable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import EmptyInput, FileFormatError, ValidationError

SLUGLINE_PREFIXES = ("INT.", "EXT.", "INT/EXT", "INT./EXT.", "I/E.", "EST.")

FRONTMATTER_HEADING = "FRONTMATTER"

DEFAULT_ABBREVIATIONS = (
    "Mr.", "Mrs.", "Dr.", "St.", "U.S.", "vs.", "e.g.", "i.e.", "Jr.", "Sr.", "No.",
)

_SENTENCE_TERMINATOR = re.compile(r"[.!?]+(?=\s)")
_BLANK_RUN = re.compile(r"\n(?:[ \t]*\n){2,}")
_QUOTE_CHARS = "\"'“‘«"


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip non-alphanumeric edges per token.

    Tokens that are left empty after stripping are dropped. Idempotent under
    re-tokenization of the space-joined output.
    """
    tokens = []
    for raw in text.lower().split():
        start, end = 0, len(raw)
        while start < end and not raw[start].isalnum():
            start += 1
        while end > start and not raw[end - 1].isalnum():
            end -= 1
        if start < end:
            tokens.append(raw[start:end])
    return tokens


@dataclass(frozen=True)
class Scene:
    """One screenplay scene: a slugline (or synthesized heading) plus body text."""

    index: int
    heading: str
    body: str
    token_count: int

    def __post_init__(self):
        if not self.heading and not self.body:
            raise ValidationError("scene needs a heading or a body")
        if self.index < 0 or self.token_count < 0:
            raise ValidationError("scene index and token_count must be non-negative")


@dataclass(frozen=True)
class MovieScript:
    movie_id: str
    scenes: tuple[Scene, ...]

    def __post_init__(self):
        if not self.movie_id:
            raise ValidationError("movie_id must be non-empty")
        if not self.scenes:
            raise ValidationError(f"{self.movie_id}: script has no scenes")
        for position, scene in enumerate(self.scenes):
            if scene.index != position:
                raise ValidationError(
                    f"{self.movie_id}: scene index {scene.index} at position {position}"
                )

    @property
    def n_scenes(self) -> int:
        return len(self.scenes)


@dataclass(frozen=True)
class Summary:
    movie_id: str
    sentences: tuple[str, ...]

    def __post_init__(self):
        if not self.movie_id:
            raise ValidationError("movie_id must be non-empty")
        if not self.sentences:
            raise ValidationError(f"{self.movie_id}: summary has no sentences")
        if any(not s.strip() for s in self.sentences):
            raise ValidationError(f"{self.movie_id}: summary contains a blank sentence")

    @property
    def n_sentences(self) -> int:
        return len(self.sentences)


# Scenes are joined with two blank lines so that re-parsing a reconstructed
# script splits at exactly the original boundaries, in both slugline mode and
# the blank-line fallback.
SCENE_SEPARATOR = "\n\n\n"


def heading_is_synthesized(scene: Scene) -> bool:
    return scene.heading == FRONTMATTER_HEADING or scene.heading == f"SCENE {scene.index}"


def scene_text(scene: Scene) -> str:
    """Heading and body as one block, the unit used for token budgets.

    Synthesized headings are segmentation markers, not script content, and are
    left out so that reconstructed text re-parses to the same scenes.
    """
    if heading_is_synthesized(scene):
        return scene.body or scene.heading
    if scene.body:
        return f"{scene.heading}\n{scene.body}"
    return scene.heading


def script_text(script: MovieScript) -> str:
    """In-order concatenation of every scene, the parse-then-rejoin identity."""
    return SCENE_SEPARATOR.join(scene_text(s) for s in script.scenes)


def is_slugline(line: str, extra_prefixes: tuple[str, ...] = ()) -> bool:
    upper = line.strip().upper()
    if upper.startswith(SLUGLINE_PREFIXES):
        return True
    return bool(extra_prefixes) and upper.startswith(tuple(p.upper() for p in extra_prefixes))


def _make_scene(index: int, heading: str, body: str) -> Scene:
    text = f"{heading}\n{body}" if body else heading
    return Scene(index=index, heading=heading, body=body, token_count=len(tokenize(text)))


def _join_body(lines: list[str]) -> str:
    return "\n".join(line.rstrip() for line in lines).strip("\n")


def parse_script(text: str, movie_id: str, extra_prefixes: tuple[str, ...] = ()) -> MovieScript:
    """Segment raw script text into an ordered scene sequence.

    Scenes start at sluglines; leading text becomes a FRONTMATTER pseudo-scene.
    Without any slugline the text is split on runs of >= 2 blank lines and
    headings are synthesized. Raises :class:`EmptyInput` on blank text.
    """
    if not text.strip():
        raise EmptyInput(f"{movie_id}: script text is empty")
    normalized = text.replace("\r\n", "\n").replace("\r", "\n")
    lines = normalized.split("\n")
    slug_positions = [i for i, line in enumerate(lines) if is_slugline(line, extra_prefixes)]

    scenes: list[Scene] = []
    if slug_positions:
        frontmatter = _join_body(lines[: slug_positions[0]])
        if frontmatter.strip():
            scenes.append(_make_scene(0, FRONTMATTER_HEADING, frontmatter))
        bounds = slug_positions + [len(lines)]
        for start, end in zip(bounds, bounds[1:]):
            heading = lines[start].strip()
            body = _join_body(lines[start + 1 : end])
            scenes.append(_make_scene(len(scenes), heading, body))
    else:
        for segment in _BLANK_RUN.split(normalized):
            if segment.strip():
                body = _join_body(segment.split("\n"))
                scenes.append(_make_scene(len(scenes), f"SCENE {len(scenes)}", body))
    return MovieScript(movie_id=movie_id, scenes=tuple(scenes))


def _ends_with_abbreviation(chunk: str, abbreviations: tuple[str, ...]) -> bool:
    words = chunk.split()
    if not words:
        return False
    last = words[-1].lstrip(_QUOTE_CHARS + "([")
    return last in abbreviations


def split_sentence_texts(
    text: str, abbreviations: tuple[str, ...] = DEFAULT_ABBREVIATIONS
) -> list[str]:
    """Rule-based sentence splitting.

    A sentence ends at a run of ``.``, ``!`` or ``?`` followed by whitespace
    and an uppercase letter, digit, or quote, unless the preceding word is a
    protected abbreviation (matched case-sensitively).
    """
    sentences: list[str] = []
    start = 0
    for match in _SENTENCE_TERMINATOR.finditer(text):
        end = match.end()
        rest = text[end:].lstrip()
        if not rest:
            continue
        nxt = rest[0]
        if not (nxt.isupper() or nxt.isdigit() or nxt in _QUOTE_CHARS):
            continue
        if match.group().endswith(".") and _ends_with_abbreviation(text[start:end], abbreviations):
            continue
        piece = text[start:end].strip()
        if piece:
            sentences.append(piece)
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def split_sentences(
    text: str, movie_id: str, abbreviations: tuple[str, ...] = DEFAULT_ABBREVIATIONS
) -> Summary:
    """Split raw summary prose into an ordered, trimmed sentence sequence."""
    if not text.strip():
        raise EmptyInput(f"{movie_id}: summary text is empty")
    return Summary(movie_id=movie_id, sentences=tuple(split_sentence_texts(text, abbreviations)))


def load_abbreviations(path) -> tuple[str, ...]:
    """Read one abbreviation per line, ignoring blanks and # comments."""
    entries = []
    for line in open(path, encoding="utf-8"):
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    return tuple(entries)


def scenes_to_jsonl(script: MovieScript) -> str:
    lines = []
    for scene in script.scenes:
        lines.append(
            json.dumps(
                {
                    "movie_id": script.movie_id,
                    "index": scene.index,
                    "heading": scene.heading,
                    "body": scene.body,
                    "token_count": scene.token_count,
                },
                ensure_ascii=False,
            )
        )
    return "\n".join(lines) + "\n"


def script_from_jsonl(text: str, source: str = "<jsonl>") -> MovieScript:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{source}:{lineno}: invalid JSON ({exc})") from exc
    if not records:
        raise FileFormatError(f"{source}: no scene records")
    movie_id = records[0].get("movie_id", "")
    try:
        scenes = tuple(
            Scene(
                index=rec["index"],
                heading=rec["heading"],
                body=rec["body"],
                token_count=rec["token_count"],
            )
            for rec in records
        )
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{source}: scene record missing field {exc}") from exc
    return MovieScript(movie_id=movie_id, scenes=scenes)


def summary_to_json(summary: Summary) -> str:
    return json.dumps(
        {"movie_id": summary.movie_id, "sentences": list(summary.sentences)},
        ensure_ascii=False,
        indent=2,
    ) + "\n"


def summary_from_json(text: str, source: str = "<json>") -> Summary:
    try:
        payload = json.loads(text)
        return Summary(movie_id=payload["movie_id"], sentences=tuple(payload["sentences"]))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FileFormatError(f"{source}: invalid summary JSON ({exc})") from exc
