from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scene_saliency.errors import EmptyInput, ValidationError
from scene_saliency.parsing import (
    FRONTMATTER_HEADING,
    MovieScript,
    Scene,
    Summary,
    heading_is_synthesized,
    is_slugline,
    parse_script,
    scenes_to_jsonl,
    script_from_jsonl,
    script_text,
    split_sentence_texts,
    split_sentences,
    summary_from_json,
    summary_to_json,
    tokenize,
)


def test_parse_two_sluglines():
    script = parse_script("INT. LAB - DAY\nA desk.\nEXT. STREET\nRain.", "m1")
    assert script.n_scenes == 2
    assert [s.heading for s in script.scenes] == ["INT. LAB - DAY", "EXT. STREET"]
    assert [s.body for s in script.scenes] == ["A desk.", "Rain."]


def test_parse_blank_line_fallback():
    script = parse_script("Line one.\n\n\nLine two.", "m1")
    assert script.n_scenes == 2
    assert [s.body for s in script.scenes] == ["Line one.", "Line two."]
    assert all(heading_is_synthesized(s) for s in script.scenes)


def test_parse_single_blank_line_does_not_split():
    script = parse_script("Line one.\n\nLine two.", "m1")
    assert script.n_scenes == 1


def test_parse_empty_input():
    with pytest.raises(EmptyInput):
        parse_script("   \n \n", "m1")


def test_parse_frontmatter():
    script = parse_script("A Title\nby Someone\nINT. LAB - DAY\nWork.", "m1")
    assert script.scenes[0].heading == FRONTMATTER_HEADING
    assert script.scenes[0].body == "A Title\nby Someone"
    assert script.scenes[1].heading == "INT. LAB - DAY"
    assert [s.index for s in script.scenes] == [0, 1]


@pytest.mark.parametrize(
    "line,expected",
    [
        ("INT. LAB - DAY", True),
        ("  ext. street", True),
        ("INT/EXT CAR", True),
        ("I/E. CAR", True),
        ("EST. CITY SKYLINE", True),
        ("INTERIOR MONOLOGUE", False),
        ("ESTABLISHED 1901", False),
        ("The END", False),
    ],
)
def test_is_slugline(line, expected):
    assert is_slugline(line) is expected


def test_extra_prefixes():
    text = "FLASHBACK: THE WAR\nBoom.\nINT. HQ\nQuiet."
    assert parse_script(text, "m").n_scenes == 2  # frontmatter + INT.
    extra = parse_script(text, "m", extra_prefixes=("FLASHBACK:",))
    assert extra.n_scenes == 2
    assert extra.scenes[0].heading == "FLASHBACK: THE WAR"


def test_scene_requires_heading_or_body():
    with pytest.raises(ValidationError):
        Scene(index=0, heading="", body="", token_count=0)


def test_movie_script_index_validation():
    ok = Scene(index=0, heading="INT. A", body="x", token_count=3)
    bad = Scene(index=5, heading="INT. B", body="y", token_count=3)
    with pytest.raises(ValidationError):
        MovieScript(movie_id="m", scenes=(ok, bad))


@pytest.mark.parametrize(
    "text,expected",
    [
        ("The cat, sat.", ["the", "cat", "sat"]),
        ("", []),
        ("DON'T-STOP 42!", ["don't-stop", "42"]),
        ("  ...  --  ", []),
        ("Ünïcøde  tökens!", ["ünïcøde", "tökens"]),
    ],
)
def test_tokenize(text, expected):
    assert tokenize(text) == expected


def test_split_sentences_basic():
    assert split_sentence_texts("He ran. She hid!") == ["He ran.", "She hid!"]


def test_split_sentences_abbreviation():
    assert split_sentence_texts("Dr. Lee spoke. End.") == ["Dr. Lee spoke.", "End."]


def test_split_sentences_no_terminator():
    assert split_sentence_texts("One sentence only") == ["One sentence only"]


def test_split_sentences_lowercase_continuation():
    assert split_sentence_texts("He arrived at 5 p.m. and left.") == [
        "He arrived at 5 p.m. and left."
    ]


def test_split_sentences_quote_start():
    assert split_sentence_texts('She said it. "Go home."') == ['She said it.', '"Go home."']


def test_split_sentences_requires_text():
    with pytest.raises(EmptyInput):
        split_sentences("  ", "m1")
    summary = split_sentences("A first. A second.", "m1")
    assert isinstance(summary, Summary)
    assert summary.sentences == ("A first.", "A second.")


def test_summary_json_round_trip():
    summary = split_sentences("A first. A second one?", "m9")
    assert summary_from_json(summary_to_json(summary)) == summary


def test_scenes_jsonl_round_trip():
    script = parse_script("Top matter\nINT. LAB - DAY\nA desk.\n\nEXT. STREET\nRain.", "m7")
    assert script_from_jsonl(scenes_to_jsonl(script)) == script


# --- property tests ---------------------------------------------------------

_slug = st.sampled_from(
    ["INT. LAB - DAY", "EXT. STREET", "est. riverside", "I/E. CAR - NIGHT", "INT/EXT HALL"]
)
_content = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\n\r"),
    max_size=24,
).filter(lambda s: not is_slugline(s))
_line = st.one_of(_slug, _content, st.just(""))
_script_text = st.lists(_line, min_size=1, max_size=30).map("\n".join).filter(
    lambda t: t.strip()
)


@given(_script_text)
@settings(max_examples=200)
def test_segmentation_is_lossless(text):
    script = parse_script(text, "m")
    expected = Counter(line.strip() for line in text.split("\n") if line.strip())
    actual: Counter = Counter()
    for scene in script.scenes:
        if not heading_is_synthesized(scene):
            actual[scene.heading] += 1
        for line in scene.body.split("\n"):
            if line.strip():
                actual[line.strip()] += 1
    assert actual == expected


@given(_script_text)
@settings(max_examples=200)
def test_parse_is_idempotent_on_reconstructed_text(text):
    once = parse_script(text, "m")
    again = parse_script(script_text(once), "m")
    assert again == once


@given(st.text(max_size=200))
@settings(max_examples=200)
def test_sentence_split_preserves_tokens(text):
    rejoined = " ".join(split_sentence_texts(text))
    assert tokenize(rejoined) == tokenize(text)


@given(st.text(max_size=200))
@settings(max_examples=200)
def test_tokenize_idempotent(text):
    tokens = tokenize(text)
    assert tokenize(" ".join(tokens)) == tokens
