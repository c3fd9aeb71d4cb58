import re
from collections import Counter

import pytest

from rootcause.core.textprep import (
    Pipeline,
    PrepConfig,
    TokenStream,
    build_spelling_vocabulary,
    camel_split,
    expand_contractions,
    normalize,
    porter_stem,
    singularize,
    spell_correct,
)

# Input/output pairs from the reference Porter vocabulary
PORTER_PAIRS = [
    ("caresses", "caress"), ("ponies", "poni"), ("ties", "ti"), ("caress", "caress"),
    ("cats", "cat"), ("feed", "feed"), ("agreed", "agre"), ("plastered", "plaster"),
    ("bled", "bled"), ("motoring", "motor"), ("sing", "sing"), ("conflated", "conflat"),
    ("troubled", "troubl"), ("sized", "size"), ("hopping", "hop"), ("tanned", "tan"),
    ("falling", "fall"), ("hissing", "hiss"), ("fizzed", "fizz"), ("failing", "fail"),
    ("filing", "file"), ("happy", "happi"), ("sky", "sky"), ("relational", "relat"),
    ("conditional", "condit"), ("rational", "ration"), ("digitizer", "digit"),
    ("operator", "oper"), ("feudalism", "feudal"), ("decisiveness", "decis"),
    ("hopefulness", "hope"), ("callousness", "callous"), ("triplicate", "triplic"),
    ("formative", "form"), ("formalize", "formal"), ("electrical", "electr"),
    ("hopeful", "hope"), ("goodness", "good"), ("revival", "reviv"), ("allowance", "allow"),
    ("inference", "infer"), ("airliner", "airlin"), ("adjustable", "adjust"),
    ("defensible", "defens"), ("irritant", "irrit"), ("replacement", "replac"),
    ("adjustment", "adjust"), ("dependent", "depend"), ("adoption", "adopt"),
    ("communism", "commun"), ("activate", "activ"), ("effective", "effect"),
    ("bowdlerize", "bowdler"), ("probate", "probat"), ("rate", "rate"), ("cease", "ceas"),
    ("controll", "control"), ("roll", "roll"), ("cat", "cat"),
]


@pytest.mark.parametrize("word, stem", PORTER_PAIRS)
def test_porter_reference_vocabulary(word, stem):
    assert porter_stem(word) == stem


@pytest.mark.parametrize("identifier, pieces", [
    ("getNamespaceForPrefix", ["get", "Namespace", "For", "Prefix"]),
    ("web_xml", ["web", "xml"]),
    ("HTML5Parser", ["HTML", "Parser"]),
    ("HRegionServer", ["H", "Region", "Server"]),
    ("", []),
    ("__42__", []),
])
def test_camel_split(identifier, pieces):
    assert camel_split(identifier) == pieces


def test_classifier_pipeline_example(classifier_prep):
    stream = normalize("Database connection stops action servlet from loading", classifier_prep, "R-1")
    assert stream.tokens == ("databas", "connect", "stop", "action", "servlet", "load")
    assert stream.source_id == "R-1"


def test_empty_text_gives_empty_stream(classifier_prep):
    assert len(normalize("", classifier_prep)) == 0


def test_camel_case_identifier_loses_short_piece(classifier_prep):
    assert normalize("HRegionServer", classifier_prep).tokens == ("region", "server")


def test_keywords_stopwords_digits_and_short_tokens_are_removed(classifier_prep):
    stream = normalize("The null pointer in public void foo_bar 42 x", classifier_prep)
    assert stream.tokens == ("pointer", "foo", "bar")


def test_every_token_is_lowercase_alphabetic_and_unfiltered(classifier_prep):
    text = ("NullPointerException thrown when the XMLParser reads web.xml; "
            "see org.apache.ant.Main#run() at line 42 - this isn't a 2nd_time issue!")
    stream = normalize(text, classifier_prep)
    assert stream.tokens
    for token in stream:
        assert re.fullmatch(r"[a-z]+", token)
        assert token not in classifier_prep.stopwords
        assert token not in classifier_prep.keywords
        assert len(token) >= classifier_prep.min_token_len


def test_normalizing_the_output_again_keeps_the_tokens(classifier_prep):
    # stems here are Porter fixed points; a stem like "databas" would shrink again to "databa"
    stream = normalize("ThreadPoolCrash: server region thread crash", classifier_prep)
    again = normalize(stream.text(), classifier_prep)
    assert Counter(again.tokens) == Counter(stream.tokens)


def test_normalize_is_deterministic(classifier_prep):
    text = "Connection pool exhausted after DatabaseMetaData lookups"
    assert normalize(text, classifier_prep) == normalize(text, classifier_prep)


def test_min_token_len_is_configurable():
    prep = PrepConfig(min_token_len=4)
    assert normalize("cpu load spike", prep).tokens == ("load", "spike")
    with pytest.raises(ValueError):
        PrepConfig(min_token_len=0)


# ============================================================================
# LDA pipeline
# ============================================================================

def test_lda_pipeline_implies_contractions_and_singularization(lda_prep, classifier_prep):
    assert lda_prep.pipeline is Pipeline.LDA
    assert lda_prep.expand_contractions and lda_prep.singularize
    assert not classifier_prep.expand_contractions and not classifier_prep.singularize


def test_expand_contractions():
    assert expand_contractions("It doesn't start") == "It does not start"
    assert expand_contractions("We can't log in, they're stuck") == "We cannot log in, they are stuck"
    assert expand_contractions("Won't fix") == "will not fix"


@pytest.mark.parametrize("word, singular", [
    ("queries", "query"), ("classes", "class"), ("bugs", "bug"), ("patches", "patch"),
    ("status", "status"), ("analysis", "analysis"), ("process", "process"), ("is", "is"),
])
def test_singularize(word, singular):
    assert singularize(word) == singular


def test_noun_verb_filter_drops_known_modifiers(lda_prep):
    assert normalize("broken server actually crashes", lda_prep).tokens == ("server", "crash")


def test_noun_verb_filter_can_be_switched_off():
    prep = PrepConfig.lda(pos_filter=False)
    assert "broken" in normalize("broken server", prep).tokens


def test_spell_correction_uses_frequent_neighbours():
    vocabulary = build_spelling_vocabulary(["connection"] * 5 + ["conection lost"])
    assert spell_correct("conection", vocabulary) == "connection"
    assert spell_correct("lost", vocabulary) == "lost"
    assert spell_correct("connection", vocabulary) == "connection"


def test_spell_correction_in_the_lda_pipeline():
    prep = PrepConfig.lda(spell_correction=True).with_spell_vocabulary(
        ["connection refused"] * 5 + ["conection refused"]
    )
    assert normalize("conection", prep).tokens == ("connect",)


def test_token_stream_text():
    assert TokenStream(("server", "crash"), "R-1").text() == "server crash"
