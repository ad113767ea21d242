"""Tokenization, embedding-path cleaning, POS tagging and lexicon sentiment."""
from __future__ import annotations

import enum
import re
import string
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence

_PUNCT = string.punctuation + "“”‘’«»…–—"


def normalize_tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace runs."""
    return text.lower().split()


def strip_punct(token: str) -> str:
    return token.strip(_PUNCT)


def clean_for_embedding(
    tokens: Sequence[str],
    stopwords: Iterable[str] = (),
    lemmatizer: Mapping[str, str] | Callable[[str], str] | None = None,
) -> list[str]:
    """Strip digits and punctuation, drop emptied tokens and stopwords, lemmatize.

    Only alphabetic characters survive, so ``"v1.0.9"`` becomes ``"v"``.
    """
    stop = set(stopwords)
    if lemmatizer is None:
        lemma = lambda w: w  # noqa: E731
    elif callable(lemmatizer):
        lemma = lemmatizer
    else:
        lemma = lambda w: lemmatizer.get(w, w)  # noqa: E731
    out = []
    for tok in tokens:
        core = "".join(ch for ch in tok if ch.isalpha())
        if core and core not in stop:
            out.append(lemma(core))
    return out


class PosTag(enum.Enum):
    NOUN = "Noun"
    VERB = "Verb"
    ADJECTIVE = "Adjective"
    ADVERB = "Adverb"
    CONJUNCTION = "Conjunction"
    NUMERAL = "Numeral"
    PRONOUN = "Pronoun"
    DETERMINER = "Determiner"
    POSTPOSITION = "Postposition"
    PUNCTUATION = "Punctuation"
    UNKNOWN = "Unknown"


class Tagger(Protocol):
    def tag(self, token: str) -> PosTag: ...


_DETERMINERS = frozenset(
    "the a an this that these those each every some any no all both either neither another such "
    "what which whose".split()
)
_PRONOUNS = frozenset(
    "i you he she it we they me him her us them my your his its our their mine yours hers ours "
    "theirs myself yourself himself herself itself ourselves themselves someone something anyone "
    "anything everyone everything nobody nothing who whom".split()
)
_CONJUNCTIONS = frozenset(
    "and or but nor so yet because although though since while if unless whereas than whether "
    "until when once".split()
)
# English prepositions share the adposition slot.
_ADPOSITIONS = frozenset(
    "in on at by for with about against between into through during before after above below to "
    "from up down of off over under via within without per across onto upon near inside outside "
    "along around behind beside like".split()
)
_ADVERBS = frozenset(
    "not very also only just again still never always sometimes often now then here there too "
    "already even well instead however soon later together anymore else almost rather quite "
    "n't".split()
)
_VERBS = frozenset(
    "be is are was were been being am have has had do does did can could should would will shall "
    "may might must get make add send open close show display come go fail work fix need use "
    "click update create delete remove change see appear load save play set run check occur "
    "write test design request put give take keep let seem start stop select enter return "
    "try want know find move provide support allow sync restart install login log".split()
)
_NOUNS = frozenset(
    "order page server error bug user screen message room data system version setting file image "
    "icon logo document menu button list channel service record problem issue time name number "
    "address connection content text video email e-mail application app panel customer hotel tv "
    "device report field value mother baby protocol wall setup filter wifi ethernet mac id type "
    "guest language admin database table date password account network player media theme "
    "link key task story epic request test design language option status view form window "
    "music area section part feature item product price payment template".split()
)
_ADJECTIVES = frozenset(
    "new old same different wrong correct empty other good bad multiple available main full free "
    "high low big small large long short last first next previous current wrong slow fast "
    "invalid valid incorrect broken successful possible necessary".split()
)
_NUMBER_WORDS = frozenset(
    "zero one two three four five six seven eight nine ten eleven twelve hundred thousand "
    "first second third".split()
)
_NUMERAL_RE = re.compile(r"^[+-]?\d[\d.,:/%-]*$")


class EnglishTagger:
    """Closed-class lexicon plus suffix rules; anything else is Unknown."""

    def tag(self, token: str) -> PosTag:
        word = strip_punct(token.lower())
        if not word:
            return PosTag.PUNCTUATION
        if _NUMERAL_RE.match(word) or word in _NUMBER_WORDS:
            return PosTag.NUMERAL
        for vocab, tag in (
            (_DETERMINERS, PosTag.DETERMINER),
            (_PRONOUNS, PosTag.PRONOUN),
            (_CONJUNCTIONS, PosTag.CONJUNCTION),
            (_ADPOSITIONS, PosTag.POSTPOSITION),
            (_ADVERBS, PosTag.ADVERB),
            (_VERBS, PosTag.VERB),
            (_NOUNS, PosTag.NOUN),
            (_ADJECTIVES, PosTag.ADJECTIVE),
        ):
            if word in vocab:
                return tag
        if word.endswith("n't"):
            return PosTag.VERB
        return _suffix_tag(word)


def _suffix_tag(word: str) -> PosTag:
    if len(word) < 4:
        return PosTag.UNKNOWN
    if word.endswith("ly"):
        return PosTag.ADVERB
    if word.endswith(("tion", "sion", "ment", "ness", "ity", "ance", "ence", "ship")):
        return PosTag.NOUN
    if word.endswith(("ing", "ed")):
        return PosTag.VERB
    if word.endswith(("able", "ible", "ful", "ous", "ive", "less")):
        return PosTag.ADJECTIVE
    if word.endswith("s") and not word.endswith(("ss", "us", "is")):
        stem = word[:-1]
        if stem in _NOUNS or _suffix_tag(stem) is PosTag.NOUN:
            return PosTag.NOUN
        return PosTag.VERB
    return PosTag.UNKNOWN


def pos_tag(tokens: Sequence[str], tagger: Tagger | None = None) -> list[tuple[str, PosTag]]:
    """Tag each token; a tagger exception yields Unknown for that token only."""
    tagger = tagger or EnglishTagger()
    out = []
    for tok in tokens:
        try:
            tag = tagger.tag(tok)
            if not isinstance(tag, PosTag):
                tag = PosTag(tag)
        except Exception:
            tag = PosTag.UNKNOWN
        out.append((tok, tag))
    return out


DEFAULT_NEGATIONS = (
    "not", "no", "never", "cannot", "n't", "don't", "doesn't", "didn't", "isn't", "aren't",
    "wasn't", "weren't", "can't", "won't", "couldn't", "shouldn't", "wouldn't", "hasn't",
    "haven't", "hadn't",
)


@dataclass(frozen=True)
class SentimentLexicon:
    entries: Mapping[str, tuple[float, float]]
    negation_markers: frozenset[str] = field(default_factory=lambda: frozenset(DEFAULT_NEGATIONS))
    necessity_markers: frozenset[str] = frozenset({"should"})

    def __post_init__(self):
        for word, (pol, subj) in self.entries.items():
            if not (-1.0 <= pol <= 1.0) or not (0.0 <= subj <= 1.0):
                raise ValueError(f"lexicon entry out of range: {word!r} -> ({pol}, {subj})")

    @classmethod
    def load(cls, path: str | Path, **kw) -> "SentimentLexicon":
        with open(path, encoding="utf-8") as fh:
            return cls(_parse_lexicon(fh.read()), **kw)


def _parse_lexicon(text: str) -> dict[str, tuple[float, float]]:
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 3:
            raise ValueError(f"lexicon line {lineno}: expected word<TAB>polarity<TAB>subjectivity")
        entries[parts[0].lower()] = (float(parts[1]), float(parts[2]))
    return entries


def sentiment(tokens: Sequence[str], lex: SentimentLexicon) -> tuple[float, float]:
    """Mean polarity/subjectivity over lexicon hits with one-token negation lookback."""
    words = [strip_punct(t.lower()) or t.lower() for t in tokens]
    pols, subjs = [], []
    for i, word in enumerate(words):
        entry = lex.entries.get(word)
        if entry is None:
            continue
        pol, subj = entry
        if i > 0 and words[i - 1] in lex.negation_markers:
            pol = -pol
        pols.append(pol)
        subjs.append(subj)
    if not pols:
        return 0.0, 0.0
    pol = min(1.0, max(-1.0, sum(pols) / len(pols)))
    subj = min(1.0, max(0.0, sum(subjs) / len(subjs)))
    return pol, subj


def _data_text(name: str) -> str:
    return resources.files("triage.data").joinpath(name).read_text(encoding="utf-8")


def default_lexicon() -> SentimentLexicon:
    return SentimentLexicon(_parse_lexicon(_data_text("lexicon_en.tsv")))


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    text = _data_text("stopwords_en.txt") if path is None else Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def load_lemmas(path: str | Path | None = None) -> dict[str, str]:
    text = _data_text("lemmas_en.tsv") if path is None else Path(path).read_text(encoding="utf-8")
    lemmas = {}
    for line in text.splitlines():
        if line.strip():
            surface, lemma = line.split("\t")
            lemmas[surface.strip()] = lemma.strip()
    return lemmas
