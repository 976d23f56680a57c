"""Per-comment sentiment labels and their numeric scores.

Two scorer flavours are provided behind one small interface:

* ``PassthroughScorer`` consumes labels that arrived with the data
  (e.g. produced upstream by a classifier run).
* ``LexiconScorer`` is a self-contained bag-of-terms scorer so the
  pipeline works end to end without any model artifacts.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import TYPE_CHECKING, Iterable

logger = logging.getLogger(__name__)

if TYPE_CHECKING:
    from .ingest import Comment


class ScoringError(ValueError):
    """A comment could not be scored (e.g. passthrough without a label)."""


class SentimentLabel(Enum):
    """Three-class polarity; ``.score`` is its numeric image in {-1, 0, +1}."""

    NEGATIVE = ("negative", -1)
    NEUTRAL = ("neutral", 0)
    POSITIVE = ("positive", 1)

    score: int

    def __new__(cls, name: str, score: int):
        member = object.__new__(cls)
        member._value_ = name
        member.score = score
        return member


_NAME_TO_LABEL = {label.value: label for label in SentimentLabel}


def parse_label(label_raw: str) -> SentimentLabel:
    """Parse a textual label, case-insensitively."""
    try:
        return _NAME_TO_LABEL[label_raw.strip().lower()]
    except KeyError:
        raise ValueError(
            f"unknown sentiment label {label_raw!r}; "
            f"accepted values: negative, neutral, positive"
        ) from None


def map_label_to_score(label: SentimentLabel) -> int:
    """Negative -> -1, Neutral -> 0, Positive -> +1."""
    return label.score


@dataclass(slots=True)
class ScoredComment:
    comment: "Comment"
    label: SentimentLabel
    score: int  # in {-1, 0, +1}, always consistent with label


# Tokens are maximal runs of alphanumeric characters (unicode-aware,
# underscore excluded); everything else is a boundary.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Lexicon:
    """Disjoint positive/negative term sets for bag-of-terms scoring."""

    positive_terms: frozenset[str]
    negative_terms: frozenset[str]

    def __post_init__(self):
        overlap = self.positive_terms & self.negative_terms
        if overlap:
            raise ValueError(
                f"lexicon term sets overlap: {sorted(overlap)[:5]}"
            )


def parse_lexicon(text: str) -> Lexicon:
    """Parse the lexicon file format.

    INI-like sections ``[positive]`` and ``[negative]``, one lowercase
    term per line, ``#`` starts a comment.
    """
    sections: dict[str, set[str]] = {"positive": set(), "negative": set()}
    current: set[str] | None = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in sections:
                raise ValueError(
                    f"lexicon line {lineno}: unknown section [{name}]; "
                    "expected [positive] or [negative]"
                )
            current = sections[name]
        elif current is None:
            raise ValueError(
                f"lexicon line {lineno}: term {line!r} outside any section"
            )
        else:
            current.add(line.lower())
    return Lexicon(
        positive_terms=frozenset(sections["positive"]),
        negative_terms=frozenset(sections["negative"]),
    )


def load_lexicon(path: str) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return parse_lexicon(fh.read())


def default_lexicon() -> Lexicon:
    """The lexicon shipped with the package."""
    text = resources.files("sentidrift").joinpath("data/default_lexicon.txt").read_text("utf-8")
    return parse_lexicon(text)


class PassthroughScorer:
    """Uses the label already attached to the comment."""

    def score(self, comment: "Comment") -> ScoredComment:
        label = comment.label
        if label is None:
            raise ScoringError(
                f"comment {comment.id!r} has no precomputed label; "
                "passthrough scoring requires one"
            )
        return ScoredComment(comment, label, label.score)

    def score_many(self, comments: Iterable["Comment"]) -> tuple[list[ScoredComment], int]:
        """Score a batch, skipping unlabeled comments with a warning.

        Returns (scored, skipped count).
        """
        if not isinstance(comments, list):
            comments = list(comments)
        scored = [
            ScoredComment(c, label, label.score)
            for c in comments
            if (label := c.label) is not None
        ]
        failures = len(comments) - len(scored)
        if failures:
            sample = [c.id for c in comments if c.label is None][:5]
            logger.warning(
                "%d comment(s) have no precomputed label (e.g. %s); "
                "skipped by the passthrough scorer",
                failures, ", ".join(sample),
            )
        return scored, failures


class LexiconScorer:
    """Labels by the sign of (positive hits - negative hits); tie -> Neutral."""

    def __init__(self, lexicon: Lexicon | None = None):
        self.lexicon = lexicon if lexicon is not None else default_lexicon()

    def score(self, comment: "Comment") -> ScoredComment:
        pos_terms = self.lexicon.positive_terms
        neg_terms = self.lexicon.negative_terms
        hits = 0
        for token in tokenize(comment.text):
            if token in pos_terms:
                hits += 1
            elif token in neg_terms:
                hits -= 1
        if hits > 0:
            label = SentimentLabel.POSITIVE
        elif hits < 0:
            label = SentimentLabel.NEGATIVE
        else:
            label = SentimentLabel.NEUTRAL
        return ScoredComment(comment, label, label.score)

    def score_many(self, comments: Iterable["Comment"]) -> tuple[list[ScoredComment], int]:
        score = self.score
        return [score(c) for c in comments], 0


Scorer = PassthroughScorer | LexiconScorer


def make_scorer(mode: str, lexicon: Lexicon | None = None) -> Scorer:
    if mode == "passthrough":
        return PassthroughScorer()
    if mode == "lexicon":
        return LexiconScorer(lexicon)
    raise ValueError(f"unknown scorer mode {mode!r}; expected passthrough or lexicon")


def score_comment(comment: "Comment", scorer: Scorer) -> ScoredComment:
    return scorer.score(comment)


def score_all(comments: Iterable["Comment"], scorer: Scorer) -> list[ScoredComment]:
    score = scorer.score
    return [score(c) for c in comments]
