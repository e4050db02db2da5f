"""Ordered, configurable text normalisation for social-media messages.

Default stage order::

    retweet, url, mention, demojize, cashtag, hashtag, contraction,
    squeeze, punctuation, casefold, tokenize, stopwords

Every stage but ``tokenize`` can be disabled. Text stages may be reordered;
``tokenize`` and ``stopwords`` always come last.
"""
from __future__ import annotations

import csv
import io
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from ..errors import ValidationError
from . import resources

TEXT_STAGES = (
    "retweet",
    "url",
    "mention",
    "demojize",
    "cashtag",
    "hashtag",
    "contraction",
    "squeeze",
    "punctuation",
    "casefold",
)
DEFAULT_STAGES = TEXT_STAGES + ("tokenize", "stopwords")

_RETWEET = re.compile(r"^\s*RT\s+@")
_URL = re.compile(r"(?:[a-z][a-z0-9+.-]*://|www\.)\S*", re.IGNORECASE)
_MENTION = re.compile(r"@\w+")
_CASHTAG = re.compile(r"\$([A-Za-z][A-Za-z0-9]*)")
_HASHTAG = re.compile(r"#(\w+)")
_HASHTAG_PARTS = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+|[^\W\d_A-Za-z]+")

# Emoji blocks; skin-tone modifiers, joiners and variation selectors are
# dropped rather than named.
_EMOJI_RANGES = ((0x1F000, 0x1FAFF), (0x2600, 0x27BF), (0x2300, 0x23FF), (0x2B00, 0x2BFF))
_EMOJI_SILENT = frozenset([0x200D, 0xFE0E, 0xFE0F, 0x20E3, *range(0x1F3FB, 0x1F400), *range(0xE0020, 0xE0080)])


@dataclass(frozen=True)
class CleanMessage:
    tokens: tuple[str, ...]
    dropped: bool = False


@dataclass(frozen=True)
class PipelineConfig:
    stages: tuple[str, ...] = DEFAULT_STAGES
    disabled: frozenset[str] = frozenset()
    stopwords: frozenset[str] = resources.STOPWORDS
    contractions: Mapping[str, str] = field(default_factory=lambda: dict(resources.CONTRACTIONS))
    emoji_names: Mapping[str, str] = field(default_factory=dict)
    squeeze_limit: int = 2
    hashtag_dictionary: frozenset[str] = resources.HASHTAG_WORDS

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "disabled", frozenset(self.disabled))
        if sorted(self.stages) != sorted(DEFAULT_STAGES):
            raise ValidationError(f"stages must be a permutation of {DEFAULT_STAGES}")
        if self.stages[-2:] != ("tokenize", "stopwords"):
            raise ValidationError("tokenize and stopwords must be the last two stages")
        unknown = self.disabled - set(DEFAULT_STAGES)
        if unknown:
            raise ValidationError(f"unknown stages {sorted(unknown)}")
        if "tokenize" in self.disabled:
            raise ValidationError("tokenize cannot be disabled")
        if self.squeeze_limit < 1:
            raise ValidationError("squeeze_limit must be >= 1")

    def enabled(self, stage: str) -> bool:
        return stage not in self.disabled

    def describe(self) -> dict:
        """JSON-friendly summary for run snapshots."""
        return {
            "stages": list(self.stages),
            "disabled": sorted(self.disabled),
            "squeeze_limit": self.squeeze_limit,
            "resources_version": resources.RESOURCES_VERSION,
            "unicode_version": unicodedata.unidata_version,
        }


def _is_emoji(cp: int) -> bool:
    return any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES)


def emoji_token(ch: str, overrides: Mapping[str, str] | None = None) -> str:
    """Lowercase underscore-joined name of an emoji, or ``""`` if it has none."""
    if overrides and ch in overrides:
        return overrides[ch]
    name = unicodedata.name(ch, "")
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def demojize(text: str, overrides: Mapping[str, str] | None = None) -> str:
    out = []
    for ch in text:
        cp = ord(ch)
        if cp in _EMOJI_SILENT:
            out.append(" ")
        elif _is_emoji(cp):
            out.append(f" {emoji_token(ch, overrides)} ")
        else:
            out.append(ch)
    return "".join(out)


def segment_hashtag(body: str, dictionary: Iterable[str] = resources.HASHTAG_WORDS) -> list[str]:
    """Split a hashtag body (without ``#``) into lowercase words.

    Underscore, camelCase and digit boundaries are split first. Parts that
    were entirely lowercase are then cut by greedy longest-prefix match
    against ``dictionary``; whatever cannot be matched stays as one token.
    """
    words = dictionary if isinstance(dictionary, (set, frozenset)) else frozenset(dictionary)
    max_len = max((len(w) for w in words), default=0)
    tokens: list[str] = []
    for chunk in body.split("_"):
        for part in _HASHTAG_PARTS.findall(chunk):
            if part.isascii() and part.isalpha() and part.islower():
                tokens.extend(_greedy_split(part, words, max_len))
            else:
                tokens.append(part.lower())
    return tokens


def _greedy_split(s: str, words: frozenset[str], max_len: int) -> list[str]:
    out = []
    i = 0
    while i < len(s):
        for j in range(min(len(s), i + max_len), i, -1):
            if s[i:j] in words:
                out.append(s[i:j])
                i = j
                break
        else:
            out.append(s[i:])
            break
    return out


def _simple_lower(ch: str) -> str:
    low = ch.lower()
    # one-to-one mapping only (U+0130 lowercases to two code points)
    return low if len(low) == 1 else low[0]


def casefold(text: str) -> str:
    return "".join(_simple_lower(ch) for ch in text)


def squeeze(text: str, limit: int = 2) -> str:
    """Shorten runs of more than ``limit`` identical letters to ``limit``.

    Letters are compared after lowercasing, so "sOOo" is one run.
    """
    out: list[str] = []
    run_key = None
    run_len = 0
    for ch in text:
        key = _simple_lower(ch)
        if key == run_key:
            run_len += 1
        else:
            run_key = key if unicodedata.category(key).startswith("L") else None
            run_len = 1
        if run_key is None or run_len <= limit:
            out.append(ch)
    return "".join(out)


def strip_punctuation(text: str) -> str:
    """Replace everything except letters, marks, digits, underscore and
    whitespace with a space."""
    return "".join(
        ch if ch == "_" or ch.isspace() or unicodedata.category(ch)[0] in "LNM" else " " for ch in text
    )


def expand_contractions(text: str, table: Mapping[str, str]) -> str:
    if not table:
        return text
    text = text.replace("’", "'").replace("‘", "'")
    keys = sorted(table, key=len, reverse=True)
    pattern = re.compile(r"(?<![\w'])(" + "|".join(re.escape(k) for k in keys) + r")(?![\w'])", re.IGNORECASE)
    lowered = {k.lower(): v for k, v in table.items()}
    return pattern.sub(lambda m: lowered[m.group(1).lower()], text)


def _stage_functions(config: PipelineConfig) -> dict[str, Callable[[str], str]]:
    return {
        "url": lambda t: _URL.sub(" ", t),
        "mention": lambda t: _MENTION.sub(" ", t),
        "demojize": lambda t: demojize(t, config.emoji_names),
        "cashtag": lambda t: _CASHTAG.sub(lambda m: f" {m.group(1).lower()} ", t),
        "hashtag": lambda t: _HASHTAG.sub(
            lambda m: " " + " ".join(segment_hashtag(m.group(1), config.hashtag_dictionary)) + " ", t
        ),
        "contraction": lambda t: expand_contractions(t, config.contractions),
        "squeeze": lambda t: squeeze(t, config.squeeze_limit),
        "punctuation": strip_punctuation,
        "casefold": casefold,
    }


def preprocess(raw: str, config: PipelineConfig | None = None) -> CleanMessage:
    config = config or PipelineConfig()
    funcs = _stage_functions(config)
    text = raw
    for stage in config.stages:
        if not config.enabled(stage):
            continue
        if stage == "retweet":
            if _RETWEET.match(text):
                return CleanMessage((), dropped=True)
        elif stage == "tokenize":
            break
        else:
            text = funcs[stage](text)
    tokens = [tok.strip("_") for tok in text.split()]
    tokens = [tok for tok in tokens if tok]
    if config.enabled("stopwords"):
        tokens = [tok for tok in tokens if tok not in config.stopwords]
    return CleanMessage(tuple(tokens))


def preprocess_many(texts: Sequence[str], config: PipelineConfig | None = None) -> list[CleanMessage]:
    config = config or PipelineConfig()
    return [preprocess(t, config) for t in texts]


def write_cleaned_corpus(message_ids: Sequence[str], cleaned: Sequence[CleanMessage]) -> tuple[str, str]:
    """Return (corpus text, sidecar CSV).

    The corpus has one line per message with space-separated tokens (empty
    for dropped messages); the sidecar maps message ids to the dropped flag.
    """
    if len(message_ids) != len(cleaned):
        raise ValidationError("message_ids and cleaned messages differ in length")
    corpus = "".join(" ".join(c.tokens) + "\n" for c in cleaned)
    side = io.StringIO()
    writer = csv.writer(side, lineterminator="\n")
    writer.writerow(["message_id", "dropped"])
    for mid, c in zip(message_ids, cleaned):
        writer.writerow([mid, int(c.dropped)])
    return corpus, side.getvalue()
