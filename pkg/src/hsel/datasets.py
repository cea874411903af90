"""Deterministic synthetic corpora for demos and end-to-end checks.

Real newsroom corpora are external; the bundled corpus is a two-class text
set with class-indicative token distributions, strong enough signal for
every base learner to clear the random baseline comfortably.
"""

from __future__ import annotations

import random
from importlib import resources

_TOPIC_A = [
    "market", "economy", "budget", "senate", "policy", "tax", "trade",
    "minister", "inflation", "parliament", "report", "council",
]
_TOPIC_B = [
    "miracle", "cure", "aliens", "secret", "shocking", "exposed",
    "celebrity", "hoax", "conspiracy", "banned", "scandal", "rumor",
]
_SHARED = [
    "news", "today", "people", "country", "world", "story", "week",
    "city", "group", "video", "public", "online",
]

LABELS = ("legit", "fake")


def synthetic_news_corpus(n_docs: int = 400, seed: int = 11) -> list[tuple[str, str]]:
    """Generate (text, label-string) rows, balanced across the two classes.

    Each document mixes class-specific and shared tokens, with occasional
    URLs and punctuation so the preprocessing stages have real work to do.
    A pure function of (n_docs, seed).
    """
    rng = random.Random(seed)
    rows = []
    for i in range(n_docs):
        label = i % 2
        own = _TOPIC_A if label == 0 else _TOPIC_B
        other = _TOPIC_B if label == 0 else _TOPIC_A
        length = rng.randint(8, 16)
        words = []
        for _ in range(length):
            roll = rng.random()
            if roll < 0.55:
                words.append(rng.choice(own))
            elif roll < 0.6:
                words.append(rng.choice(other))
            else:
                words.append(rng.choice(_SHARED))
        if rng.random() < 0.15:
            words.insert(rng.randrange(len(words)), f"http://example.org/{i}")
        if rng.random() < 0.3:
            words[-1] = words[-1] + "!!"
        text = "The " + " ".join(words) + "."
        rows.append((text, LABELS[label]))
    return rows


def bundled_corpus_path() -> str:
    """Filesystem path of the shipped 400-document toy corpus."""
    return str(resources.files("hsel").joinpath("data/toy_corpus.csv"))
