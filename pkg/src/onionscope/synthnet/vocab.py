"""Word tables for synthetic page text.

Category vocabularies are pairwise disjoint so topic-term presence separates
them; language fillers are built over disjoint letter sets so their character
trigrams never collide across languages.
"""

from __future__ import annotations

import random

CATEGORY_VOCAB: dict[str, tuple[str, ...]] = {
    "social media": (
        "profile", "follower", "timeline", "repost", "mention", "hashtag",
        "upvote", "thread", "moderator", "avatar", "subscriber", "feed",
    ),
    "marketplace": (
        "listing", "vendor", "escrow", "checkout", "shipping", "refund",
        "stock", "cart", "invoice", "discount", "bulk", "courier",
    ),
    "pornography": (
        "gallery", "model", "webcam", "studio", "premium", "clip",
        "membership", "explicit", "performer", "archive", "preview", "scene",
    ),
    "indexer": (
        "directory", "catalog", "crawler", "ranking", "sitemap", "query",
        "indexed", "lookup", "pagerank", "spider", "metadata", "results",
    ),
    "crypto": (
        "wallet", "exchange", "mixer", "satoshi", "ledger", "blockchain",
        "deposit", "withdrawal", "tumbler", "coin", "custody", "swap",
    ),
    "other": (
        "journal", "manifesto", "tutorial", "mirror", "pastebin", "hosting",
        "library", "weather", "chess", "recipe", "poetry", "radio",
    ),
}

ILLICIT_VOCAB: tuple[str, ...] = (
    "contraband", "counterfeit", "unlicensed", "stolen", "forged",
    "laundering", "smuggled", "untraceable", "narcotic", "exploit",
)

# Letter pools per synthetic language; pairwise disjoint so trigrams are
# perfectly language-specific.
_LANGUAGE_LETTERS: dict[str, str] = {
    "aqua": "aqux",
    "bravo": "bvoz",
    "cedar": "cedy",
}

LANGUAGES: tuple[str, ...] = tuple(_LANGUAGE_LETTERS)


def language_filler(language: str, n_words: int = 12) -> tuple[str, ...]:
    """Fixed per-language filler lexicon (deterministic, not seed-dependent)."""
    letters = _LANGUAGE_LETTERS[language]
    rng = random.Random(f"filler:{language}")
    words = []
    seen = set()
    while len(words) < n_words:
        w = "".join(rng.choice(letters) for _ in range(rng.randint(4, 7)))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return tuple(words)


TRACKING_SNIPPET = (
    'var c = document.createElement("canvas");'
    "var ctx = c.getContext('2d');"
    'ctx.measureText("probe");'
    "var pixels = c.toDataURL();"
    "var cores = navigator.hardwareConcurrency;"
)

BENIGN_SNIPPET = (
    'function toggleMenu() { var m = document.getElementById("menu");'
    ' m.hidden = !m.hidden; }'
)
