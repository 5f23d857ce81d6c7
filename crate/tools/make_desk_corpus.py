#!/usr/bin/env python3
"""Build data/desk_corpus_pl.txt: a ~110 KB Polish verse-like corpus.

The file starts with data/pan_tadeusz_opening.txt and continues with
13-syllable lines whose words are drawn from the Polish unigram frequency
table shipped in the `wordfreq` wheel (small_pl.msgpack.gz).

    pip download --no-deps wordfreq && pip install msgpack
    python3 tools/make_desk_corpus.py path/to/small_pl.msgpack.gz

Output is deterministic for a given frequency table.
"""

import gzip
import random
import re
import sys
from pathlib import Path

import msgpack

VOWELS = set("aąeęioóuyé")
WORD_RE = re.compile(r"^[a-ząćęłńóśźż]+$")
SHORT_OK = {"a", "i", "o", "u", "w", "z"}
TARGET_BYTES = 110_000
SYLLABLES = 13


def syllables(word: str) -> int:
    n = 0
    for i, c in enumerate(word):
        if c in VOWELS and not (c == "i" and i + 1 < len(word) and word[i + 1] in VOWELS):
            n += 1
    return n


def load_words(path: str):
    buckets = msgpack.unpackb(gzip.open(path).read(), raw=False)
    words, weights = [], []
    for idx, bucket in enumerate(buckets[1:], start=1):
        freq = 10.0 ** (-idx / 100.0)
        for w in bucket:
            if not WORD_RE.match(w):
                continue
            if len(w) == 1 and w not in SHORT_OK:
                continue
            if syllables(w) > 6:
                continue
            words.append(w)
            weights.append(freq)
    return words, weights


def make_line(rng, words, weights):
    while True:
        out, total = [], 0
        for _ in range(40):
            w = rng.choices(words, weights)[0]
            s = syllables(w)
            if total + s > SYLLABLES:
                continue
            out.append(w)
            total += s
            if total == SYLLABLES:
                return out


def decorate(rng, line):
    line = list(line)
    for i, w in enumerate(line):
        r = rng.random()
        if r < 0.004 and len(w) > 1:
            line[i] = w.upper()
        elif r < 0.05:
            line[i] = w.capitalize()
    line[0] = line[0].capitalize() if not line[0].isupper() else line[0]
    text = []
    for i, w in enumerate(line):
        text.append(w)
        if i + 1 < len(line) and rng.random() < 0.08:
            text[-1] += rng.choice([",", ",", ",", ";", " —", ":"])
    if len(text) > 3 and rng.random() < 0.03:
        a = rng.randrange(1, len(text) - 2)
        text[a] = "(" + text[a]
        text[a + 1] = text[a + 1] + ")"
    if len(text) > 3 and rng.random() < 0.03:
        a = rng.randrange(0, len(text) - 2)
        text[a] = "„" + text[a]
        text[a + 1] = text[a + 1] + "”"
    end = rng.choices(["", ",", ".", ";", "!", "?", ":", "..."], [8, 10, 6, 3, 2, 1, 1, 1])[0]
    return " ".join(text) + end


def main():
    root = Path(__file__).resolve().parent.parent
    words, weights = load_words(sys.argv[1])
    rng = random.Random(1834)
    lines = (root / "data" / "pan_tadeusz_opening.txt").read_text(encoding="utf-8").splitlines()
    lines.append("")
    size = sum(len(l.encode()) + 1 for l in lines)
    since_break = 0
    while size < TARGET_BYTES:
        l = decorate(rng, make_line(rng, words, weights))
        lines.append(l)
        size += len(l.encode()) + 1
        since_break += 1
        if since_break > 12 and rng.random() < 0.08:
            lines.append("")
            size += 1
            since_break = 0
    (root / "data" / "desk_corpus_pl.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
