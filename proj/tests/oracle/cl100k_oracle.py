#!/usr/bin/env python3
"""Reference cl100k_base byte-pair encoder used to freeze chunking fixtures.

Independent of the C++ tokenizer: pre-tokenization goes through the `regex`
module with the published cl100k split pattern, and merges follow the
lowest-rank-first procedure over the published rank file.

Usage:
  cl100k_oracle.py spans FILE         # print "start end" byte span per token
  cl100k_oracle.py count FILE         # print the token count
  cl100k_oracle.py random-check N     # emit N random texts + spans as JSONL
  cl100k_oracle.py selfcheck [RANKS]  # compare against published encodings
"""

import base64
import hashlib
import json
import pathlib
import random
import sys

import regex

PATTERN = regex.compile(
    r"""(?i:'s|'t|'re|'ve|'m|'ll|'d)|[^\r\n\p{L}\p{N}]?\p{L}+|\p{N}{1,3}| ?[^\s\p{L}\p{N}]+[\r\n]*|\s*[\r\n]+|\s+(?!\S)|\s+"""
)

RANK_FILE = pathlib.Path(__file__).resolve().parents[2] / "data" / "cl100k_base.tiktoken"


def load_ranks(path=RANK_FILE):
    ranks = {}
    with open(path, "rb") as fh:
        for line in fh:
            if not line.strip():
                continue
            tok, rank = line.split()
            ranks[base64.b64decode(tok)] = int(rank)
    return ranks


def bpe_parts(piece, ranks):
    if piece in ranks:
        return [piece]
    parts = [bytes([b]) for b in piece]
    while len(parts) > 1:
        best = None
        for i in range(len(parts) - 1):
            r = ranks.get(parts[i] + parts[i + 1])
            if r is not None and (best is None or r < best[0]):
                best = (r, i)
        if best is None:
            break
        i = best[1]
        parts[i:i + 2] = [parts[i] + parts[i + 1]]
    return parts


def bpe_lengths(piece, ranks):
    return [len(p) for p in bpe_parts(piece, ranks)]


def encode(text, ranks):
    ids = []
    for m in PATTERN.finditer(text):
        ids.extend(ranks[p] for p in bpe_parts(m.group(0).encode("utf-8"), ranks))
    return ids


# Published encodings from the tiktoken documentation, and the digest of the
# published rank file.
KNOWN = {
    "hello world": [15339, 1917],
    "tiktoken is great!": [83, 1609, 5963, 374, 2294, 0],
}
RANK_FILE_SHA256 = "223921b76ee99bde995b7ff738513eef100fb51d18c93597a113bcffe865b2a7"


def token_spans(text, ranks):
    spans = []
    offset = 0
    cursor = 0
    for m in PATTERN.finditer(text):
        assert m.start() == cursor, "split pattern must cover the text"
        cursor = m.end()
        piece = m.group(0).encode("utf-8")
        for n in bpe_lengths(piece, ranks):
            spans.append((offset, offset + n))
            offset += n
    return spans


ALPHABET = (
    list("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789")
    + list(" \n\t\r.,;:!?'\"()[]{}<>/\\-_=+*&^%$#@~`|")
    + ["  ", "\n\n", "'s", "'re", "'LL", "é", "ß", "中文", "日本", "😀", "Ω", "١٢٣", " ", "　", "ﬁ"]
)


def random_text(rng, length):
    out = []
    while len(out) < length:
        out.append(rng.choice(ALPHABET))
    return "".join(out)


def main():
    cmd = sys.argv[1]
    if cmd == "selfcheck":
        path = pathlib.Path(sys.argv[2]) if len(sys.argv) > 2 else RANK_FILE
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        if digest != RANK_FILE_SHA256:
            raise SystemExit(f"rank file digest {digest} != {RANK_FILE_SHA256}")
        ranks = load_ranks(path)
        for text, want in KNOWN.items():
            got = encode(text, ranks)
            if got != want:
                raise SystemExit(f"{text!r}: {got} != {want}")
        print("ok")
        return
    ranks = load_ranks()
    if cmd == "spans":
        text = pathlib.Path(sys.argv[2]).read_text(encoding="utf-8")
        for s, e in token_spans(text, ranks):
            print(s, e)
    elif cmd == "count":
        text = pathlib.Path(sys.argv[2]).read_text(encoding="utf-8")
        print(len(token_spans(text, ranks)))
    elif cmd == "random-check":
        rng = random.Random(20250101)
        for _ in range(int(sys.argv[2])):
            text = random_text(rng, rng.randint(0, 400))
            spans = token_spans(text, ranks)
            print(json.dumps({"text": text, "ends": [e for _, e in spans]}, ensure_ascii=False))
    else:
        raise SystemExit(f"unknown command {cmd}")


if __name__ == "__main__":
    main()
