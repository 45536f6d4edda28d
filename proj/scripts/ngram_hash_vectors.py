#!/usr/bin/env python3
"""Independent FNV-1a reference for the hashed n-gram buckets.

Regenerates tests/data/ngram_hash_vectors.tsv: each row is the n-gram's
tokens (space-joined), the bucket count, and the expected bucket. The hash
input is the tokens joined with the 0x1f separator byte.
"""

import os

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
SEPARATOR = "\x1f"


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def bucket(tokens: list[str], bucket_count: int) -> int:
    joined = SEPARATOR.join(tokens).encode("utf-8")
    return fnv1a64(joined) % bucket_count


CASES = [
    (["a", "b"], 4096),
    (["b", "a"], 4096),
    (["a", "b", "c"], 4096),
    (["the", "cat"], 4096),
    (["the", "cat", "sat"], 4096),
    (["user_tag", "hi"], 4096),
    (["web_link", "!!"], 4096),
    (["x"], 4096),
    (["hello", "world"], 4096),
    (["hello", "world"], 65536),
    (["one", "two", "three"], 65536),
    (["!", "?"], 4096),
    (["100", "days"], 4096),
    (["same", "same"], 4096),
]


def main() -> None:
    out_path = os.path.join(
        os.path.dirname(__file__), "..", "tests", "data",
        "ngram_hash_vectors.tsv",
    )
    os.makedirs(os.path.dirname(out_path), exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="\n") as out:
        for tokens, count in CASES:
            out.write(f"{' '.join(tokens)}\t{count}\t{bucket(tokens, count)}\n")
    print(f"wrote {os.path.normpath(out_path)}")


if __name__ == "__main__":
    main()
