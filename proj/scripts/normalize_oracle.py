#!/usr/bin/env python3
"""Independent reference implementation of the tweet normalization rules.

Regenerates tests/data/normalize_golden.tsv. The C++ implementation is
tested against this file; keep this script independent of the C++ code.

Rules, applied per whitespace piece until stable:
  1. sentinel tokens (user_tag, web_link) pass through
  2. http://, https://, or www. prefix     -> web_link
  3. leading '@' followed by a word char   -> user_tag
  4. drop every char outside [a-z0-9] and the retained punctuation set
Pieces come from ASCII-lowercased text split on ASCII whitespace; empty
pieces vanish and the rest joins with single spaces.
"""

import os
import re

RETAINED = set(".,!?'\":;()-")
ASCII_WS = re.compile(r"[ \t\n\r\f\v]+")


def is_word_char(c: str) -> bool:
    return ("a" <= c <= "z") or ("0" <= c <= "9") or c == "_"


def normalize_piece(piece: str) -> str:
    while True:
        if piece in ("user_tag", "web_link"):
            return piece
        if piece.startswith(("http://", "https://", "www.")):
            return "web_link"
        if len(piece) >= 2 and piece[0] == "@" and is_word_char(piece[1]):
            return "user_tag"
        filtered = "".join(
            c for c in piece
            if ("a" <= c <= "z") or ("0" <= c <= "9") or c in RETAINED
        )
        if filtered == piece:
            return piece
        piece = filtered


def ascii_lower(text: str) -> str:
    return "".join(
        chr(ord(c) + 32) if "A" <= c <= "Z" else c for c in text
    )


def normalize(text: str) -> str:
    pieces = (normalize_piece(p) for p in ASCII_WS.split(ascii_lower(text)))
    return " ".join(p for p in pieces if p)


GOLDEN_RAWS = [
    "@TheTweetOfGod",
    "",
    "#BlessUp!! Check https://t.co/x ~now~",
    "Hello, World!",
    "RT @user123: this is CRAZY!!",
    "check out www.example.com NOW",
    "100% legit #deal #sale",
    "I   love    spaces",
    "émojis \U0001f600 and accents café",
    "@",
    "a@b",
    "http://",
    "HTTPS://EXAMPLE.COM/PAGE?ref=1",
    "~~~wow~~~ much *style*",
    "don't stop believing...",
    "(parens) [brackets] {braces}",
    "#2020Vision",
    "email me at bob@example.com",
    "@_underscore_lead",
    "½ + ½ = 1",
    "WWW.ALLCAPS.COM",
    "so.many.dots...",
    "mixed@Start but @valid_mention here",
    "*@hidden",
    "~www.example.org trailing",
    "user_tag already a sentinel",
    "semi;colon: and \"quotes\"",
    "newline\nand\ttab separated",
    "trailing spaces   ",
    "12345",
]


def main() -> None:
    out_path = os.path.join(
        os.path.dirname(__file__), "..", "tests", "data",
        "normalize_golden.tsv",
    )
    os.makedirs(os.path.dirname(out_path), exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="\n") as out:
        for raw in GOLDEN_RAWS:
            if "\t" in raw or "\n" in raw:
                # TSV rows cannot carry them; encode as spaces up front.
                raw = raw.replace("\t", " ").replace("\n", " ")
            out.write(f"{raw}\t{normalize(raw)}\n")
    print(f"wrote {os.path.normpath(out_path)}")


if __name__ == "__main__":
    main()
