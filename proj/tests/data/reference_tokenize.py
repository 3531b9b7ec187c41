#!/usr/bin/env python3
"""Reference tokenizer used to freeze expected token bags in unit tests.

Regex split on whitespace, strip surrounding punctuation, casefold. Run with
text on stdin; prints one token per line.
"""
import re
import sys

PUNCT = r"!\"#$%&'()*+,\-./:;<=>?@\[\\\]^_`{|}~‘’“”–—…"

for raw in re.split(r"\s+", sys.stdin.read()):
    token = re.sub(f"^[{PUNCT}]+|[{PUNCT}]+$", "", raw)
    if token:
        print(token.casefold())
