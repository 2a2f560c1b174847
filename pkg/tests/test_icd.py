import csv
import itertools
import string

import pytest
from hypothesis import given, strategies as st

from hospnet.icd import (
    CHAPTER_RANGES,
    chapter_of,
    export_chapter_table,
    normalize,
    pair_key,
)

from conftest import CHAPTER_INDEX_CSV


def load_chapter_index():
    with open(CHAPTER_INDEX_CSV, newline="") as fh:
        return {row["category"]: int(row["chapter"]) for row in csv.DictReader(fh)}


def test_circulatory_and_mental_examples():
    assert chapter_of("I21") == 9
    assert chapter_of("F10") == 5


def test_gaps_are_unknown():
    assert chapter_of("D49") is None
    assert chapter_of("V00") is None
    assert chapter_of("Y85") is None
    assert chapter_of("T99") is None


def test_normalization_strips_dots_and_case():
    assert normalize(" i21.0 ") == "I210"
    assert chapter_of("i21.0") == 9
    assert chapter_of("S06.0") == 19


def test_unparseable_codes():
    assert chapter_of("") is None
    assert chapter_of("21I") is None
    assert chapter_of("IXX") is None


def test_exhaustive_agreement_with_official_index():
    official = load_chapter_index()
    for letter, num in itertools.product(string.ascii_uppercase, range(100)):
        category = f"{letter}{num:02d}"
        assert chapter_of(category) == official.get(category), category


def test_ranges_disjoint_and_total():
    seen = {}
    for start, end, chapter in CHAPTER_RANGES:
        for letter in range(ord(start[0]), ord(end[0]) + 1):
            lo = int(start[1:]) if chr(letter) == start[0] else 0
            hi = int(end[1:]) if chr(letter) == end[0] else 99
            for num in range(lo, hi + 1):
                cat = f"{chr(letter)}{num:02d}"
                assert cat not in seen, f"{cat} in two ranges"
                seen[cat] = chapter
    assert set(seen.values()) == set(range(1, 23))


@given(st.integers(1, 22), st.integers(1, 22))
def test_pair_key_commutative_idempotent(a, b):
    key = pair_key(a, b)
    assert key == pair_key(b, a)
    assert key == pair_key(*key)
    assert key[0] <= key[1]


def test_pair_key_examples():
    assert pair_key(19, 5) == (5, 19)
    assert pair_key(9, 9) == (9, 9)
    assert pair_key(2, 21) == (2, 21)


def test_export_chapter_table(tmp_path):
    path = tmp_path / "chapters.csv"
    export_chapter_table(str(path))
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(CHAPTER_RANGES)
    assert rows[0] == {"range_start": "A00", "range_end": "B99", "chapter": "1"}
