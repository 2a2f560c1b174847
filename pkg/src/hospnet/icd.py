"""ICD-10-GM chapter mapping.

Chapter-level grouping only: a diagnosis code is reduced to its three
character category (letter + two digits) and looked up in the chapter
range table of the German modification (22 chapters). Codes falling in a
gap of the ranges (e.g. D49, which exists in ICD-10-CM but not in the GM
chapter layout) map to None and are tallied as unknown by callers.
"""

from __future__ import annotations

import csv
from typing import Optional

# (range_start, range_end, chapter); category comparison is lexicographic,
# which is exact for letter+2-digit strings.
CHAPTER_RANGES: tuple[tuple[str, str, int], ...] = (
    ("A00", "B99", 1),
    ("C00", "D48", 2),
    ("D50", "D89", 3),
    ("E00", "E90", 4),
    ("F00", "F99", 5),
    ("G00", "G99", 6),
    ("H00", "H59", 7),
    ("H60", "H95", 8),
    ("I00", "I99", 9),
    ("J00", "J99", 10),
    ("K00", "K93", 11),
    ("L00", "L99", 12),
    ("M00", "M99", 13),
    ("N00", "N99", 14),
    ("O00", "O99", 15),
    ("P00", "P96", 16),
    ("Q00", "Q99", 17),
    ("R00", "R99", 18),
    ("S00", "T98", 19),
    ("V01", "Y84", 20),
    ("Z00", "Z99", 21),
    ("U00", "U99", 22),
)

N_CHAPTERS = 22

# Dense category -> chapter lookup built once; ~2600 keys.
_CHAPTER_BY_CATEGORY: dict[str, int] = {}
for _start, _end, _chapter in CHAPTER_RANGES:
    for _letter_idx in range(ord(_start[0]), ord(_end[0]) + 1):
        _letter = chr(_letter_idx)
        _lo = int(_start[1:]) if _letter == _start[0] else 0
        _hi = int(_end[1:]) if _letter == _end[0] else 99
        for _num in range(_lo, _hi + 1):
            _CHAPTER_BY_CATEGORY[f"{_letter}{_num:02d}"] = _chapter


def normalize(code: str) -> str:
    """Canonical code text: uppercase, dots and whitespace stripped."""
    return code.replace(".", "").replace(" ", "").strip().upper()


def category_of(code: str) -> Optional[str]:
    """Three-character category (e.g. 'I21' from 'I21.0'), or None if the
    code does not even have the letter+2-digit shape."""
    c = normalize(code)
    if len(c) < 3 or not c[0].isalpha() or not c[1:3].isdigit():
        return None
    return c[:3]


def chapter_of(code: str) -> Optional[int]:
    """Chapter number 1..22 for a diagnosis code, or None for codes whose
    category lies outside every chapter range."""
    cat = category_of(code)
    if cat is None:
        return None
    return _CHAPTER_BY_CATEGORY.get(cat)


def pair_key(a: int, b: int) -> tuple[int, int]:
    """Sorted chapter pair used as a tally key, rendered like [5, 19]."""
    return (a, b) if a <= b else (b, a)


def export_chapter_table(path: str) -> None:
    """Write the chapter range table as documentation CSV."""
    with open(path, "w", encoding="utf-8", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(["range_start", "range_end", "chapter"])
        for start, end, chapter in CHAPTER_RANGES:
            writer.writerow([start, end, chapter])
