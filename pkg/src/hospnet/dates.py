"""Day-resolution date handling.

All stay endpoints are represented as integer day numbers (proleptic
Gregorian ordinals, as produced by ``datetime.date.toordinal``).  Working
with plain ints keeps record objects small and makes interval arithmetic
trivial: the difference of two day numbers is a number of days.
"""

from __future__ import annotations

from datetime import date, timedelta

# Memoized ISO string -> ordinal. A multi-year extract contains only a few
# thousand distinct dates, so parsing each string once is a large win on
# multi-million-row inputs.
_ORDINAL_CACHE: dict[str, int] = {}


def day_of(text: str) -> int:
    """Parse an ISO-8601 calendar date (YYYY-MM-DD) to a day number.

    Raises ValueError on anything that is not a real calendar date.
    """
    try:
        return _ORDINAL_CACHE[text]
    except KeyError:
        ordinal = date.fromisoformat(text).toordinal()
        _ORDINAL_CACHE[text] = ordinal
        return ordinal


def iso_of(day: int) -> str:
    """Format a day number back to YYYY-MM-DD."""
    return date.fromordinal(day).isoformat()


def year_of(day: int) -> int:
    return date.fromordinal(day).year


def add_days(day: int, n: int) -> int:
    return day + n


def span_days(first: int, last: int) -> int:
    """Inclusive length of the closed day interval [first, last]."""
    return last - first + 1


def make_day(year: int, month: int, dom: int) -> int:
    return date(year, month, dom).toordinal()


def days_in_year(year: int) -> int:
    return (date(year + 1, 1, 1) - date(year, 1, 1)) // timedelta(days=1)
