import os

import pytest

from hospnet.dates import day_of
from hospnet.records import Sex, State, ValidatedRecord, load_dataset

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

EXAMPLES_CSV = os.path.join(DATA_DIR, "overlap_examples.csv")
CHAPTER_INDEX_CSV = os.path.join(DATA_DIR, "icd10gm_chapter_index.csv")

# Expected taxonomy label per example patient in overlap_examples.csv.
EXAMPLE_LABELS = {
    "p01": "standard_transfer",
    "p02": "first_day_transfer",
    "p03": "last_day_transfer",
    "p04": "temporary_transfer",
    "p05": "unknown_two_institutions",
    "p06": "unknown_multiple(3)",
    "p07": "unknown_two_institutions",
    "p08": "simultaneous_two_institutions",
    "p09": "simultaneous_single_institution",
    "p10": "two_admissions_single_institution",
}


def vrec(
    pid="p1",
    fac="h1",
    adm="2012-01-01",
    dis="2012-01-05",
    icd="I21",
    sex=Sex.MALE,
    birth_year=1950,
    state=State.SAXONY,
    censored=False,
):
    """Shorthand ValidatedRecord builder for tests."""
    return ValidatedRecord(
        patient_id=pid,
        facility_id=fac,
        state=state,
        admission=day_of(adm) if isinstance(adm, str) else adm,
        discharge=day_of(dis) if isinstance(dis, str) else dis,
        diagnosis=icd,
        sex=sex,
        birth_year=birth_year,
        censored=censored,
    )


@pytest.fixture(scope="session")
def golden_dataset():
    dataset, report = load_dataset(EXAMPLES_CSV)
    assert report.accepted == 21 and report.total_rows == 21
    return dataset
