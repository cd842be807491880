import datetime as dt
from zoneinfo import ZoneInfo

import numpy as np
import pytest

from peakmotifs.ingest import RawReading

LONDON = ZoneInfo("Europe/London")


def reading(hid: str, iso: str, watts: float) -> RawReading:
    ts = dt.datetime.fromisoformat(iso)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=LONDON)
    return RawReading(hid, ts, watts)


def step_integral(times: np.ndarray, powers: np.ndarray, a: float, b: float) -> float:
    """Independent piecewise-constant integral oracle: each reading's power
    holds until the next reading; integrate over [a, b] by direct clipping."""
    total = 0.0
    for i in range(len(times) - 1):
        lo, hi = max(times[i], a), min(times[i + 1], b)
        if hi > lo:
            total += powers[i] * (hi - lo)
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
