"""Shared fixtures.

The stressed-profile session is the expensive shared artifact: the EDA
solve runs over the full 20-minute trace, so the session and its
detector outputs are computed once per test run.
"""
from __future__ import annotations

import pytest

from stresscal import cardiac, eda, emg, features, synth
from stresscal.core import Window


@pytest.fixture(scope="session")
def stressed_session() -> synth.SynthSession:
    return synth.gen_session(synth.stressed_profile(), seed=7)


@pytest.fixture(scope="session")
def detected(stressed_session) -> features.ProcessedSession:
    series = stressed_session.series
    first_relax = stressed_session.markers.scenarios[0]
    dec = eda.decompose(series["GSR"])
    env = emg.emg_envelope(series["EMG"])
    return features.ProcessedSession(
        ecg_beats=cardiac.detect_r_peaks(series["ECG"]),
        bvp_beats=cardiac.detect_bvp_peaks(series["BVP"]),
        scr_events=eda.detect_scr_events(dec),
        emg_bursts=emg.detect_bursts(
            env, emg.BurstConfig(baseline=Window(first_relax.start_s, first_relax.end_s))),
    )
