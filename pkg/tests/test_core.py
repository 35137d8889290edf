import dataclasses

import pytest

from vocstress.core import (
    FRAME_COLUMNS,
    Phase,
    SensorFrame,
    StressLabel,
    dumps_archive,
    label_for_phase,
    loads_archive,
    read_archive,
    validate_session,
    write_archive,
)


def test_label_mapping():
    assert label_for_phase(Phase.ARITHMETIC) is StressLabel.STRESS
    assert label_for_phase(Phase.STROOP) is StressLabel.STRESS
    assert label_for_phase(Phase.BASELINE) is StressLabel.NON_STRESS
    for ph in (Phase.RECOVERY1, Phase.RECOVERY2, Phase.RECOVERY3):
        assert label_for_phase(ph) is StressLabel.NON_STRESS
    assert label_for_phase(Phase.WARMUP) is StressLabel.UNLABELED


def test_label_total_partition():
    buckets = {StressLabel.STRESS: set(), StressLabel.NON_STRESS: set(), StressLabel.UNLABELED: set()}
    for ph in Phase:
        buckets[label_for_phase(ph)].add(ph)
    assert buckets[StressLabel.STRESS] == {Phase.STROOP, Phase.ARITHMETIC}
    assert buckets[StressLabel.UNLABELED] == {Phase.WARMUP}
    all_phases = set().union(*buckets.values())
    assert all_phases == set(Phase)
    assert sum(len(b) for b in buckets.values()) == len(Phase)


def test_frame_layout_is_frozen():
    # timestamp + 18 named fields; the wire format and archives rely on this
    assert FRAME_COLUMNS[0] == "timestamp"
    assert len(FRAME_COLUMNS) == 19
    assert FRAME_COLUMNS[-1] == "phase_id"


def test_validate_clean_session(session_p1):
    _, record = session_p1
    assert validate_session(record) == []


def test_validate_timestamp_decrease(session_p1):
    _, record = session_p1
    frames = list(record.frames)
    frames[10] = dataclasses.replace(frames[10], timestamp=frames[9].timestamp - 5)
    bad = dataclasses.replace(record, frames=tuple(frames))
    violations = validate_session(bad)
    assert any(v.rule == "frame-order" and v.index == 10 for v in violations)


def test_validate_rating_out_of_range(session_p1):
    _, record = session_p1
    meta = dataclasses.replace(record.meta, stress_ratings={"T1": 2, "T2": 7, "T3": 3})
    bad = dataclasses.replace(record, meta=meta)
    violations = validate_session(bad)
    assert any(v.rule == "rating-range" and "7" in v.detail for v in violations)


def test_validate_rr_range(session_p1):
    _, record = session_p1
    frames = list(record.frames)
    frames[5] = dataclasses.replace(frames[5], rr_intervals=(150,))
    bad = dataclasses.replace(record, frames=tuple(frames))
    assert any(v.rule == "rr-range" and v.index == 5 for v in validate_session(bad))


def test_validate_unavailable_channel_with_data(session_p1):
    _, record = session_p1
    availability = dict(record.channel_availability)
    availability["gsr"] = False
    bad = dataclasses.replace(record, channel_availability=availability)
    assert any(v.rule == "channel-unavailable" for v in validate_session(bad))


def test_validate_duplicate_phase_marker(session_p1):
    _, record = session_p1
    markers = list(record.markers) + [(record.markers[-1][0] + 10, "PHASE_3_START")]
    bad = dataclasses.replace(record, markers=tuple(markers))
    assert any(v.rule == "phase-marker-dup" for v in validate_session(bad))


def test_validator_never_raises_on_junk(session_p1):
    _, record = session_p1
    bad = dataclasses.replace(record, frames=(), markers=((5, "PHASE_9_START"),))
    validate_session(bad)  # must not throw


def test_archive_roundtrip_identity(session_p1, tmp_path):
    _, record = session_p1
    text = dumps_archive(record)
    again = loads_archive(text)
    assert again == record
    assert dumps_archive(again) == text

    path = tmp_path / "s.txt"
    write_archive(record, path)
    assert read_archive(path) == record


def test_archive_is_lf_utf8(session_p1, tmp_path):
    _, record = session_p1
    path = tmp_path / "s.txt"
    write_archive(record, path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    raw.decode("utf-8")


def test_archive_rejects_garbage():
    with pytest.raises(ValueError):
        loads_archive("not an archive\n")


def test_frame_defaults_are_missing():
    f = SensorFrame(timestamp=0)
    assert f.hr is None and f.rr_intervals == () and f.tvoc is None
