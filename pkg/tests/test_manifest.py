import io

import pytest

from melrp.manifest import (
    DuplicateTrackError,
    ManifestParseError,
    ManifestValidationError,
    class_distribution,
    dump_manifest,
    load_manifest,
)

HEADER = "track_id,path,genre,artist,split\n"


def _load(text, **kw):
    return load_manifest(io.StringIO(text), **kw)


def test_three_rows_two_genres():
    m = _load(HEADER + "t1,a.wav,rock,x,\nt2,b.wav,jazz,y,\nt3,c.wav,rock,z,\n")
    assert m.track_ids == ["t1", "t2", "t3"]
    assert sorted(m.genres) == ["jazz", "rock"]
    assert m["t2"].artist == "y"


def test_duplicate_id_is_named():
    with pytest.raises(DuplicateTrackError, match="t1"):
        _load(HEADER + "t1,a.wav,rock,x,\nt1,b.wav,jazz,y,\n")


def test_wrong_column_count_reports_line():
    with pytest.raises(ManifestParseError) as err:
        _load(HEADER + "t1,a.wav,rock,x,\nt2,b.wav,jazz\n")
    assert err.value.line == 3


def test_bad_header():
    with pytest.raises(ManifestParseError):
        _load("id,path,genre,artist,split\nt1,a.wav,rock,x,\n")


def test_single_genre_rejected():
    with pytest.raises(ManifestValidationError):
        _load(HEADER + "t1,a.wav,rock,x,\nt2,b.wav,rock,y,\n")


def test_split_needs_both_tags():
    with pytest.raises(ManifestValidationError):
        _load(HEADER + "t1,a.wav,rock,x,train\nt2,b.wav,jazz,y,train\n")
    m = _load(HEADER + "t1,a.wav,rock,x,train\nt2,b.wav,jazz,y,test\n")
    assert m.has_predefined_split


def test_crlf_and_extra_column_warns():
    text = "track_id,path,genre,artist,split,bpm\r\nt1,a.wav,rock,x,,120\r\nt2,b.wav,jazz,y,,90\r\n"
    with pytest.warns(UserWarning, match="bpm"):
        m = _load(text)
    assert len(m.tracks) == 2


def test_gtzan_shaped_manifest():
    genres = ["blues", "classical", "country", "disco", "hiphop", "jazz", "metal", "pop", "reggae", "rock"]
    rows = [f"{g}.{i:05d},{g}/{g}.{i:05d}.wav,{g},{g}-artist-{i % 7}," for g in genres for i in range(100)]
    m = _load(HEADER + "\n".join(rows) + "\n")
    assert len(m.tracks) == 1000
    assert not m.has_predefined_split
    assert class_distribution(m) == {g: 100 for g in genres}


def test_class_distribution():
    m = _load(HEADER + "t1,a.wav,a,x,\nt2,b.wav,a,y,\nt3,c.wav,b,z,\n")
    assert class_distribution(m) == {"a": 2, "b": 1}


def test_round_trip():
    m = _load(HEADER + "t1,a.wav,rock,x,train\nt2,b b.wav,jazz,\"y, jr\",test\n", name="n")
    again = _load(dump_manifest(m), name="n")
    assert again == m


def test_load_is_deterministic():
    text = HEADER + "t1,a.wav,rock,x,\nt2,b.wav,jazz,y,\n"
    assert _load(text) == _load(text)
