"""Dataset manifests: a flat CSV index binding audio files to genre and artist.

The header is fixed::

    track_id,path,genre,artist,split

``split`` is ``train``, ``test`` or empty.  An optional ``album`` column is
understood and used as a second grouping key by the fold builder; any other
extra column is ignored with a warning.
"""

from __future__ import annotations

import csv
import io
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, TextIO

REQUIRED_COLUMNS = ("track_id", "path", "genre", "artist", "split")
OPTIONAL_COLUMNS = ("album",)
SPLIT_TAGS = ("train", "test")
SAMPLE_RATE_TARGET = 44100


class ManifestError(ValueError):
    """Base class for manifest problems."""


class ManifestParseError(ManifestError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ManifestValidationError(ManifestError):
    pass


class DuplicateTrackError(ManifestValidationError):
    def __init__(self, track_id: str, line: int | None = None):
        self.track_id = track_id
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate track_id {track_id!r}{where}")


@dataclass(frozen=True)
class TrackEntry:
    track_id: str
    path: str
    genre: str
    artist: str
    split: str | None = None
    album: str | None = None

    def __post_init__(self):
        for name in ("track_id", "path", "genre", "artist"):
            if not getattr(self, name):
                raise ManifestValidationError(f"track {self.track_id!r}: empty {name}")
        if self.split not in (None, *SPLIT_TAGS):
            raise ManifestValidationError(
                f"track {self.track_id!r}: split must be train, test or empty, got {self.split!r}"
            )


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    tracks: tuple[TrackEntry, ...]
    sample_rate_target: int = SAMPLE_RATE_TARGET
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tracks", tuple(self.tracks))
        index = {}
        for t in self.tracks:
            if t.track_id in index:
                raise DuplicateTrackError(t.track_id)
            index[t.track_id] = t
        object.__setattr__(self, "_index", index)
        if len({t.genre for t in self.tracks}) < 2:
            raise ManifestValidationError("a manifest needs at least 2 distinct genres")
        tags = {t.split for t in self.tracks if t.split is not None}
        if tags and tags != set(SPLIT_TAGS):
            raise ManifestValidationError(
                "predefined splits need both train and test tags, found only "
                + ", ".join(sorted(tags))
            )

    def __len__(self):
        return len(self.tracks)

    def __iter__(self):
        return iter(self.tracks)

    def __getitem__(self, track_id: str) -> TrackEntry:
        return self._index[track_id]

    @property
    def track_ids(self) -> list[str]:
        return [t.track_id for t in self.tracks]

    @property
    def genres(self) -> list[str]:
        """Sorted label set."""
        return sorted({t.genre for t in self.tracks})

    @property
    def has_predefined_split(self) -> bool:
        return any(t.split is not None for t in self.tracks)

    @property
    def has_albums(self) -> bool:
        return any(t.album for t in self.tracks)

    def subset(self, track_ids: Iterable[str], name: str | None = None) -> "DatasetManifest":
        keep = set(track_ids)
        return DatasetManifest(
            name or self.name,
            tuple(t for t in self.tracks if t.track_id in keep),
            self.sample_rate_target,
        )

    def relabel(self, genres: Iterable[str]) -> "DatasetManifest":
        """Copy with the genre column replaced, in track order."""
        from dataclasses import replace

        tracks = tuple(replace(t, genre=g) for t, g in zip(self.tracks, genres, strict=True))
        return DatasetManifest(self.name, tracks, self.sample_rate_target)


def load_manifest(source: TextIO | str, name: str = "dataset") -> DatasetManifest:
    """Parse a manifest from a text stream (or a path).

    Raises
    ------
    ManifestParseError
        Bad header or a row with the wrong column count; carries the line number.
    DuplicateTrackError
        A ``track_id`` seen twice.
    """
    if isinstance(source, str):
        with open(source, newline="", encoding="utf-8") as fh:
            return load_manifest(fh, name=name)

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ManifestParseError("empty manifest", line=1) from None
    header = [h.strip() for h in header]
    if header and header[0].startswith("﻿"):
        header[0] = header[0][1:]
    if header[: len(REQUIRED_COLUMNS)] != list(REQUIRED_COLUMNS):
        raise ManifestParseError(
            f"header must start with {','.join(REQUIRED_COLUMNS)}, got {','.join(header)}", line=1
        )
    extras = [h for h in header[len(REQUIRED_COLUMNS):] if h not in OPTIONAL_COLUMNS]
    if extras:
        warnings.warn(f"ignoring unknown manifest columns: {', '.join(extras)}", stacklevel=2)
    album_col = header.index("album") if "album" in header else None

    tracks = []
    seen = set()
    for row in reader:
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise ManifestParseError(
                f"expected {len(header)} columns, got {len(row)}", line=line
            )
        track_id, path, genre, artist, split = (c.strip() for c in row[:5])
        if track_id in seen:
            raise DuplicateTrackError(track_id, line=line)
        seen.add(track_id)
        album = row[album_col].strip() or None if album_col is not None else None
        try:
            tracks.append(TrackEntry(track_id, path, genre, artist, split or None, album))
        except ManifestValidationError as exc:
            raise ManifestParseError(str(exc), line=line) from None
    return DatasetManifest(name, tuple(tracks))


def dump_manifest(manifest: DatasetManifest, stream: TextIO | None = None) -> str:
    """Serialize to the CSV format; returns the text (and writes it if a stream is given)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    with_album = manifest.has_albums
    writer.writerow(REQUIRED_COLUMNS + (OPTIONAL_COLUMNS if with_album else ()))
    for t in manifest.tracks:
        row = [t.track_id, t.path, t.genre, t.artist, t.split or ""]
        if with_album:
            row.append(t.album or "")
        writer.writerow(row)
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def class_distribution(manifest: DatasetManifest) -> dict[str, int]:
    return dict(Counter(t.genre for t in manifest.tracks))
