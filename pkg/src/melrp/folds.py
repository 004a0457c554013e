"""Artist-filtered, stratified fold construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .manifest import DatasetManifest


class FoldError(ValueError):
    pass


@dataclass(frozen=True)
class FoldAssignment:
    fold_of: dict[str, int]
    k: int
    single_split: bool = False

    @property
    def evaluated_folds(self) -> range:
        # a predefined train/test split is scored once, on fold 0
        return range(1) if self.single_split else range(self.k)

    def test_ids(self, fold: int) -> list[str]:
        return [t for t, f in self.fold_of.items() if f == fold]

    def train_ids(self, fold: int) -> list[str]:
        return [t for t, f in self.fold_of.items() if f != fold]

    def sizes(self) -> list[int]:
        counts = [0] * self.k
        for f in self.fold_of.values():
            counts[f] += 1
        return counts


def _merge_groups(*keys) -> np.ndarray:
    """Union-find over items sharing any non-empty key; returns dense group ids."""
    n = len(keys[0])
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for key in keys:
        first = {}
        for i, v in enumerate(key):
            if v is None or v == "":
                continue
            if v in first:
                a, b = find(i), find(first[v])
                if a != b:
                    parent[max(a, b)] = min(a, b)
            else:
                first[v] = i
    roots = [find(i) for i in range(n)]
    _, dense = np.unique(roots, return_inverse=True)
    return dense


def group_stratified_folds(labels, groups, k: int, seed: int) -> np.ndarray:
    """Greedy stratified assignment of whole groups to ``k`` folds.

    Groups are visited largest first (equal sizes in seeded random order).
    Each goes to the fold whose chi-square distance to its expected class
    counts (global counts / k) grows least; ties go to the smaller fold, then
    the lower index.  Returns the fold index of every item.
    """
    if k < 2:
        raise FoldError(f"need at least 2 folds, got {k}")
    labels = np.asarray(labels)
    classes, y = np.unique(labels, return_inverse=True)
    group_ids, g = np.unique(np.asarray(groups), return_inverse=True)
    if len(group_ids) < k:
        raise FoldError(f"{len(group_ids)} artist groups cannot fill {k} folds")

    counts = np.zeros((len(group_ids), len(classes)))
    np.add.at(counts, (g, y), 1.0)
    expected = np.bincount(y, minlength=len(classes)) / k

    rng = np.random.default_rng(seed)
    shuffled = rng.permutation(len(group_ids))
    sizes = counts.sum(axis=1)
    visit = shuffled[np.argsort(-sizes[shuffled], kind="stable")]

    fold_counts = np.zeros((k, len(classes)))
    group_fold = np.empty(len(group_ids), dtype=int)
    for gi in visit:
        c = counts[gi]
        increase = ((c * (2.0 * (fold_counts - expected) + c)) / expected).sum(axis=1)
        size = fold_counts.sum(axis=1)
        best = np.lexsort((np.arange(k), size, np.round(increase, 12)))[0]
        group_fold[gi] = best
        fold_counts[best] += c
    return group_fold[g]


def make_artist_folds(manifest: DatasetManifest, k: int, seed: int) -> FoldAssignment:
    """No artist (or album, when the manifest has albums) spans two folds."""
    artists = [t.artist for t in manifest.tracks]
    if len(set(artists)) < k:
        raise FoldError(f"{len(set(artists))} distinct artists cannot fill {k} folds")
    keys = [artists]
    if manifest.has_albums:
        keys.append([t.album for t in manifest.tracks])
    groups = _merge_groups(*keys)
    folds = group_stratified_folds([t.genre for t in manifest.tracks], groups, k, seed)
    return FoldAssignment({t.track_id: int(f) for t, f in zip(manifest.tracks, folds)}, k)


def predefined_split(manifest: DatasetManifest) -> FoldAssignment:
    """Single train/test split from the manifest's ``split`` column; test is fold 0."""
    if not manifest.has_predefined_split:
        raise FoldError("manifest carries no predefined split")
    fold_of = {}
    for t in manifest.tracks:
        if t.split is None:
            continue
        fold_of[t.track_id] = 0 if t.split == "test" else 1
    return FoldAssignment(fold_of, 2, single_split=True)
