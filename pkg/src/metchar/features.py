"""Projection-profile features of a binary glyph.

Rows, columns and anti-diagonals (pixels with r + c = t, walked in increasing
r) are scanned for their foreground count and the position of the first and
last foreground pixel. A line with no foreground stores its own length.
"""

from dataclasses import dataclass

import numpy as np

FEATURE_IDS = ("hbv", "hfv", "hlv", "vfv", "vlv", "dfv", "dlv")


@dataclass(frozen=True, eq=False)
class FeatureSet:
    hbv: np.ndarray
    hfv: np.ndarray
    hlv: np.ndarray
    vfv: np.ndarray
    vlv: np.ndarray
    dfv: np.ndarray
    dlv: np.ndarray

    @property
    def size(self):
        return len(self.hbv)

    def __eq__(self, other):
        if not isinstance(other, FeatureSet):
            return NotImplemented
        return all(np.array_equal(getattr(self, f), getattr(other, f)) for f in FEATURE_IDS)

    def to_dict(self):
        return {f: [int(v) for v in getattr(self, f)] for f in FEATURE_IDS}


def _first_last(lines, length):
    """First/last foreground index along axis 1 of a 2-D 0/1 array."""
    has = lines.any(axis=1)
    first = np.where(has, lines.argmax(axis=1), length)
    last = np.where(has, length - 1 - lines[:, ::-1].argmax(axis=1), length)
    return first, last


def _diagonal_first_last(bits):
    S = bits.shape[0]
    flipped = bits[:, ::-1]
    first = np.empty(2 * S - 1, dtype=np.int64)
    last = np.empty(2 * S - 1, dtype=np.int64)
    for t in range(2 * S - 1):
        # anti-diagonal r + c = t of bits is diagonal offset S-1-t of the flip,
        # and np.diagonal walks it in increasing r
        diag = np.diagonal(flipped, offset=S - 1 - t)
        hits = np.flatnonzero(diag)
        if hits.size:
            first[t], last[t] = hits[0], hits[-1]
        else:
            first[t] = last[t] = diag.size
    return first, last


def extract_features(glyph):
    """Compute all seven profile vectors of `glyph` (a BinaryGlyph or 0/1 array)."""
    bits = np.asarray(getattr(glyph, "bits", glyph), dtype=np.int64)
    S = bits.shape[0]
    if bits.shape != (S, S):
        raise ValueError("glyph must be square")
    hfv, hlv = _first_last(bits, S)
    vfv, vlv = _first_last(bits.T, S)
    dfv, dlv = _diagonal_first_last(bits)
    vecs = dict(
        hbv=bits.sum(axis=1),
        hfv=hfv,
        hlv=hlv,
        vfv=vfv,
        vlv=vlv,
        dfv=dfv,
        dlv=dlv,
    )
    for v in vecs.values():
        v.setflags(write=False)
    return FeatureSet(**{k: v.astype(np.int64, copy=False) for k, v in vecs.items()})


def feature_vector(fs, which):
    if which not in FEATURE_IDS:
        raise KeyError(f"unknown feature id {which!r}; expected one of {FEATURE_IDS}")
    return getattr(fs, which)


def stack_features(feature_sets):
    """Stack a dataset into one ``(n, L)`` float64 matrix per feature id."""
    feature_sets = list(feature_sets)
    if not feature_sets:
        raise ValueError("empty dataset")
    sizes = {fs.size for fs in feature_sets}
    if len(sizes) != 1:
        raise ValueError(f"feature sets come from mixed glyph sizes {sorted(sizes)}")
    return {
        f: np.array([getattr(fs, f) for fs in feature_sets], dtype=np.float64) for f in FEATURE_IDS
    }
