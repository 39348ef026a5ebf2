"""Glyph ingestion: binarization, size normalization, manifests, synthesis."""

import os
from dataclasses import dataclass, field

import numpy as np

from .pgm import PGMError, read_pgm

DEFAULT_SIZE = 64
BACKGROUND = 255
ORIENTATIONS = ("horizontal", "vertical", "diagonal")


class DataError(Exception):
    """Raised for unreadable or malformed input data."""


@dataclass(frozen=True)
class RawImage:
    width: int
    height: int
    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        px = np.asarray(self.pixels)
        if px.size != self.width * self.height:
            raise ValueError("pixel count does not match width*height")
        object.__setattr__(self, "pixels", px.reshape(self.height, self.width))


@dataclass(frozen=True, eq=False)
class BinaryGlyph:
    """An S x S 0/1 raster with its character label."""

    bits: np.ndarray
    label: str

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2 or bits.shape[0] != bits.shape[1]:
            raise ValueError(f"glyph must be square, got shape {bits.shape}")
        if bits.size and not np.isin(bits, (0, 1)).all():
            raise ValueError("glyph bits must be 0 or 1")
        bits = bits.astype(np.uint8)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def size(self):
        return self.bits.shape[0]

    def __eq__(self, other):
        if not isinstance(other, BinaryGlyph):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.label, self.bits.tobytes()))


def binarize(img):
    """Foreground (gray <= 254) -> 1, background (255) -> 0."""
    return (np.asarray(img.pixels) < BACKGROUND).astype(np.uint8)


def normalize(grid, size):
    """Scale the foreground bounding box of `grid` onto a `size` x `size` raster.

    Nearest-neighbour sampling: output pixel (r, c) reads source pixel
    ``(top + floor(r*h/size), left + floor(c*w/size))`` of the h x w box.
    A grid with no foreground maps to an all-zero raster.
    """
    grid = np.asarray(grid, dtype=np.uint8)
    if grid.size == 0:
        raise ValueError("cannot normalize an empty grid")
    if size < 1:
        raise ValueError("size must be positive")
    rows = np.flatnonzero(grid.any(axis=1))
    if rows.size == 0:
        return np.zeros((size, size), dtype=np.uint8)
    cols = np.flatnonzero(grid.any(axis=0))
    top, left = rows[0], cols[0]
    h, w = rows[-1] - top + 1, cols[-1] - left + 1
    ri = top + (np.arange(size) * h) // size
    ci = left + (np.arange(size) * w) // size
    return grid[np.ix_(ri, ci)].copy()


def read_manifest(path):
    """Parse a ``path<TAB>label`` manifest; paths resolve against its directory."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"{path}: cannot read manifest: {exc.strerror}") from None
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected 'path<TAB>label'")
        img, label = parts[0].strip(), parts[1].strip()
        if not img:
            raise DataError(f"{path}:{lineno}: empty image path")
        if not label:
            raise DataError(f"{path}:{lineno}: empty label")
        entries.append((lineno, os.path.join(base, img), label))
    if not entries:
        raise DataError(f"{path}: manifest has no entries")
    return entries


def load_manifest(path, size=DEFAULT_SIZE, normalize_glyphs=True):
    """Load every manifest entry as a binarized glyph of side `size`.

    With ``normalize_glyphs=False`` images are only binarized and must
    already be `size` x `size`.
    """
    glyphs = []
    for lineno, img_path, label in read_manifest(path):
        if not os.path.isfile(img_path):
            raise DataError(f"{path}:{lineno}: image not found: {img_path}")
        try:
            width, height, pixels = read_pgm(img_path)
        except (OSError, PGMError) as exc:
            raise DataError(f"{path}:{lineno}: unreadable image {img_path}: {exc}") from None
        grid = binarize(RawImage(width, height, pixels))
        if normalize_glyphs:
            grid = normalize(grid, size)
        elif grid.shape != (size, size):
            raise DataError(
                f"{path}:{lineno}: image {img_path} is {width}x{height}, expected {size}x{size}"
            )
        glyphs.append(BinaryGlyph(grid, label))
    return glyphs


@dataclass(frozen=True)
class Stroke:
    """A one-pixel-wide straight stroke starting at (row, col).

    Diagonal strokes run down and to the right. ``jitter`` overrides the
    dataset-wide jitter for this stroke (0 pins it in place).
    """

    orientation: str
    row: int
    col: int
    length: int
    jitter: int = None

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"unknown stroke orientation {self.orientation!r}")
        if self.length < 1:
            raise ValueError("stroke length must be >= 1")
        if self.jitter is not None and self.jitter < 0:
            raise ValueError("stroke jitter must be >= 0")

    def pixels(self, dr=0, dc=0):
        i = np.arange(self.length)
        zero = np.zeros_like(i)
        step_r, step_c = {
            "horizontal": (zero, i),
            "vertical": (i, zero),
            "diagonal": (i, i),
        }[self.orientation]
        return self.row + dr + step_r, self.col + dc + step_c

    def extent(self):
        """Inclusive (row_min, row_max, col_min, col_max) of the unshifted stroke."""
        rr, cc = self.pixels()
        return rr.min(), rr.max(), cc.min(), cc.max()


@dataclass(frozen=True)
class SynthSpec:
    """Class templates for a deterministic synthetic glyph set.

    Each class is a list of strokes. Every generated sample translates each
    stroke of its class template by an independent integer offset drawn
    uniformly from ``[-j, j]**2``, where j is the stroke's own jitter if set
    and the dataset-wide `jitter` otherwise.
    """

    classes: list  # list[list[Stroke]]
    samples_per_class: int
    grid_size: int = 32
    jitter: int = 1
    seed: int = 0
    labels: list = field(default=None)

    def __post_init__(self):
        if len(self.classes) < 2:
            raise ValueError("need at least 2 classes")
        if self.samples_per_class < 2:
            raise ValueError("need at least 2 samples per class")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")
        if self.grid_size < 1:
            raise ValueError("grid_size must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        labels = self.labels
        if labels is None:
            labels = [f"c{i}" for i in range(len(self.classes))]
        labels = [str(x) for x in labels]
        if len(labels) != len(self.classes) or len(set(labels)) != len(labels):
            raise ValueError("labels must be unique, one per class")
        if not all(labels):
            raise ValueError("labels must be non-empty")
        object.__setattr__(self, "labels", labels)
        S = self.grid_size
        for ci, strokes in enumerate(self.classes):
            if not strokes:
                raise ValueError(f"class {ci} has no strokes")
            for st in strokes:
                j = self.stroke_jitter(st)
                r0, r1, c0, c1 = st.extent()
                if r0 - j < 0 or c0 - j < 0 or r1 + j >= S or c1 + j >= S:
                    raise ValueError(
                        f"class {ci}: stroke {st} leaves the {S}x{S} grid under jitter {j}"
                    )

    @property
    def k(self):
        return len(self.classes)

    def stroke_jitter(self, stroke):
        return self.jitter if stroke.jitter is None else stroke.jitter

    @classmethod
    def from_dict(cls, d):
        classes, labels = [], []
        for entry in d["classes"]:
            labels.append(entry.get("label", f"c{len(labels)}"))
            classes.append([Stroke(**s) for s in entry["strokes"]])
        return cls(
            classes=classes,
            samples_per_class=int(d["samples_per_class"]),
            grid_size=int(d.get("grid_size", 32)),
            jitter=int(d.get("jitter", 1)),
            seed=int(d.get("seed", 0)),
            labels=labels,
        )

    def to_dict(self):
        return {
            "classes": [
                {
                    "label": lab,
                    "strokes": [_stroke_dict(s) for s in strokes],
                }
                for lab, strokes in zip(self.labels, self.classes)
            ],
            "samples_per_class": self.samples_per_class,
            "grid_size": self.grid_size,
            "jitter": self.jitter,
            "seed": self.seed,
        }


def _stroke_dict(s):
    d = {"orientation": s.orientation, "row": s.row, "col": s.col, "length": s.length}
    if s.jitter is not None:
        d["jitter"] = s.jitter
    return d


def _render(strokes, size, offsets):
    grid = np.zeros((size, size), dtype=np.uint8)
    for st, (dr, dc) in zip(strokes, offsets):
        rr, cc = st.pixels(int(dr), int(dc))
        grid[rr, cc] = 1
    return grid


def generate_synthetic(spec):
    """Render ``k * m`` glyphs, class-major.

    The offsets of the sample at flat index i come from a generator seeded
    with ``(seed, i)`` so any entry can be reproduced independently.
    """
    glyphs = []
    for ci, strokes in enumerate(spec.classes):
        bound = np.array([[spec.stroke_jitter(st)] * 2 for st in strokes])
        for si in range(spec.samples_per_class):
            index = ci * spec.samples_per_class + si
            rng = np.random.default_rng(np.random.SeedSequence([spec.seed, index]))
            offsets = rng.integers(-bound, bound + 1)
            glyphs.append(BinaryGlyph(_render(strokes, spec.grid_size, offsets), spec.labels[ci]))
    return glyphs


def glyph_to_pixels(glyph):
    """Inverse of binarize for writing: foreground black (0), background white (255)."""
    return np.where(glyph.bits == 1, 0, BACKGROUND).astype(np.uint8)
