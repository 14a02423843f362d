"""Dataset generation, ingestion, and preprocessing.

Columns are samples throughout.  On-disk carriers: the classic big-endian
IDX image/label pair, plain numeric CSV with an optional trailing integer
label row, and a tiny native binary format ("LRRM" magic, little-endian
u32 shape, row-major f64 payload, optional i32 label block) for lossless
round trips.
"""

import csv
import gzip
import struct
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DataFormatError",
    "LabeledDataset",
    "SubspaceGenSpec",
    "generate_union_of_subspaces",
    "load_idx",
    "load_csv_matrix",
    "save_csv_matrix",
    "read_native",
    "write_native",
    "read_labels_csv",
    "write_labels_csv",
    "subsample_per_class",
    "downsample_images",
    "unit_normalize_columns",
]

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
NATIVE_MAGIC = b"LRRM"


class DataFormatError(ValueError):
    """A file failed to parse; message carries the location of the problem."""


@dataclass
class LabeledDataset:
    """m x n data matrix with optional per-column ground-truth labels."""

    X: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""
    provenance: str = ""

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be a 2-D matrix")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite entries")
        self.X = X
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=int)
            if labels.shape != (X.shape[1],):
                raise ValueError(
                    f"labels length {labels.size} != sample count {X.shape[1]}"
                )
            self.labels = labels

    @property
    def n_samples(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class SubspaceGenSpec:
    ambient_dim: int
    num_subspaces: int
    subspace_dim: int
    points_per_subspace: int
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.subspace_dim > self.ambient_dim:
            raise ValueError(
                f"subspace dim {self.subspace_dim} exceeds ambient dim "
                f"{self.ambient_dim}"
            )
        if min(self.num_subspaces, self.subspace_dim, self.points_per_subspace) < 1:
            raise ValueError("counts must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.num_subspaces * self.subspace_dim > self.ambient_dim:
            warnings.warn(
                "k*d exceeds the ambient dimension; subspaces cannot be "
                "mutually independent",
                stacklevel=2,
            )

    def describe(self) -> str:
        return (
            f"synthetic(m={self.ambient_dim},k={self.num_subspaces},"
            f"d={self.subspace_dim},pts={self.points_per_subspace},"
            f"sigma={self.noise_sigma},seed={self.seed})"
        )


def generate_union_of_subspaces(spec: SubspaceGenSpec) -> LabeledDataset:
    """Sample unit-norm points from k seeded random d-dim subspaces of R^m,
    then add entrywise Gaussian noise of std ``noise_sigma``."""
    rng = np.random.default_rng(spec.seed)
    m, d, per = spec.ambient_dim, spec.subspace_dim, spec.points_per_subspace
    blocks = []
    for _ in range(spec.num_subspaces):
        basis, _ = np.linalg.qr(rng.standard_normal((m, d)))
        pts = basis @ rng.standard_normal((d, per))
        pts /= np.linalg.norm(pts, axis=0, keepdims=True)
        blocks.append(pts)
    X = np.concatenate(blocks, axis=1)
    if spec.noise_sigma > 0:
        X = X + spec.noise_sigma * rng.standard_normal(X.shape)
    labels = np.repeat(np.arange(spec.num_subspaces), per)
    return LabeledDataset(X, labels, name="synthetic", provenance=spec.describe())


def _read_maybe_gzip(path) -> bytes:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def load_idx(images_path, labels_path=None) -> LabeledDataset:
    """Read an IDX image file (and optional label file) into columns in [0,1].

    Each image is flattened column-major, so pixel (0,0) lands at row 0 and
    pixel (1,0) at row 1.  Gzipped files are decompressed transparently.
    """
    raw = _read_maybe_gzip(images_path)
    if len(raw) < 16:
        raise DataFormatError(
            f"{images_path}: header truncated, expected 16 bytes, got {len(raw)}"
        )
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IDX_IMAGE_MAGIC:
        raise DataFormatError(
            f"{images_path}: bad magic 0x{magic:08x} at byte offset 0, "
            f"expected 0x{IDX_IMAGE_MAGIC:08x}"
        )
    expected = count * rows * cols
    if len(raw) - 16 != expected:
        raise DataFormatError(
            f"{images_path}: expected {expected} pixel bytes after offset 16, "
            f"got {len(raw) - 16}"
        )
    pixels = np.frombuffer(raw, dtype=np.uint8, offset=16)
    imgs = pixels.reshape(count, rows, cols)
    # column-major flatten per image: transpose then ravel row-major
    X = np.transpose(imgs, (0, 2, 1)).reshape(count, rows * cols).T
    X = X.astype(float) / 255.0

    labels = None
    if labels_path is not None:
        lraw = _read_maybe_gzip(labels_path)
        if len(lraw) < 8:
            raise DataFormatError(
                f"{labels_path}: header truncated, expected 8 bytes, got {len(lraw)}"
            )
        lmagic, lcount = struct.unpack(">II", lraw[:8])
        if lmagic != IDX_LABEL_MAGIC:
            raise DataFormatError(
                f"{labels_path}: bad magic 0x{lmagic:08x} at byte offset 0, "
                f"expected 0x{IDX_LABEL_MAGIC:08x}"
            )
        if len(lraw) - 8 != lcount:
            raise DataFormatError(
                f"{labels_path}: expected {lcount} label bytes after offset 8, "
                f"got {len(lraw) - 8}"
            )
        if lcount != count:
            raise ValueError(
                f"label count {lcount} does not match image count {count}"
            )
        labels = np.frombuffer(lraw, dtype=np.uint8, offset=8).astype(int)
    return LabeledDataset(
        X, labels, name="idx", provenance=str(images_path)
    )


def load_csv_matrix(path, has_labels: bool = False) -> LabeledDataset:
    """Numeric CSV where columns are samples; optional final integer label row."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for r, row in enumerate(csv.reader(f)):
            if not row:
                continue
            if rows and len(row) != len(rows[0][1]):
                raise DataFormatError(
                    f"{path}: row {r}: expected {len(rows[0][1])} columns, "
                    f"got {len(row)}"
                )
            rows.append((r, row))
    if not rows:
        raise DataFormatError(f"{path}: no data rows")

    def parse(r, row, conv, kind):
        out = []
        for c, cell in enumerate(row):
            try:
                out.append(conv(cell))
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {r}, column {c}: not {kind}: {cell!r}"
                ) from None
        return out

    label_row = None
    if has_labels:
        if len(rows) < 2:
            raise DataFormatError(f"{path}: label row present but no data rows")
        r, row = rows[-1]
        label_row = parse(r, row, int, "an integer")
        rows = rows[:-1]
    X = np.array([parse(r, row, float, "numeric") for r, row in rows])
    labels = np.array(label_row) if label_row is not None else None
    return LabeledDataset(X, labels, name="csv", provenance=str(path))


def save_csv_matrix(path, X: np.ndarray, labels=None) -> None:
    """Write a matrix (and optional label row) in full float64 precision."""
    X = np.asarray(X, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as f:
        for row in X:
            f.write(",".join(f"{v:.17g}" for v in row) + "\n")
        if labels is not None:
            f.write(",".join(str(int(v)) for v in labels) + "\n")


def read_native(path) -> LabeledDataset:
    """Read the native binary format; bit-exact inverse of write_native."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 12:
        raise DataFormatError(
            f"{path}: header truncated, expected 12 bytes, got {len(raw)}"
        )
    if raw[:4] != NATIVE_MAGIC:
        raise DataFormatError(
            f"{path}: bad magic {raw[:4]!r} at byte offset 0, expected "
            f"{NATIVE_MAGIC!r}"
        )
    nrows, ncols = struct.unpack("<II", raw[4:12])
    body = nrows * ncols * 8
    rest = len(raw) - 12 - body
    if rest not in (0, 4 * ncols):
        raise DataFormatError(
            f"{path}: expected {body} payload bytes plus an optional "
            f"{4 * ncols}-byte label block after offset 12, got {len(raw) - 12}"
        )
    X = np.frombuffer(raw, dtype="<f8", offset=12, count=nrows * ncols)
    X = X.reshape(nrows, ncols).copy()
    labels = None
    if rest:
        labels = np.frombuffer(raw, dtype="<i4", offset=12 + body).astype(int)
    return LabeledDataset(X, labels, name="native", provenance=str(path))


def write_native(path, X: np.ndarray, labels=None) -> None:
    X = np.ascontiguousarray(X, dtype="<f8")
    with open(path, "wb") as f:
        f.write(NATIVE_MAGIC)
        f.write(struct.pack("<II", X.shape[0], X.shape[1]))
        f.write(X.tobytes())
        if labels is not None:
            labels = np.ascontiguousarray(labels, dtype="<i4")
            if labels.shape != (X.shape[1],):
                raise ValueError("labels length must equal column count")
            f.write(labels.tobytes())


def write_labels_csv(path, labels) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("index,label\n")
        for i, v in enumerate(np.asarray(labels, dtype=int)):
            f.write(f"{i},{v}\n")


def read_labels_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["index", "label"]:
            raise DataFormatError(
                f"{path}: expected header 'index,label', got {header}"
            )
        pairs = []
        for r, row in enumerate(reader, start=1):
            if not row:
                continue
            try:
                pairs.append((int(row[0]), int(row[1])))
            except (ValueError, IndexError):
                raise DataFormatError(f"{path}: row {r}: bad label row {row}") from None
    pairs.sort()
    return np.array([v for _, v in pairs], dtype=int)


def subsample_per_class(
    ds: LabeledDataset, per_class: int, seed: int
) -> LabeledDataset:
    """Seeded draw of ``per_class`` columns from every class, classes visited
    in ascending label order; selected columns keep their original order
    within each class."""
    if ds.labels is None:
        raise ValueError("dataset has no labels to subsample by")
    if per_class < 1:
        raise ValueError("per_class must be positive")
    rng = np.random.default_rng(seed)
    keep = []
    for cls in np.unique(ds.labels):
        idx = np.flatnonzero(ds.labels == cls)
        if idx.size < per_class:
            raise ValueError(
                f"class {cls} has {idx.size} samples, need {per_class}"
            )
        chosen = rng.choice(idx, size=per_class, replace=False)
        keep.append(np.sort(chosen))
    keep = np.concatenate(keep)
    return LabeledDataset(
        ds.X[:, keep],
        ds.labels[keep],
        name=ds.name,
        provenance=f"{ds.provenance}|subsample(per_class={per_class},seed={seed})",
    )


def _overlap_weights(src: int, dst: int) -> np.ndarray:
    """dst x src area-average weights: W[i, j] = |cell_i ∩ cell_j| / |cell_i|
    for destination cells of width src/dst laid over unit source cells."""
    W = np.zeros((dst, src))
    scale = src / dst
    for i in range(dst):
        lo, hi = i * scale, (i + 1) * scale
        j0, j1 = int(np.floor(lo)), int(np.ceil(hi))
        for j in range(j0, min(j1, src)):
            W[i, j] = max(0.0, min(hi, j + 1) - max(lo, j)) / scale
    return W


def downsample_images(
    ds: LabeledDataset, from_h: int, from_w: int, to_h: int, to_w: int
) -> LabeledDataset:
    """Area-average (box filter) downsampling of column-major flattened images."""
    m = ds.X.shape[0]
    if m != from_h * from_w:
        raise ValueError(
            f"data has {m} rows, expected from_h*from_w = {from_h * from_w}"
        )
    if to_h > from_h or to_w > from_w or min(to_h, to_w) < 1:
        raise ValueError("target size must be positive and no larger than source")
    Wr = _overlap_weights(from_h, to_h)
    Wc = _overlap_weights(from_w, to_w)
    out = np.empty((to_h * to_w, ds.X.shape[1]))
    for i in range(ds.X.shape[1]):
        img = ds.X[:, i].reshape(from_h, from_w, order="F")
        out[:, i] = (Wr @ img @ Wc.T).reshape(-1, order="F")
    return LabeledDataset(
        out,
        ds.labels,
        name=ds.name,
        provenance=f"{ds.provenance}|downsample({from_h}x{from_w}->{to_h}x{to_w})",
    )


def unit_normalize_columns(ds: LabeledDataset) -> LabeledDataset:
    """Scale every non-zero column to unit Euclidean norm."""
    norms = np.linalg.norm(ds.X, axis=0, keepdims=True)
    X = np.divide(ds.X, norms, out=ds.X.copy(), where=norms > 0)
    return LabeledDataset(
        X, ds.labels, name=ds.name, provenance=f"{ds.provenance}|unit_columns"
    )
