"""Weakly supervised dataset: domain types, file ingestion, majority voting, stats.

Canonical file formats (shared with the CLI harness and the synthetic
generator):

* documents file: one record per line, ``id<TAB>text``
* gold file (optional): ``id<TAB>class_id``
* Z file: header line ``N L``, then one ``sample_id<TAB>lf_id`` pair per
  matched cell
* T file: header line ``L K``, then one-hot rows ``lf_id<TAB>class_id``
  (fractional refined matrices are written as ``lf_id<TAB>v0<TAB>v1...``)

External string sample ids are re-indexed to dense integers 0..N-1
preserving file order; the mapping is kept on the dataset and emitted
alongside run outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from wsdenoise.seeding import derive_seed


@dataclass(frozen=True)
class WeakDataset:
    """Immutable container for documents, LF matches and the LF-class mapping.

    Safe to share read-only across workers; all denoising code treats it as
    constant after construction.
    """

    texts: list[str]
    ids: list[str]
    z: sp.csr_array          # N x L, entries in {0, 1}
    t: np.ndarray            # L x K, rows nonnegative
    num_classes: int
    gold: np.ndarray | None = None

    def __post_init__(self):
        n, l = self.z.shape
        if len(self.texts) != n or len(self.ids) != n:
            raise ValueError("document count does not match Z row count")
        if self.t.shape != (l, self.num_classes):
            raise ValueError(
                f"T shape {self.t.shape} inconsistent with L={l}, K={self.num_classes}"
            )
        if self.num_classes < 2:
            raise ValueError("need at least 2 classes")
        data = self.z.data
        if data.size and not np.isin(data, (0, 1)).all():
            raise ValueError("Z entries must be 0 or 1")
        if (self.t < 0).any():
            raise ValueError("T entries must be nonnegative")
        if self.gold is not None:
            if len(self.gold) != n:
                raise ValueError("gold label vector length mismatch")
            if self.gold.size and (self.gold.min() < 0 or self.gold.max() >= self.num_classes):
                raise ValueError("gold labels out of range")

    @property
    def n_samples(self) -> int:
        return self.z.shape[0]

    @property
    def n_lfs(self) -> int:
        return self.z.shape[1]

    @property
    def lf_hits(self) -> np.ndarray:
        """Per-sample number of matched LFs."""
        return np.asarray(self.z.sum(axis=1)).ravel()

    @property
    def matched_mask(self) -> np.ndarray:
        return self.lf_hits > 0

    def signature(self, i: int) -> tuple[int, ...]:
        """Sorted set of LF indices matched in sample i (may be empty)."""
        row = self.z[[i], :].tocoo()
        return tuple(sorted(int(j) for j in row.coords[1]))

    def signatures(self) -> list[tuple[int, ...]]:
        csr = self.z.tocsr()
        out = []
        for i in range(self.n_samples):
            out.append(tuple(int(j) for j in np.sort(csr.indices[csr.indptr[i]:csr.indptr[i + 1]])))
        return out


@dataclass
class LabelVector:
    """Weak labels plus a mask marking samples with an empty signature."""

    labels: np.ndarray
    was_unmatched: np.ndarray

    def __post_init__(self):
        if len(self.labels) != len(self.was_unmatched):
            raise ValueError("labels and mask length mismatch")

    def copy(self) -> "LabelVector":
        return LabelVector(self.labels.copy(), self.was_unmatched.copy())


@dataclass
class DatasetStats:
    coverage: float
    avg_lf_hits: float
    majority_accuracy: tuple[float, float] | None = None  # (mean, std) over seeds


def _tie_rng(seed: int, sample_id: int) -> np.random.Generator:
    # counter-based stream keyed by (seed, sample id): evaluation order cannot
    # change results
    return np.random.default_rng([seed, sample_id])


def majority_vote(ds: WeakDataset, t_matrix: np.ndarray, seed: int) -> LabelVector:
    """Assign each sample the argmax class of ``row_i(Z) @ t_matrix``.

    Ties among maximal classes are broken uniformly at random from a stream
    keyed by (seed, sample id); samples with an empty signature get a
    uniformly random class and are flagged in ``was_unmatched``.
    """
    t = np.asarray(t_matrix, dtype=float)
    if t.shape != (ds.n_lfs, ds.num_classes):
        raise ValueError("t_matrix shape mismatch")
    if (t < 0).any():
        raise ValueError("t_matrix rows must be nonnegative")
    if (t.sum(axis=1) <= 0).any():
        raise ValueError("t_matrix rows must have positive sum")

    scores = ds.z @ t  # (N, K)
    labels = np.argmax(scores, axis=1).astype(np.int64)
    matched = ds.matched_mask
    row_max = scores.max(axis=1)
    n_tied = (scores == row_max[:, None]).sum(axis=1)

    for i in np.flatnonzero(matched & (n_tied > 1)):
        tied = np.flatnonzero(scores[i] == row_max[i])
        labels[i] = tied[_tie_rng(seed, int(i)).integers(len(tied))]
    for i in np.flatnonzero(~matched):
        labels[i] = _tie_rng(seed, int(i)).integers(ds.num_classes)

    return LabelVector(labels, ~matched)


def dataset_stats(ds: WeakDataset, repeats: int = 5, seed: int = 0) -> DatasetStats:
    """Coverage, mean LF hits, and (with gold) majority-vote accuracy over seeds."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    hits = ds.lf_hits
    coverage = float((hits > 0).mean()) if ds.n_samples else 0.0
    avg_hits = float(hits.mean()) if ds.n_samples else 0.0
    acc = None
    if ds.gold is not None:
        vals = []
        for r in range(repeats):
            lv = majority_vote(ds, ds.t, derive_seed(seed, r))
            vals.append(float((lv.labels == ds.gold).mean()))
        std = float(np.std(vals, ddof=1)) if repeats > 1 else 0.0
        acc = (float(np.mean(vals)), std)
    return DatasetStats(coverage, avg_hits, acc)


# ---------------------------------------------------------------------------
# file ingestion / serialization


def _read_lines(path):
    with open(path, encoding="utf-8") as f:
        return f.read().splitlines()


def load_dataset(doc_path, z_path, t_path, gold_path=None) -> WeakDataset:
    """Load a dataset from the canonical file layout, validating as it goes.

    Malformed rows, out-of-range indices, non-one-hot T rows and inconsistent
    dimensions are all reported with the offending file and line number.
    """
    ids, texts = [], []
    seen = {}
    for lineno, line in enumerate(_read_lines(doc_path), 1):
        if not line:
            continue
        if "\t" not in line:
            raise ValueError(f"{doc_path} line {lineno}: expected 'id<TAB>text'")
        sid, text = line.split("\t", 1)
        if sid in seen:
            raise ValueError(f"{doc_path} line {lineno}: duplicate sample id {sid!r}")
        seen[sid] = len(ids)
        ids.append(sid)
        texts.append(text)
    n = len(ids)

    z_lines = _read_lines(z_path)
    if not z_lines:
        raise ValueError(f"{z_path}: empty file")
    try:
        n_decl, n_lfs = (int(v) for v in z_lines[0].split())
    except ValueError:
        raise ValueError(f"{z_path} line 1: expected header 'N L'") from None
    if n_decl != n:
        raise ValueError(f"{z_path} line 1: declared N={n_decl} but documents file has {n}")
    rows, cols = [], []
    for lineno, line in enumerate(z_lines[1:], 2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{z_path} line {lineno}: expected 'sample_id<TAB>lf_id'")
        sid, lf_s = parts
        if sid not in seen:
            raise ValueError(f"{z_path} line {lineno}: unknown sample id {sid!r}")
        try:
            lf = int(lf_s)
        except ValueError:
            raise ValueError(f"{z_path} line {lineno}: lf_id must be an integer") from None
        if not 0 <= lf < n_lfs:
            raise ValueError(f"{z_path} line {lineno}: LF index out of range ({lf} with L={n_lfs})")
        rows.append(seen[sid])
        cols.append(lf)
    z = sp.csr_array(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n_lfs)
    )
    z.data = np.minimum(z.data, 1)  # tolerate duplicate pairs

    t_lines = _read_lines(t_path)
    if not t_lines:
        raise ValueError(f"{t_path}: empty file")
    try:
        l_decl, k = (int(v) for v in t_lines[0].split())
    except ValueError:
        raise ValueError(f"{t_path} line 1: expected header 'L K'") from None
    if l_decl != n_lfs:
        raise ValueError(f"{t_path} line 1: declared L={l_decl} but Z file has L={n_lfs}")
    t = np.zeros((n_lfs, k), dtype=float)
    for lineno, line in enumerate(t_lines[1:], 2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{t_path} line {lineno}: expected 'lf_id<TAB>class_id'")
        try:
            lf, cls = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"{t_path} line {lineno}: indices must be integers") from None
        if not 0 <= lf < n_lfs:
            raise ValueError(f"{t_path} line {lineno}: LF index out of range")
        if not 0 <= cls < k:
            raise ValueError(f"{t_path} line {lineno}: class index out of range (K={k})")
        t[lf, cls] += 1.0
    bad = np.flatnonzero(t.sum(axis=1) != 1.0)
    if bad.size:
        raise ValueError(f"{t_path}: T row not one-hot for lf_id {int(bad[0])}")

    gold = None
    if gold_path is not None:
        gold = np.full(n, -1, dtype=np.int64)
        for lineno, line in enumerate(_read_lines(gold_path), 1):
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{gold_path} line {lineno}: expected 'id<TAB>class_id'")
            sid, cls_s = parts
            if sid not in seen:
                raise ValueError(f"{gold_path} line {lineno}: unknown sample id {sid!r}")
            cls = int(cls_s)
            if not 0 <= cls < k:
                raise ValueError(f"{gold_path} line {lineno}: class index out of range (K={k})")
            gold[seen[sid]] = cls
        if (gold < 0).any():
            missing = ids[int(np.flatnonzero(gold < 0)[0])]
            raise ValueError(f"{gold_path}: missing gold label for sample id {missing!r}")

    return WeakDataset(texts=texts, ids=ids, z=z, t=t, num_classes=k, gold=gold)


def save_dataset(ds: WeakDataset, doc_path, z_path, t_path, gold_path=None) -> None:
    """Write a dataset back out in the canonical formats (round-trips exactly)."""
    with open(doc_path, "w", encoding="utf-8") as f:
        for sid, text in zip(ds.ids, ds.texts):
            f.write(f"{sid}\t{text}\n")
    coo = ds.z.tocoo()
    cells = sorted(zip(coo.coords[0].tolist(), coo.coords[1].tolist()))
    with open(z_path, "w", encoding="utf-8") as f:
        f.write(f"{ds.n_samples} {ds.n_lfs}\n")
        for i, j in cells:
            f.write(f"{ds.ids[i]}\t{j}\n")
    with open(t_path, "w", encoding="utf-8") as f:
        f.write(f"{ds.n_lfs} {ds.num_classes}\n")
        for l in range(ds.n_lfs):
            f.write(f"{l}\t{int(np.argmax(ds.t[l]))}\n")
    if gold_path is not None and ds.gold is not None:
        with open(gold_path, "w", encoding="utf-8") as f:
            for sid, cls in zip(ds.ids, ds.gold):
                f.write(f"{sid}\t{int(cls)}\n")
