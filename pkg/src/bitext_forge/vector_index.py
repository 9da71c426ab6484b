"""Sharded IVF + product-quantization index over unit-norm sentence embeddings.

Vectors are partitioned by a coarse k-means quantizer; every vector is also
product-quantized on its raw coordinates (no residuals) to one byte per
subspace. A query probes the nearest coarse cells, scores their members with
asymmetric lookup tables and hands the best candidates to exact rescoring.
"""

from __future__ import annotations

import io
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

EMBF_MAGIC = b"EMBF"
EMBF_VERSION = 1
_EMBF_HEADER = struct.Struct("<4sIIIB")

INDEX_MAGIC = b"IVPQ"
INDEX_VERSION = 1
_INDEX_HEADER = struct.Struct("<4sIIIIIQQ")

NORM_TOL = 1e-4


class EmbfFormatError(ValueError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at byte offset {offset})")


class IndexBuildError(ValueError):
    """Invalid index parameters or shape mismatch."""


# ---------------------------------------------------------------------------
# Embedding files
# ---------------------------------------------------------------------------


@dataclass
class EmbeddingMatrix:
    data: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.ndim != 2:
            raise ValueError(f"embedding data must be 2-D, got shape {self.data.shape}")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.n

    def check_normalized(self, tol: float = NORM_TOL) -> bool:
        if self.n == 0:
            return True
        norms = np.linalg.norm(self.data.astype(np.float64), axis=1)
        return bool(np.all(np.abs(norms - 1.0) <= tol))


def _as_array(m: EmbeddingMatrix | np.ndarray) -> np.ndarray:
    return m.data if isinstance(m, EmbeddingMatrix) else np.asarray(m, dtype=np.float32)


def encode_embeddings(m: EmbeddingMatrix) -> bytes:
    header = _EMBF_HEADER.pack(EMBF_MAGIC, EMBF_VERSION, m.n, m.d, int(m.normalized))
    return header + m.data.astype("<f4", copy=False).tobytes(order="C")


def decode_embeddings(buf: bytes) -> EmbeddingMatrix:
    if len(buf) < _EMBF_HEADER.size:
        raise EmbfFormatError(f"truncated header: {len(buf)} of {_EMBF_HEADER.size} bytes", len(buf))
    magic, version, n, d, flag = _EMBF_HEADER.unpack_from(buf, 0)
    if magic != EMBF_MAGIC:
        raise EmbfFormatError(f"bad magic {magic!r}, expected {EMBF_MAGIC!r}", 0)
    if version != EMBF_VERSION:
        raise EmbfFormatError(f"unsupported version {version}", 4)
    if d == 0:
        raise EmbfFormatError("dimension d must be positive", 12)
    if flag not in (0, 1):
        raise EmbfFormatError(f"normalized flag must be 0 or 1, got {flag}", 16)
    expected = _EMBF_HEADER.size + 4 * n * d
    if len(buf) < expected:
        raise EmbfFormatError(
            f"truncated payload: header declares {n}x{d} floats ({4 * n * d} bytes), "
            f"found {len(buf) - _EMBF_HEADER.size}",
            len(buf),
        )
    if len(buf) > expected:
        raise EmbfFormatError(f"{len(buf) - expected} trailing bytes after payload", expected)
    data = np.frombuffer(buf, dtype="<f4", count=n * d, offset=_EMBF_HEADER.size).reshape(n, d)
    return EmbeddingMatrix(data.astype(np.float32), normalized=bool(flag))


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    return decode_embeddings(Path(path).read_bytes())


def save_embeddings(path: str | Path, m: EmbeddingMatrix) -> None:
    Path(path).write_bytes(encode_embeddings(m))


def l2_normalize(m: EmbeddingMatrix | np.ndarray) -> EmbeddingMatrix:
    data = _as_array(m).astype(np.float64)
    norms = np.linalg.norm(data, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ValueError(f"cannot normalize zero vector at row {int(zero[0])}")
    return EmbeddingMatrix((data / norms[:, None]).astype(np.float32), normalized=True)


# ---------------------------------------------------------------------------
# k-means and product quantization
# ---------------------------------------------------------------------------


def _sq_dists(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    d = (x * x).sum(1)[:, None] - 2.0 * x @ c.T + (c * c).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _nearest(x: np.ndarray, c: np.ndarray, x_sq: np.ndarray | None = None):
    """Index of and squared distance to the nearest row of ``c`` for every row of ``x``."""
    partial = x @ (-2.0 * c.T)
    partial += (c * c).sum(1)[None, :]
    labels = partial.argmin(1)
    if x_sq is None:
        x_sq = (x * x).sum(1)
    dist = np.maximum(partial[np.arange(x.shape[0]), labels] + x_sq, 0.0)
    return labels, dist


@dataclass
class KMeans:
    centroids: np.ndarray
    labels: np.ndarray
    costs: list[float] = field(default_factory=list)

    @property
    def inertia(self) -> float:
        return self.costs[-1] if self.costs else 0.0


def _kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _sq_dists(x, x[chosen])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            # all remaining points coincide with a chosen centroid
            free = np.setdiff1d(np.arange(n), chosen)
            idx = int(free[rng.integers(free.size)])
        chosen.append(idx)
        closest = np.minimum(closest, _sq_dists(x, x[idx : idx + 1])[:, 0])
    return x[chosen].copy()


def kmeans(
    m: EmbeddingMatrix | np.ndarray, k: int, iters: int = 25, seed: int | np.random.SeedSequence = 0
) -> KMeans:
    """Lloyd's algorithm from a k-means++ start.

    ``costs[t]`` is the within-cluster sum of squares after the t-th
    assignment step; it never increases. A cluster that empties is reseeded
    on the point currently farthest from its centroid.
    """
    x = _as_array(m).astype(np.float64)
    n = x.shape[0]
    if k < 1 or k > n:
        raise ValueError(f"k={k} must satisfy 1 <= k <= n={n}")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp(x, k, rng)
    costs: list[float] = []
    x_sq = (x * x).sum(1)
    for _ in range(max(iters, 1)):
        labels, point_cost = _nearest(x, centroids, x_sq)
        costs.append(float(point_cost.sum()))
        counts = np.bincount(labels, minlength=k)
        sums = np.stack(
            [np.bincount(labels, weights=x[:, j], minlength=k) for j in range(x.shape[1])], 1
        )
        nonempty = counts > 0
        new = centroids.copy()
        new[nonempty] = sums[nonempty] / counts[nonempty, None]
        empty = np.flatnonzero(~nonempty)
        if empty.size:
            # farthest points first, lowest index on ties
            order = np.lexsort((np.arange(n), -point_cost))
            for c, p in zip(empty, order):
                new[c] = x[p]
        if np.array_equal(new, centroids):
            break
        centroids = new
    labels, point_cost = _nearest(x, centroids, x_sq)
    final = float(point_cost.sum())
    if final != costs[-1]:
        costs.append(final)
    return KMeans(centroids.astype(np.float32), labels, costs)


def pq_train(
    m: EmbeddingMatrix | np.ndarray,
    m_sub: int,
    seed: int = 0,
    ksub: int = 256,
    iters: int = 25,
) -> np.ndarray:
    """Train per-subspace codebooks, shape ``(m_sub, ksub, d // m_sub)``."""
    x = _as_array(m)
    n, d = x.shape
    if m_sub < 1 or d % m_sub:
        raise IndexBuildError(f"dimension {d} is not divisible by m_sub={m_sub}")
    if not 1 <= ksub <= 256:
        raise IndexBuildError(f"ksub={ksub} must be in [1, 256] to fit one byte per code")
    if n < ksub:
        raise IndexBuildError(f"need at least {ksub} training vectors, got {n}")
    dsub = d // m_sub
    seeds = np.random.SeedSequence(seed).spawn(m_sub)
    books = np.empty((m_sub, ksub, dsub), dtype=np.float32)
    for j in range(m_sub):
        books[j] = kmeans(x[:, j * dsub : (j + 1) * dsub], ksub, iters, seeds[j]).centroids
    return books


def pq_encode(m: EmbeddingMatrix | np.ndarray, codebooks: np.ndarray) -> np.ndarray:
    x = _as_array(m)
    m_sub, ksub, dsub = codebooks.shape
    if x.ndim != 2 or x.shape[1] != m_sub * dsub:
        raise IndexBuildError(f"vectors of shape {x.shape} do not match codebooks {codebooks.shape}")
    codes = np.empty((x.shape[0], m_sub), dtype=np.uint8)
    for j in range(m_sub):
        sub = x[:, j * dsub : (j + 1) * dsub].astype(np.float64)
        codes[:, j] = _nearest(sub, codebooks[j].astype(np.float64))[0]
    return codes


def pq_decode(codes: np.ndarray, codebooks: np.ndarray) -> EmbeddingMatrix:
    m_sub, ksub, dsub = codebooks.shape
    if codes.ndim != 2 or codes.shape[1] != m_sub:
        raise IndexBuildError(f"codes of shape {codes.shape} do not match {m_sub} subspaces")
    if codes.size and int(codes.max()) >= ksub:
        raise IndexBuildError(f"code {int(codes.max())} out of range for {ksub} centroids")
    parts = [codebooks[j][codes[:, j]] for j in range(m_sub)]
    data = np.concatenate(parts, axis=1) if parts else np.empty((0, 0), np.float32)
    return EmbeddingMatrix(data, normalized=False)


# ---------------------------------------------------------------------------
# IVF-PQ index
# ---------------------------------------------------------------------------


@dataclass
class Candidate:
    target_id: int
    approx_score: float
    exact_score: float | None = None


@dataclass
class IvfPqIndex:
    centroids: np.ndarray  # (k_c, d) float32
    codebooks: np.ndarray  # (m_sub, ksub, d // m_sub) float32
    codes: np.ndarray  # (n, m_sub) uint8
    lists: list[np.ndarray]  # per-centroid local row ids, ascending
    id_offset: int = 0
    seed: int = 0

    @property
    def d(self) -> int:
        return self.centroids.shape[1]

    @property
    def k_c(self) -> int:
        return self.centroids.shape[0]

    @property
    def m_sub(self) -> int:
        return self.codebooks.shape[0]

    @property
    def n(self) -> int:
        return self.codes.shape[0]


def _assign(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return _nearest(x.astype(np.float64), centroids.astype(np.float64))[0]


def build_index(
    m: EmbeddingMatrix | np.ndarray,
    k_c: int = 64,
    m_sub: int = 16,
    seed: int = 0,
    *,
    ksub: int | None = None,
    iters: int = 25,
    id_offset: int = 0,
) -> IvfPqIndex:
    """Train the coarse quantizer and PQ codebooks on ``m`` and index every row.

    ``ksub=None`` uses 256 sub-centroids, or ``n`` when the data has fewer
    than 256 rows.
    """
    if isinstance(m, EmbeddingMatrix) and not m.normalized and not m.check_normalized():
        raise IndexBuildError("index input must be unit-norm; call l2_normalize first")
    x = _as_array(m)
    n, d = x.shape
    if ksub is None:
        ksub = min(256, n)
    coarse_seed, pq_seed = np.random.SeedSequence(seed).spawn(2)
    centroids = kmeans(x, k_c, iters, coarse_seed).centroids
    pq_seed_int = int(pq_seed.generate_state(1)[0])
    codebooks = pq_train(x, m_sub, pq_seed_int, ksub=ksub, iters=iters)
    codes = pq_encode(x, codebooks)
    labels = _assign(x, centroids)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(k_c + 1))
    lists = [order[bounds[c] : bounds[c + 1]].astype(np.int64) for c in range(k_c)]
    return IvfPqIndex(centroids, codebooks, codes, lists, id_offset=id_offset, seed=seed)


def probe_order(index: IvfPqIndex, q: np.ndarray) -> np.ndarray:
    """Coarse cells sorted from nearest to farthest (lowest cell id on ties)."""
    dist = _sq_dists(q[None, :].astype(np.float64), index.centroids.astype(np.float64))[0]
    return np.argsort(dist, kind="stable")


def _check_query(index: IvfPqIndex, q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float32).reshape(-1)
    if q.shape[0] != index.d:
        raise IndexBuildError(f"query dimension {q.shape[0]} != index dimension {index.d}")
    return q


def query(
    index: IvfPqIndex, q, top_clusters: int = 64, top_k: int | None = 16
) -> list[Candidate]:
    """Approximate inner-product search over the ``top_clusters`` nearest cells.

    ``top_k=None`` returns every scanned vector.
    """
    q = _check_query(index, q)
    if index.n == 0:
        return []
    cells = probe_order(index, q)[: max(top_clusters, 0)]
    rows = [index.lists[c] for c in cells if index.lists[c].size]
    if not rows:
        return []
    rows = np.concatenate(rows)
    m_sub, _, dsub = index.codebooks.shape
    qs = q.astype(np.float64).reshape(m_sub, dsub)
    table = np.einsum("jkd,jd->jk", index.codebooks.astype(np.float64), qs)
    scores = table[np.arange(m_sub)[None, :], index.codes[rows]].sum(1)
    ids = rows + index.id_offset
    order = np.lexsort((ids, -scores))
    if top_k is not None:
        order = order[:top_k]
    return [Candidate(int(ids[i]), float(scores[i])) for i in order]


def rescore_exact(
    cands: Sequence[Candidate], full: EmbeddingMatrix | np.ndarray, q, id_offset: int = 0
) -> list[Candidate]:
    """Attach exact cosine scores (``full`` rows are local ids ``target_id - id_offset``)."""
    data = _as_array(full)
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    out = []
    for c in cands:
        row = c.target_id - id_offset
        if not 0 <= row < data.shape[0]:
            raise IndexBuildError(f"candidate id {c.target_id} outside the full-precision matrix")
        exact = float(np.clip(np.dot(data[row].astype(np.float64), q), -1.0, 1.0))
        out.append(Candidate(c.target_id, c.approx_score, exact))
    out.sort(key=lambda c: (-c.exact_score, c.target_id))
    return out


def merge_shards(per_shard_best: Sequence[Candidate | None]) -> Candidate | None:
    """Best rescored candidate across shards; ``None`` when every shard came up empty."""
    best = None
    for c in per_shard_best:
        if c is None:
            continue
        if c.exact_score is None:
            raise ValueError(f"candidate {c.target_id} has not been rescored")
        if best is None or (c.exact_score, -c.target_id) > (best.exact_score, -best.target_id):
            best = c
    return best


# ---------------------------------------------------------------------------
# Shards
# ---------------------------------------------------------------------------


@dataclass
class Shard:
    index: IvfPqIndex
    full: EmbeddingMatrix


@dataclass
class ShardSet:
    shards: list[Shard]

    def __post_init__(self):
        dims = {s.index.d for s in self.shards}
        if len(dims) > 1:
            raise IndexBuildError(f"shards disagree on dimension: {sorted(dims)}")
        spans = sorted((s.index.id_offset, s.index.id_offset + s.index.n) for s in self.shards)
        for (_, end), (start, _) in zip(spans, spans[1:]):
            if start < end:
                raise IndexBuildError("shard id ranges overlap")

    def __len__(self) -> int:
        return len(self.shards)

    @property
    def n(self) -> int:
        return sum(s.index.n for s in self.shards)


def build_shards(
    m: EmbeddingMatrix,
    n_shards: int = 5,
    k_c: int = 64,
    m_sub: int = 16,
    seed: int = 0,
    *,
    ksub: int | None = None,
    iters: int = 25,
    jobs: int = 1,
) -> ShardSet:
    """Split ``m`` into contiguous id ranges and index each range separately."""
    if n_shards < 1:
        raise ValueError("n_shards must be >= 1")
    bounds = np.linspace(0, m.n, n_shards + 1).astype(int)
    seeds = np.random.SeedSequence(seed).generate_state(n_shards)
    parts = [(int(bounds[i]), int(bounds[i + 1])) for i in range(n_shards)]
    parts = [(lo, hi) for lo, hi in parts if hi > lo]

    def one(i: int) -> Shard:
        lo, hi = parts[i]
        sub = EmbeddingMatrix(m.data[lo:hi], normalized=m.normalized)
        k = min(k_c, hi - lo)
        idx = build_index(sub, k, m_sub, int(seeds[i]), ksub=ksub, iters=iters, id_offset=lo)
        return Shard(idx, sub)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            shards = list(pool.map(one, range(len(parts))))
    else:
        shards = [one(i) for i in range(len(parts))]
    return ShardSet(shards)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def encode_index(index: IvfPqIndex) -> bytes:
    m_sub, ksub, _ = index.codebooks.shape
    buf = io.BytesIO()
    buf.write(
        _INDEX_HEADER.pack(
            INDEX_MAGIC, INDEX_VERSION, index.d, index.k_c, m_sub, ksub, index.n, index.id_offset
        )
    )
    buf.write(struct.pack("<Q", index.seed & 0xFFFFFFFFFFFFFFFF))
    buf.write(index.centroids.astype("<f4").tobytes())
    buf.write(index.codebooks.astype("<f4").tobytes())
    buf.write(index.codes.astype(np.uint8).tobytes())
    sizes = np.array([lst.size for lst in index.lists], dtype="<u8")
    buf.write(sizes.tobytes())
    for lst in index.lists:
        buf.write(lst.astype("<u8").tobytes())
    return buf.getvalue()


def decode_index(raw: bytes) -> IvfPqIndex:
    if len(raw) < _INDEX_HEADER.size + 8:
        raise EmbfFormatError("truncated index header", len(raw))
    magic, version, d, k_c, m_sub, ksub, n, id_offset = _INDEX_HEADER.unpack_from(raw, 0)
    if magic != INDEX_MAGIC:
        raise EmbfFormatError(f"bad index magic {magic!r}", 0)
    if version != INDEX_VERSION:
        raise EmbfFormatError(f"unsupported index version {version}", 4)
    if m_sub == 0 or d % m_sub:
        raise EmbfFormatError(f"dimension {d} not divisible by m_sub={m_sub}", 16)
    pos = _INDEX_HEADER.size
    (seed,) = struct.unpack_from("<Q", raw, pos)
    pos += 8

    def take(dtype: str, count: int, shape) -> np.ndarray:
        nonlocal pos
        size = np.dtype(dtype).itemsize * count
        if pos + size > len(raw):
            raise EmbfFormatError("truncated index section", pos)
        arr = np.frombuffer(raw, dtype=dtype, count=count, offset=pos).reshape(shape)
        pos += size
        return arr

    centroids = take("<f4", k_c * d, (k_c, d)).astype(np.float32)
    codebooks = take("<f4", m_sub * ksub * (d // m_sub), (m_sub, ksub, d // m_sub)).astype(np.float32)
    codes = take("u1", n * m_sub, (n, m_sub)).copy()
    sizes = take("<u8", k_c, (k_c,))
    lists = [take("<u8", int(s), (int(s),)).astype(np.int64) for s in sizes]
    if pos != len(raw):
        raise EmbfFormatError(f"{len(raw) - pos} trailing bytes in index", pos)
    return IvfPqIndex(centroids, codebooks, codes, lists, id_offset=int(id_offset), seed=int(seed))


def save_index(path: str | Path, index: IvfPqIndex) -> None:
    Path(path).write_bytes(encode_index(index))


def load_index(path: str | Path) -> IvfPqIndex:
    return decode_index(Path(path).read_bytes())
