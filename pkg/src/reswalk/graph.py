"""CSR graph storage, edge-list parsing, synthetic weights/labels, binary I/O.

Graphs are directed and immutable once built: ``offsets[v]:offsets[v+1]``
slices ``targets``/``weights``/``labels`` to give v's out-neighbors, sorted
by target id so membership tests can binary-search. Duplicate edges and
self-loops are preserved; their weight simply adds mass.
"""

import io
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ParseError, ValidationError

MAGIC = b"FWG1"
_FLAG_WEIGHTS = 1
_FLAG_LABELS = 2


@dataclass
class EdgeList:
    """Parsed edges in input order; missing weights default to 1, labels to 0."""

    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    label: np.ndarray

    def __len__(self):
        return len(self.src)

    def __iter__(self):
        for s, d, w, l in zip(self.src, self.dst, self.weight, self.label):
            yield int(s), int(d), float(w), int(l)


@dataclass
class Graph:
    vertex_count: int
    edge_count: int
    offsets: np.ndarray   # int64, len V+1
    targets: np.ndarray   # uint32, len E
    weights: np.ndarray   # float32, len E
    labels: np.ndarray | None = None  # uint8, len E

    def degree(self, v):
        return int(self.offsets[v + 1] - self.offsets[v])

    def neighbor_slice(self, v):
        return slice(int(self.offsets[v]), int(self.offsets[v + 1]))

    def neighbors(self, v):
        return self.targets[self.neighbor_slice(v)]

    def max_degree(self):
        if self.vertex_count == 0:
            return 0
        return int(np.max(np.diff(self.offsets)))

    def max_degree_vertex(self):
        if self.vertex_count == 0:
            raise ValidationError("empty graph has no max-degree vertex")
        return int(np.argmax(np.diff(self.offsets)))

    def edge_labels(self):
        """Labels array, materializing zeros once for unlabeled graphs."""
        if self.labels is not None:
            return self.labels
        cached = getattr(self, "_zero_labels", None)
        if cached is None:
            cached = np.zeros(self.edge_count, dtype=np.uint8)
            self._zero_labels = cached
        return cached

    def validate(self):
        if self.offsets[0] != 0 or self.offsets[-1] != self.edge_count:
            raise ValidationError("offsets must start at 0 and end at edge_count")
        if np.any(np.diff(self.offsets) < 0):
            raise ValidationError("offsets must be non-decreasing")
        if self.edge_count and int(self.targets.max(initial=0)) >= self.vertex_count:
            raise ValidationError("target id out of range")
        if np.any(~np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise ValidationError("weights must be finite and non-negative")
        return self


def parse_edge_list(source, undirected=False):
    """Parse whitespace-separated "src dst [weight] [label]" lines.

    ``source`` is a text stream or iterable of lines. Lines starting with
    '#' or '%' and blank lines are skipped. Malformed tokens raise
    ParseError with the offending line number; negative or non-finite
    weights raise ValidationError. ``undirected=True`` emits both directions
    of every edge.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    src, dst, wgt, lab = [], [], [], []
    for lineno, raw in enumerate(source, 1):
        line = raw.strip()
        if not line or line[0] in "#%":
            continue
        parts = line.split()
        if len(parts) < 2 or len(parts) > 4:
            raise ParseError(f"expected 2-4 fields, got {len(parts)}", line=lineno)
        try:
            s, d = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) > 2 else 1.0
            l = int(parts[3]) if len(parts) > 3 else 0
        except ValueError as exc:
            raise ParseError(f"malformed token ({exc})", line=lineno) from None
        if s < 0 or d < 0:
            raise ValidationError("negative vertex id", line=lineno)
        if not np.isfinite(w) or w < 0:
            raise ValidationError(f"negative or non-finite weight {w}", line=lineno)
        if l < 0 or l > 255:
            raise ValidationError(f"label {l} outside [0, 255]", line=lineno)
        src.append(s)
        dst.append(d)
        wgt.append(w)
        lab.append(l)
        if undirected:
            src.append(d)
            dst.append(s)
            wgt.append(w)
            lab.append(l)
    return EdgeList(
        src=np.asarray(src, dtype=np.uint32),
        dst=np.asarray(dst, dtype=np.uint32),
        weight=np.asarray(wgt, dtype=np.float32),
        label=np.asarray(lab, dtype=np.uint8),
    )


def build_csr(edges, vertex_count=None):
    """Build the CSR graph; neighbor lists come out sorted by target id.

    Duplicate edges are kept (stable order among equal targets). Vertex ids
    must be < vertex_count; if vertex_count is omitted it is inferred as
    max(id) + 1.
    """
    n_edges = len(edges)
    if vertex_count is None:
        vertex_count = 0
        if n_edges:
            vertex_count = int(max(edges.src.max(), edges.dst.max())) + 1
    if n_edges:
        hi = int(max(edges.src.max(), edges.dst.max()))
        if hi >= vertex_count:
            raise ValidationError(
                f"vertex id {hi} out of range for vertex_count={vertex_count}")
    # lexsort is stable: primary key src, secondary dst, ties keep input order
    order = np.lexsort((edges.dst, edges.src))
    offsets = np.zeros(vertex_count + 1, dtype=np.int64)
    if n_edges:
        counts = np.bincount(edges.src, minlength=vertex_count)
        offsets[1:] = np.cumsum(counts)
    g = Graph(
        vertex_count=int(vertex_count),
        edge_count=int(n_edges),
        offsets=offsets,
        targets=edges.dst[order].astype(np.uint32),
        weights=edges.weight[order].astype(np.float32),
        labels=edges.label[order].astype(np.uint8),
    )
    return g.validate()


def synthesize_weights(g, seed, distribution="uniform", mu=0.0, sigma=1.0):
    """Replace edge weights deterministically from the seed.

    distribution="uniform" draws from [1, 5); "lognormal" uses the given
    mu/sigma (sigma must be positive).
    """
    rng = np.random.default_rng(seed)
    if distribution == "uniform":
        w = rng.uniform(1.0, 5.0, g.edge_count).astype(np.float32)
        # float32 rounding can land exactly on the open upper bound
        w[w >= 5.0] = np.nextafter(np.float32(5.0), np.float32(1.0))
    elif distribution == "lognormal":
        if sigma <= 0:
            raise ValidationError(f"sigma must be positive, got {sigma}")
        w = rng.lognormal(mu, sigma, g.edge_count).astype(np.float32)
    else:
        raise ValidationError(f"unknown weight distribution {distribution!r}")
    return Graph(g.vertex_count, g.edge_count, g.offsets, g.targets, w, g.labels)


def synthesize_labels(g, seed, label_count):
    """Replace edge labels with uniform draws from [0, label_count)."""
    if label_count < 1:
        raise ValidationError("label_count must be >= 1")
    if label_count > 256:
        raise ValidationError("label_count must fit in a byte")
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, label_count, g.edge_count, dtype=np.uint8)
    return Graph(g.vertex_count, g.edge_count, g.offsets, g.targets,
                 g.weights, labels)


def save_binary(g, path):
    """Write the little-endian binary format (see README for the layout)."""
    flags = _FLAG_WEIGHTS | (_FLAG_LABELS if g.labels is not None else 0)
    header = MAGIC + struct.pack("<QQB", g.vertex_count, g.edge_count, flags)
    payload = [
        g.offsets.astype("<u8").tobytes(),
        g.targets.astype("<u4").tobytes(),
        g.weights.astype("<f4").tobytes(),
    ]
    if g.labels is not None:
        payload.append(g.labels.astype("u1").tobytes())
    crc = 0
    for chunk in payload:
        crc = zlib.crc32(chunk, crc)
    with open(path, "wb") as fh:
        fh.write(header)
        for chunk in payload:
            fh.write(chunk)
        fh.write(struct.pack("<I", crc))


def load_binary(path):
    """Read a graph written by save_binary, verifying magic/size/checksum."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 21 or blob[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic (not a graph file)")
    v, e, flags = struct.unpack_from("<QQB", blob, 4)
    pos = 21
    sizes = [8 * (v + 1), 4 * e, 4 * e]
    if flags & _FLAG_LABELS:
        sizes.append(e)
    need = pos + sum(sizes) + 4
    if len(blob) != need:
        raise FormatError(
            f"{path}: truncated or oversized file ({len(blob)} bytes, want {need})")
    payload = blob[pos:need - 4]
    (crc,) = struct.unpack_from("<I", blob, need - 4)
    if zlib.crc32(payload) != crc:
        raise FormatError(f"{path}: checksum mismatch")
    offsets = np.frombuffer(blob, dtype="<u8", count=v + 1, offset=pos).astype(np.int64)
    pos += sizes[0]
    targets = np.frombuffer(blob, dtype="<u4", count=e, offset=pos).astype(np.uint32)
    pos += sizes[1]
    weights = np.frombuffer(blob, dtype="<f4", count=e, offset=pos).astype(np.float32)
    pos += sizes[2]
    labels = None
    if flags & _FLAG_LABELS:
        labels = np.frombuffer(blob, dtype="u1", count=e, offset=pos).copy()
    g = Graph(int(v), int(e), offsets, targets, weights, labels)
    return g.validate()


def random_edge_list(vertex_count, edge_count, seed):
    """Uniform random directed edges; weights 1.0, labels 0."""
    rng = np.random.default_rng(seed)
    return EdgeList(
        src=rng.integers(0, vertex_count, edge_count, dtype=np.uint32),
        dst=rng.integers(0, vertex_count, edge_count, dtype=np.uint32),
        weight=np.ones(edge_count, dtype=np.float32),
        label=np.zeros(edge_count, dtype=np.uint8),
    )


def star_edge_list(leaves):
    """Hub 0 points at every leaf and each leaf points back (d_max = leaves)."""
    hub = np.zeros(leaves, dtype=np.uint32)
    leaf = np.arange(1, leaves + 1, dtype=np.uint32)
    return EdgeList(
        src=np.concatenate([hub, leaf]),
        dst=np.concatenate([leaf, hub]),
        weight=np.ones(2 * leaves, dtype=np.float32),
        label=np.zeros(2 * leaves, dtype=np.uint8),
    )
