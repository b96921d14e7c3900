"""Reading link graphs and matrices, and emitting them back.

Three input formats:

* edge list -- one ``src dst`` pair per line, whitespace separated, 1-based
  ids, ``#`` starts a comment. Every node's out-links get uniform weight
  (the hyperlink-matrix convention). Nodes without out-links are rejected
  unless a dangling policy says otherwise.
* matrix CSV -- m lines of m comma-separated probabilities.
* matrix JSON -- ``{"matrix": [[...]], "damping": [...]}``; damping optional.

Damping weights default to uniform when the input does not provide them.
Matrix JSON emitted by :func:`emit_matrix_json` uses exact (shortest
round-trip) float formatting, so emit -> ingest is lossless.
"""

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DampingVector, StochasticMatrix
from .errors import IngestError


class GraphFormat(enum.Enum):
    EDGE_LIST = "edges"
    MATRIX_CSV = "csv"
    MATRIX_JSON = "json"


class DanglingPolicy(enum.Enum):
    REJECT = "reject"
    SELF_LOOP = "self-loop"
    UNIFORM_JUMP = "uniform-jump"


@dataclass(frozen=True)
class GraphInput:
    """Parsed input prior to matrix construction."""

    format: GraphFormat
    node_count: int
    payload: object
    damping: np.ndarray = None


def guess_format(path) -> GraphFormat:
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        return GraphFormat.MATRIX_JSON
    if suffix == ".csv":
        return GraphFormat.MATRIX_CSV
    return GraphFormat.EDGE_LIST


def _parse_edge_list(text: str) -> GraphInput:
    edges = []
    max_node = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise IngestError(f"line {lineno}: expected 'src dst', got {raw!r}")
        try:
            src, dst = int(parts[0]), int(parts[1])
        except ValueError:
            raise IngestError(f"line {lineno}: node ids must be integers, got {raw!r}")
        if src < 1 or dst < 1:
            raise IngestError(f"line {lineno}: node ids are 1-based, got {src} -> {dst}")
        edges.append((src - 1, dst - 1))
        max_node = max(max_node, src, dst)
    if not edges:
        raise IngestError("edge list contains no edges")
    return GraphInput(GraphFormat.EDGE_LIST, max_node, tuple(edges))


def _parse_matrix_csv(text: str) -> GraphInput:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            rows.append([float(x) for x in line.split(",")])
        except ValueError:
            raise IngestError(f"line {lineno}: could not parse CSV floats: {raw!r}")
    if not rows:
        raise IngestError("CSV matrix is empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows) or width != len(rows):
        raise IngestError(f"CSV matrix must be square, got {len(rows)} rows of width {width}")
    return GraphInput(GraphFormat.MATRIX_CSV, len(rows), np.array(rows))


def _parse_matrix_json(text: str) -> GraphInput:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "matrix" not in doc:
        raise IngestError("matrix JSON must be an object with a 'matrix' field")
    matrix = np.array(doc["matrix"], dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise IngestError(f"'matrix' must be square, got shape {matrix.shape}")
    damping = None
    if doc.get("damping") is not None:
        damping = np.array(doc["damping"], dtype=float)
        if damping.shape != (matrix.shape[0],):
            raise IngestError("'damping' length must match the matrix dimension")
    return GraphInput(GraphFormat.MATRIX_JSON, matrix.shape[0], matrix, damping)


def read_graph(path, fmt: GraphFormat = None) -> GraphInput:
    """Parse a file into a :class:`GraphInput` without building the matrix."""
    path = Path(path)
    if not path.exists():
        raise IngestError(f"input file not found: {path}")
    text = path.read_text()
    fmt = fmt or guess_format(path)
    if fmt is GraphFormat.EDGE_LIST:
        return _parse_edge_list(text)
    if fmt is GraphFormat.MATRIX_CSV:
        return _parse_matrix_csv(text)
    return _parse_matrix_json(text)


def build_matrix(
    graph: GraphInput,
    dangling: DanglingPolicy = DanglingPolicy.REJECT,
    row_tol: float = 1e-12,
) -> StochasticMatrix:
    """Turn parsed input into a validated stochastic matrix.

    Edge lists get uniform out-link weights; duplicate edges are collapsed.
    Dangling nodes (no out-links) follow the policy: reject, add a self-loop,
    or jump uniformly to every node.
    """
    if graph.format is not GraphFormat.EDGE_LIST:
        try:
            return StochasticMatrix(graph.payload, row_tol)
        except ValueError as exc:
            raise IngestError(f"matrix failed validation: {exc}") from exc

    m = graph.node_count
    out = [set() for _ in range(m)]
    for src, dst in graph.payload:
        out[src].add(dst)
    entries = np.zeros((m, m))
    for i, targets in enumerate(out):
        if targets:
            w = 1.0 / len(targets)
            for j in targets:
                entries[i, j] = w
        elif dangling is DanglingPolicy.SELF_LOOP:
            entries[i, i] = 1.0
        elif dangling is DanglingPolicy.UNIFORM_JUMP:
            entries[i, :] = 1.0 / m
        else:
            raise IngestError(
                f"node {i + 1} has no out-links; choose a dangling policy "
                "(self-loop or uniform-jump) to accept it"
            )
    return StochasticMatrix(entries, row_tol)


def ingest(
    path,
    fmt: GraphFormat = None,
    dangling: DanglingPolicy = DanglingPolicy.REJECT,
    row_tol: float = 1e-12,
):
    """Read a file and return ``(matrix, damping_or_None)``.

    Only matrix JSON can carry damping weights; other formats return None and
    callers fall back to uniform weights.
    """
    graph = read_graph(path, fmt)
    matrix = build_matrix(graph, dangling, row_tol)
    damping = None
    if graph.damping is not None:
        try:
            damping = DampingVector(graph.damping, row_tol)
        except ValueError as exc:
            raise IngestError(f"damping failed validation: {exc}") from exc
    return matrix, damping


def load_damping(path, dim: int, row_tol: float = 1e-12) -> DampingVector:
    """Read damping weights from a whitespace-separated text file."""
    path = Path(path)
    if not path.exists():
        raise IngestError(f"damping file not found: {path}")
    try:
        weights = [float(x) for x in path.read_text().split()]
    except ValueError as exc:
        raise IngestError(f"damping file must contain floats: {exc}") from exc
    if len(weights) != dim:
        raise IngestError(f"damping file has {len(weights)} entries, expected {dim}")
    try:
        return DampingVector(np.array(weights), row_tol)
    except ValueError as exc:
        raise IngestError(f"damping failed validation: {exc}") from exc


def emit_matrix_json(matrix: StochasticMatrix, damping: DampingVector = None) -> str:
    """Serialize a matrix (and optional damping) losslessly to matrix JSON."""
    doc = {
        "dim": matrix.dim,
        "matrix": [[float(x) for x in row] for row in matrix.entries],
    }
    if damping is not None:
        doc["damping"] = [float(x) for x in damping.weights]
    return json.dumps(doc, indent=2)
