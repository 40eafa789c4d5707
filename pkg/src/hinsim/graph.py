"""Typed graph data model and edge-list ingestion.

A heterogeneous information network (HIN) is a graph whose vertices and
edges both carry types.  Edge types declare their endpoint vertex types and
whether they are directed; an undirected edge type can be traversed in both
orientations and is its own reverse.

The graph is immutable after loading and safe for unsynchronized shared
reads.  Vertex ids are opaque strings externally and dense integer indices
internally, so adjacency and embedding lookups are plain array indexing.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy import sparse


class HinError(Exception):
    """Base class for graph construction and lookup errors."""


class SchemaError(HinError):
    pass


class EdgeListError(HinError):
    pass


class UnknownVertexError(HinError):
    pass


@dataclass(frozen=True)
class VertexType:
    name: str


@dataclass(frozen=True)
class EdgeType:
    name: str
    src_type: VertexType
    dst_type: VertexType
    directed: bool = False


@dataclass(frozen=True)
class Relation:
    """One traversal orientation of an edge type.

    ``reverse=True`` walks an undirected edge type from its declared dst
    side to its src side (the P-A reading of an undirected A-P).  Directed
    edge types only exist in their forward orientation.
    """

    edge_type: EdgeType
    reverse: bool = False

    def __post_init__(self):
        if self.reverse and self.edge_type.directed:
            raise SchemaError(
                f"directed edge type {self.edge_type.name!r} cannot be traversed in reverse"
            )

    @property
    def src_type(self) -> VertexType:
        return self.edge_type.dst_type if self.reverse else self.edge_type.src_type

    @property
    def dst_type(self) -> VertexType:
        return self.edge_type.src_type if self.reverse else self.edge_type.dst_type

    @property
    def name(self) -> str:
        return self.edge_type.name

    def reversed(self) -> "Relation":
        if self.edge_type.src_type == self.edge_type.dst_type:
            return self
        return Relation(self.edge_type, not self.reverse)

    def __str__(self):
        return f"{self.src_type.name}>{self.dst_type.name}[{self.edge_type.name}]"


class Schema:
    """Registry of vertex types and edge types; names unique per kind."""

    def __init__(self):
        self.vertex_types: dict[str, VertexType] = {}
        self.edge_types: dict[str, EdgeType] = {}

    def add_vertex_type(self, name: str) -> VertexType:
        if name in self.vertex_types:
            raise SchemaError(f"duplicate vertex type {name!r}")
        vt = VertexType(name)
        self.vertex_types[name] = vt
        return vt

    def add_edge_type(self, name, src_name, dst_name, directed=False) -> EdgeType:
        if name in self.edge_types:
            raise SchemaError(f"duplicate edge type {name!r}")
        for t in (src_name, dst_name):
            if t not in self.vertex_types:
                raise SchemaError(f"edge type {name!r} references unknown vertex type {t!r}")
        et = EdgeType(name, self.vertex_types[src_name], self.vertex_types[dst_name], directed)
        self.edge_types[name] = et
        return et

    def vertex_type(self, name: str) -> VertexType:
        if name not in self.vertex_types:
            raise SchemaError(f"unknown vertex type {name!r}")
        return self.vertex_types[name]

    def edge_type(self, name: str) -> EdgeType:
        if name not in self.edge_types:
            raise SchemaError(f"unknown edge type {name!r}")
        return self.edge_types[name]

    def relations_between(self, src_name: str, dst_name: str) -> list[Relation]:
        """All traversal orientations leading from one vertex type to another."""
        out = []
        for et in self.edge_types.values():
            if et.src_type.name == src_name and et.dst_type.name == dst_name:
                out.append(Relation(et, reverse=False))
            elif (
                not et.directed
                and et.src_type.name == dst_name
                and et.dst_type.name == src_name
                and et.src_type != et.dst_type
            ):
                out.append(Relation(et, reverse=True))
        return out


def _csr_from_entries(n, srcs, dsts, weights):
    """CSR arrays from parallel edge lists; input order kept within each row."""
    srcs = np.asarray(srcs, dtype=np.int64)
    dsts = np.asarray(dsts, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    order = np.argsort(srcs, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(np.bincount(srcs, minlength=n))
    return indptr, dsts[order], weights[order]


class HIN:
    """Immutable typed multigraph with per-relation CSR adjacency.

    Parallel edges are kept as distinct adjacency entries; undirected edge
    types are materialized in both orientations.
    """

    def __init__(self, schema: Schema, vertex_ids, vertex_type_names, edges):
        """Build from dense data.

        ``edges`` is a list of (src_index, dst_index, edge_type_name, weight)
        already oriented so that src matches the edge type's declared
        src_type.  Prefer :func:`load_hin` for textual inputs.
        """
        self.schema = schema
        self._ids = list(vertex_ids)
        self._index = {vid: i for i, vid in enumerate(self._ids)}
        if len(self._index) != len(self._ids):
            raise HinError("duplicate vertex ids")
        self._vtypes = [schema.vertex_type(t) for t in vertex_type_names]
        self._type_index = {name: k for k, name in enumerate(sorted(schema.vertex_types))}
        self._vtype_codes = np.array(
            [self._type_index[t.name] for t in self._vtypes], dtype=np.int32
        )

        n = len(self._ids)
        by_type: dict[str, list] = {name: [] for name in schema.edge_types}
        for u, v, type_name, w in edges:
            et = schema.edge_type(type_name)
            if w < 0:
                raise EdgeListError(f"negative weight on edge ({self._ids[u]}, {self._ids[v]})")
            if self._vtypes[u] != et.src_type or self._vtypes[v] != et.dst_type:
                raise EdgeListError(
                    f"edge ({self._ids[u]}, {self._ids[v]}) does not match "
                    f"{et.name!r} endpoint types {et.src_type.name}-{et.dst_type.name}"
                )
            by_type[type_name].append((u, v, w))

        # Undirected types get a mirrored reverse CSR; a self-type (X-X)
        # holds both directions in one CSR that serves both orientations.
        self._adj: dict[tuple[str, bool], tuple] = {}
        for name, et in schema.edge_types.items():
            entries = by_type[name]
            srcs = [e[0] for e in entries]
            dsts = [e[1] for e in entries]
            wts = [e[2] for e in entries]
            if not et.directed and et.src_type == et.dst_type:
                fwd = _csr_from_entries(n, srcs + dsts, dsts + srcs, wts + wts)
                self._adj[(name, False)] = fwd
                self._adj[(name, True)] = fwd
            elif not et.directed:
                self._adj[(name, False)] = _csr_from_entries(n, srcs, dsts, wts)
                self._adj[(name, True)] = _csr_from_entries(n, dsts, srcs, wts)
            else:
                self._adj[(name, False)] = _csr_from_entries(n, srcs, dsts, wts)
        self._matrices: dict[tuple[str, bool], sparse.csr_matrix] = {}

    @property
    def n_vertices(self) -> int:
        return len(self._ids)

    @property
    def vertex_ids(self) -> list[str]:
        return list(self._ids)

    def index_of(self, vertex_id: str) -> int:
        try:
            return self._index[vertex_id]
        except KeyError:
            raise UnknownVertexError(f"unknown vertex {vertex_id!r}") from None

    def vertex_id(self, index: int) -> str:
        return self._ids[index]

    def vertex_type(self, vertex_id: str) -> VertexType:
        return self._vtypes[self.index_of(vertex_id)]

    def vertex_type_at(self, index: int) -> VertexType:
        return self._vtypes[index]

    def vertices_of_type(self, type_name: str) -> np.ndarray:
        code = self._type_index.get(type_name)
        if code is None:
            raise SchemaError(f"unknown vertex type {type_name!r}")
        return np.flatnonzero(self._vtype_codes == code)

    def adjacency(self, relation: Relation):
        """(indptr, targets, weights) CSR arrays for a traversal orientation."""
        key = (relation.edge_type.name, relation.reverse)
        if key not in self._adj:
            raise SchemaError(f"no adjacency stored for relation {relation}")
        return self._adj[key]

    def sparse_matrix(self, relation: Relation) -> sparse.csr_matrix:
        """Adjacency as a scipy CSR matrix; duplicate columns are preserved
        so parallel edges keep multiplying path counts under matvec."""
        key = (relation.edge_type.name, relation.reverse)
        if key not in self._matrices:
            indptr, targets, weights = self.adjacency(relation)
            n = self.n_vertices
            self._matrices[key] = sparse.csr_matrix(
                (weights, targets, indptr), shape=(n, n), copy=False
            )
        return self._matrices[key]

    def neighbors(self, vertex_id: str, relation: Relation):
        """Adjacency list of ``vertex_id`` under one traversal orientation.

        Returns (neighbor id, weight) pairs in a stable order (input edge
        order); parallel edges appear once per occurrence.
        """
        u = self.index_of(vertex_id)
        indptr, targets, weights = self.adjacency(relation)
        lo, hi = indptr[u], indptr[u + 1]
        return [(self._ids[targets[k]], float(weights[k])) for k in range(lo, hi)]

    def adjacency_entry_count(self) -> int:
        """Total directed adjacency entries across all stored orientations."""
        seen = set()
        total = 0
        for csr in self._adj.values():
            if id(csr) in seen:
                continue
            seen.add(id(csr))
            total += len(csr[1])
        return total


def _iter_lines(source):
    """Yield (line_number, stripped_line) from a path, file object, or
    iterable of lines, skipping blanks and '#' comments."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            yield from _iter_lines(fh)
        return
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


def parse_schema(source) -> Schema:
    """Parse the schema file: ``vertex<TAB>NAME`` and
    ``edge<TAB>NAME<TAB>SRC<TAB>DST<TAB>{undirected|directed}`` lines."""
    schema = Schema()
    for lineno, line in _iter_lines(source):
        fields = line.split("\t")
        kind = fields[0]
        try:
            if kind == "vertex":
                if len(fields) != 2:
                    raise SchemaError("expected 'vertex<TAB>NAME'")
                schema.add_vertex_type(fields[1])
            elif kind == "edge":
                if len(fields) != 5:
                    raise SchemaError("expected 'edge<TAB>NAME<TAB>SRC<TAB>DST<TAB>DIRECTEDNESS'")
                if fields[4] not in ("undirected", "directed"):
                    raise SchemaError(f"directedness must be 'undirected' or 'directed', got {fields[4]!r}")
                schema.add_edge_type(fields[1], fields[2], fields[3], fields[4] == "directed")
            else:
                raise SchemaError(f"unknown record kind {kind!r}")
        except SchemaError as exc:
            raise SchemaError(f"schema line {lineno}: {exc}") from None
    if not schema.vertex_types:
        raise SchemaError("schema declares no vertex types")
    return schema


def load_hin(schema_source, edge_source, vertex_source=None) -> HIN:
    """Load a HIN from schema text and a TSV edge list.

    Edge lines are ``src<TAB>dst<TAB>edge_type[<TAB>weight]``, weight
    defaulting to 1.  ``vertex_source`` optionally declares vertices as
    ``vertex_id<TAB>type`` lines (needed for isolated vertices); otherwise
    vertex types are inferred from the edge types they appear under.
    Undirected edges may be written in either orientation.
    """
    schema = parse_schema(schema_source)

    ids: list[str] = []
    index: dict[str, int] = {}
    vtypes: list[VertexType | None] = []

    def intern(vertex_id, vtype=None, where=""):
        if vertex_id not in index:
            index[vertex_id] = len(ids)
            ids.append(vertex_id)
            vtypes.append(vtype)
        i = index[vertex_id]
        if vtype is not None:
            if vtypes[i] is None:
                vtypes[i] = vtype
            elif vtypes[i] != vtype:
                raise EdgeListError(
                    f"{where}: vertex {vertex_id!r} is {vtypes[i].name} but used as {vtype.name}"
                )
        return i

    if vertex_source is not None:
        for lineno, line in _iter_lines(vertex_source):
            fields = line.split("\t")
            if len(fields) != 2:
                raise EdgeListError(f"vertex line {lineno}: expected 'vertex_id<TAB>type'")
            try:
                vt = schema.vertex_type(fields[1])
            except SchemaError as exc:
                raise EdgeListError(f"vertex line {lineno}: {exc}") from None
            intern(fields[0], vt, f"vertex line {lineno}")

    edges = []
    for lineno, line in _iter_lines(edge_source):
        fields = line.split("\t")
        if len(fields) not in (3, 4):
            raise EdgeListError(
                f"edge line {lineno}: expected 'src<TAB>dst<TAB>edge_type[<TAB>weight]'"
            )
        src_id, dst_id, type_name = fields[:3]
        try:
            et = schema.edge_type(type_name)
        except SchemaError as exc:
            raise EdgeListError(f"edge line {lineno}: {exc}") from None
        weight = 1.0
        if len(fields) == 4:
            try:
                weight = float(fields[3])
            except ValueError:
                raise EdgeListError(f"edge line {lineno}: bad weight {fields[3]!r}") from None
            if weight < 0:
                raise EdgeListError(f"edge line {lineno}: negative weight")

        # Orient undirected edges so src carries the declared src_type.
        src_known = index.get(src_id) is not None and vtypes[index[src_id]] is not None
        dst_known = index.get(dst_id) is not None and vtypes[index[dst_id]] is not None
        flip = False
        if not et.directed and et.src_type != et.dst_type:
            if src_known and vtypes[index[src_id]] == et.dst_type:
                flip = True
            elif dst_known and vtypes[index[dst_id]] == et.src_type:
                flip = True
        if flip:
            src_id, dst_id = dst_id, src_id
        where = f"edge line {lineno}"
        u = intern(src_id, et.src_type, where)
        v = intern(dst_id, et.dst_type, where)
        edges.append((u, v, type_name, weight))

    missing = [ids[i] for i, t in enumerate(vtypes) if t is None]
    if missing:
        raise EdgeListError(f"vertices with undeclared type: {missing}")
    return HIN(schema, ids, [t.name for t in vtypes], edges)
