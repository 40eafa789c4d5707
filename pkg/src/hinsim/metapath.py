"""Meta-paths, sub-meta-paths, and concrete path instances.

A meta-path is a schema-level walk: a sequence of compatible traversal
orientations (the outgoing vertex type of each step matches the incoming
vertex type of the next).  Slicing a meta-path yields a sub-meta-path;
contiguous slices key the per-relation bias parameters of the model.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .graph import HIN, HinError, Relation, Schema


class MetaPathError(HinError):
    pass


class AmbiguousStepError(MetaPathError):
    pass


class IncompatibleStepError(MetaPathError):
    pass


@dataclass(frozen=True)
class MetaPath:
    """A compatible sequence of traversal orientations; length L >= 1."""

    steps: tuple[Relation, ...]

    def __post_init__(self):
        if not self.steps:
            raise MetaPathError("meta-path must have length >= 1")
        for a, b in zip(self.steps, self.steps[1:]):
            if a.dst_type != b.src_type:
                raise IncompatibleStepError(
                    f"step {a} leads to {a.dst_type.name} but next step {b} "
                    f"starts at {b.src_type.name}"
                )

    def __len__(self):
        return len(self.steps)

    @property
    def vertex_type_names(self) -> tuple[str, ...]:
        """The L+1 vertex type labels along the walk."""
        names = [self.steps[0].src_type.name]
        names.extend(s.dst_type.name for s in self.steps)
        return tuple(names)

    def key(self) -> tuple[str, ...]:
        """Canonical parameter key: the edge-type name sequence.

        Both traversal orientations of an undirected edge type contribute
        the same name, so e.g. positions (1,1) and (2,2) of A-P-A resolve
        to one key.
        """
        return tuple(s.edge_type.name for s in self.steps)

    def key_string(self) -> str:
        return "|".join(self.key())

    def __str__(self):
        return "-".join(self.vertex_type_names)


def sub_meta_path(meta_path: MetaPath, s: int, t: int) -> MetaPath:
    """The contiguous slice of steps s..t, 1-based inclusive."""
    L = len(meta_path)
    if not (1 <= s <= t <= L):
        raise MetaPathError(f"sub-meta-path indices ({s}, {t}) out of range for length {L}")
    return MetaPath(meta_path.steps[s - 1 : t])


_TOKEN = re.compile(r"\[[^\]]+\]|[^\-\[\]]+")


def parse_meta_path(spec: str, schema: Schema) -> MetaPath:
    """Parse a dash-separated vertex-type walk, e.g. ``A-P-V-P-A``.

    When more than one edge type connects a consecutive vertex-type pair,
    the step must name it explicitly in brackets: ``P-[cites]-P``.
    """
    if not spec or not spec.strip():
        raise MetaPathError("empty meta-path spec")
    tokens = _TOKEN.findall(spec)

    walk: list[str] = []
    qualifiers: list[str | None] = []
    pending: str | None = None
    for tok in tokens:
        if tok.startswith("["):
            if not walk or pending is not None:
                raise MetaPathError(f"misplaced edge qualifier {tok} in {spec!r}")
            pending = tok[1:-1]
        else:
            if walk:
                qualifiers.append(pending)
                pending = None
            walk.append(tok)
    if pending is not None:
        raise MetaPathError(f"trailing edge qualifier in {spec!r}")
    if len(walk) < 2:
        raise MetaPathError(f"meta-path spec {spec!r} needs at least two vertex types")

    for name in walk:
        schema.vertex_type(name)

    steps = []
    for (src, dst), qual in zip(zip(walk, walk[1:]), qualifiers):
        candidates = schema.relations_between(src, dst)
        if qual is not None:
            candidates = [r for r in candidates if r.edge_type.name == qual]
        if not candidates:
            raise IncompatibleStepError(
                f"no edge type connects {src}-{dst}"
                + (f" with name {qual!r}" if qual else "")
            )
        if len(candidates) > 1:
            names = sorted(r.edge_type.name for r in candidates)
            raise AmbiguousStepError(
                f"step {src}-{dst} is ambiguous between edge types {names}; "
                f"use the explicit form {src}-[NAME]-{dst}"
            )
        steps.append(candidates[0])
    return MetaPath(tuple(steps))


def render_meta_path(meta_path: MetaPath, schema: Schema) -> str:
    """Canonical spec string; round-trips through :func:`parse_meta_path`."""
    parts = [meta_path.steps[0].src_type.name]
    for step in meta_path.steps:
        src, dst = step.src_type.name, step.dst_type.name
        if len(schema.relations_between(src, dst)) > 1:
            parts.append(f"[{step.edge_type.name}]")
        parts.append(dst)
    return "-".join(parts)


@dataclass(frozen=True)
class PathInstance:
    """A concrete vertex chain following a meta-path.

    ``vertices`` are L+1 dense indices.  Positive samples are connected
    walks; negative samples reuse the shape without their edges having to
    exist in the graph.
    """

    meta_path: MetaPath
    vertices: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) != len(self.meta_path) + 1:
            raise MetaPathError(
                f"instance has {len(self.vertices)} vertices for a "
                f"length-{len(self.meta_path)} meta-path"
            )

    def edges(self):
        """(u, v, relation) triples along the chain."""
        return [
            (self.vertices[i], self.vertices[i + 1], step)
            for i, step in enumerate(self.meta_path.steps)
        ]

    def vertex_ids(self, hin: HIN) -> tuple[str, ...]:
        return tuple(hin.vertex_id(i) for i in self.vertices)


def validate_instance(hin: HIN, inst: PathInstance) -> None:
    """Check type match, chaining, and edge existence; raises on violation."""
    for pos, (u, v, step) in enumerate(inst.edges(), start=1):
        if hin.vertex_type_at(u) != step.src_type or hin.vertex_type_at(v) != step.dst_type:
            raise MetaPathError(
                f"instance edge {pos} ({hin.vertex_id(u)}, {hin.vertex_id(v)}) "
                f"mismatches step {step}"
            )
        indptr, targets, _ = hin.adjacency(step)
        if v not in targets[indptr[u] : indptr[u + 1]]:
            raise MetaPathError(
                f"no edge {hin.vertex_id(u)} -> {hin.vertex_id(v)} of type "
                f"{step.edge_type.name!r} (instance edge {pos})"
            )
