"""Command-line surface: train, search, eval, counts, synth.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.  Commands
never mutate their inputs; artifact-producing commands write a JSON run
manifest (resolved configuration, input digests, seed, timings) alongside
their outputs so a run can be reproduced.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from importlib import metadata

from .counting import dump_counts_tsv, precompute_counts
from .evaluation import EvalError, Grouping, SyntheticSpec, auc, generate_planted_records, load_grouping
from .graph import HinError, load_hin
from .metapath import parse_meta_path, render_meta_path
from .model import ModelError, load_embeddings, save_biases, save_embeddings
from .sampler import SamplerError
from .search import SearchError, SimilarityIndex, top_k
from .trainer import TrainConfig, TrainingError, resolve_seed, train

_ERRORS = (HinError, SamplerError, ModelError, SearchError, EvalError, TrainingError, OSError)


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _version() -> str:
    try:
        return metadata.version("hinsim")
    except metadata.PackageNotFoundError:
        return "unknown"


def write_manifest(path, command, config, inputs, outputs, seed, elapsed) -> None:
    manifest = {
        "command": command,
        "config": config,
        "inputs": {str(p): _digest(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "seed": seed,
        "version": _version(),
        "elapsed_seconds": round(elapsed, 3),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_weighted_meta_path(raw: str):
    """'SPEC' or 'SPEC:WEIGHT' (weight must parse as a float)."""
    if ":" in raw:
        head, tail = raw.rsplit(":", 1)
        try:
            return head, float(tail)
        except ValueError:
            pass
    return raw, None


def _load_graph(args):
    return load_hin(args.schema, args.edges, args.vertex_types)


def cmd_train(args) -> int:
    hin = _load_graph(args)
    specs = [_parse_weighted_meta_path(raw) for raw in args.meta_path]
    weights = [1.0 if w is None else w for _, w in specs]
    if any(w <= 0 for w in weights):
        print("error: meta-path weights must be positive", file=sys.stderr)
        return 1
    total = sum(weights)
    if abs(total - 1.0) > 1e-9:
        print(
            f"warning: meta-path weights sum to {total:g}; renormalizing to 1",
            file=sys.stderr,
        )
        weights = [w / total for w in weights]
    metas = [parse_meta_path(spec, hin.schema) for spec, _ in specs]

    seed = resolve_seed(args.seed)
    cfg = TrainConfig(
        meta_paths=list(zip(metas, weights)),
        mode=args.mode,
        d=args.dim,
        K=args.neg,
        gamma=args.gamma,
        total_samples=args.samples,
        lr_init=args.lr,
        threads=args.threads,
        seed=seed,
        symmetric=args.symmetric,
    )
    t0 = time.perf_counter()
    params, report = train(hin, cfg)
    save_embeddings(params, args.out)
    sidecar = args.out + ".bias"
    save_biases(params, sidecar)
    manifest = args.out + ".manifest.json"
    write_manifest(
        manifest,
        "train",
        {
            "meta_paths": [
                {"spec": render_meta_path(mp, hin.schema), "weight": w}
                for mp, w in cfg.meta_paths
            ],
            "mode": cfg.mode,
            "dim": cfg.d,
            "neg": cfg.K,
            "gamma": cfg.gamma,
            "samples": cfg.total_samples,
            "lr": cfg.lr_init,
            "lr_floor": cfg.lr_floor,
            "threads": cfg.threads,
            "symmetric": cfg.symmetric,
        },
        [args.schema, args.edges, args.vertex_types],
        [args.out, sidecar],
        seed,
        time.perf_counter() - t0,
    )
    return 0


def cmd_search(args) -> int:
    ids, matrix = load_embeddings(args.embeddings)
    types = None
    if args.vertex_types:
        from .graph import _iter_lines

        types = dict(line.split("\t")[:2] for _, line in _iter_lines(args.vertex_types))
    if args.type and types is None:
        print("error: --type requires --vertex-types", file=sys.stderr)
        return 1
    index = SimilarityIndex(ids, matrix, types)
    results = top_k(index, args.query, args.k, args.type)
    for rank, (vid, sim) in enumerate(results, start=1):
        sys.stdout.write(f"{rank}\t{vid}\t{sim:.6f}\n")
    return 0


def cmd_eval(args) -> int:
    ids, matrix = load_embeddings(args.embeddings)
    index = SimilarityIndex(ids, matrix)
    grouping = load_grouping(args.labels)
    print(f"AUC={auc(index, grouping):.4f}")
    return 0


def cmd_counts(args) -> int:
    hin = _load_graph(args)
    meta_path = parse_meta_path(args.meta_path, hin.schema)
    dump_counts_tsv(precompute_counts(hin, meta_path), hin, sys.stdout)
    return 0


def cmd_synth(args) -> int:
    import os

    spec = SyntheticSpec(
        communities=args.communities,
        authors_per_community=args.authors,
        venues_per_community=args.venues,
        papers_per_author=args.papers_per_author,
        noise=args.noise,
        seed=resolve_seed(args.seed),
    )
    t0 = time.perf_counter()
    schema, vertices, edges, labels = generate_planted_records(spec)
    os.makedirs(args.out_dir, exist_ok=True)
    outputs = []
    for name, lines in [
        ("schema.tsv", schema),
        ("vertices.tsv", vertices),
        ("edges.tsv", edges),
        ("labels.tsv", labels),
    ]:
        path = os.path.join(args.out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        outputs.append(path)
    write_manifest(
        os.path.join(args.out_dir, "manifest.json"),
        "synth",
        {
            "communities": spec.communities,
            "authors_per_community": spec.authors_per_community,
            "venues_per_community": spec.venues_per_community,
            "papers_per_author": spec.papers_per_author,
            "noise": spec.noise,
        },
        [],
        outputs,
        spec.seed,
        time.perf_counter() - t0,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hinsim",
        description="Meta-path guided embedding and similarity search for typed graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="learn vertex embeddings from path-instance samples")
    p.add_argument("--schema", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--vertex-types", required=True)
    p.add_argument(
        "--meta-path",
        action="append",
        required=True,
        metavar="SPEC[:WEIGHT]",
        help="vertex-type walk, repeatable; e.g. A-P-V-P-A:0.9",
    )
    p.add_argument("--mode", required=True, choices=["seq", "pair"])
    p.add_argument("--out", required=True, help="embedding file path")
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--neg", type=int, default=5)
    p.add_argument("--gamma", type=float, default=0.75)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--lr", type=float, default=0.25)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--symmetric", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("search", help="top-k similar vertices from an embedding file")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--type", default=None, help="restrict results to one vertex type")
    p.add_argument("--vertex-types", default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("eval", help="grouping-label AUC of an embedding file")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("counts", help="dump per-position path-instance counts as TSV")
    p.add_argument("--schema", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--vertex-types", required=True)
    p.add_argument("--meta-path", required=True)
    p.set_defaults(func=cmd_counts)

    p = sub.add_parser("synth", help="generate a planted-community dataset")
    p.add_argument("--communities", type=int, default=2)
    p.add_argument("--authors", type=int, default=50)
    p.add_argument("--venues", type=int, default=5)
    p.add_argument("--papers-per-author", type=int, default=4)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
