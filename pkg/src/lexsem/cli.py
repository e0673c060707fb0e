"""Command-line entry point wiring the retrieval and evaluation pipeline.

Subcommands: index, retrieve, evaluate, tune, generate. Every produced run
file is accompanied by a .manifest.json sufficient to reproduce it.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, asdict
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .corpus import load_corpus, load_queries
from .dense import read_embeddings
from .evaluation import evaluate_run, qrels_from_queries, read_run_file, write_run_file
from .fusion import MODES, OBJECTIVES, FusionConfig, Resources, retrieve, tune_alpha
from .generation import GenerationConfig, run_generation
from .lexical import DEFAULT_B, DEFAULT_K1, TokenizerConfig, build_index, load_index, save_index


@dataclass
class RunManifest:
    mode: str
    config: dict
    inputs: dict[str, str]  # path -> sha256
    tool_version: str
    created_utc: str

    def write(self, run_path: Path) -> None:
        manifest_path = run_path.with_name(run_path.name + ".manifest.json")
        with open(manifest_path, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, indent=2, sort_keys=True)
            f.write("\n")


def _sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _digest_inputs(paths: dict[str, str | Path | None]) -> dict[str, str]:
    digests = {}
    for label, path in paths.items():
        if path is None:
            continue
        p = Path(path)
        if p.is_dir():
            digest = hashlib.sha256()
            for file in sorted(p.iterdir()):
                if file.is_file():
                    digest.update(file.name.encode("utf-8"))
                    digest.update(bytes.fromhex(_sha256(file)))
            digests[f"{label}:{p}"] = digest.hexdigest()
        else:
            digests[f"{label}:{p}"] = _sha256(p)
    return digests


def _tokenizer_from_args(args) -> TokenizerConfig:
    return TokenizerConfig(lowercase=not args.no_lowercase, min_token_len=args.min_token_len)


def _load_or_build_index(args):
    if getattr(args, "index", None):
        return load_index(args.index)
    if getattr(args, "corpus", None):
        return build_index(load_corpus(args.corpus), _tokenizer_from_args(args), k1=args.k1, b=args.b)
    raise ValueError("need --index or --corpus for this mode")


def _parse_grid(spec: str) -> list[float]:
    """Grid spec: comma list ("0.0,0.3,1.0") or start:stop:step ("0:1:0.1")."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid range must be start:stop:step, got {spec!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        count = int(round((stop - start) / step))
        grid = [round(start + i * step, 10) for i in range(count + 1)]
        return [a for a in grid if a <= stop + 1e-12]
    return [float(p) for p in spec.split(",") if p.strip()]


def cmd_index(args) -> int:
    corpus = load_corpus(args.corpus)
    index = build_index(corpus, _tokenizer_from_args(args), k1=args.k1, b=args.b)
    save_index(index, args.out)
    print(f"indexed {index.n_passages} passages, {len(index.postings)} terms -> {args.out}")
    return 0


def cmd_retrieve(args) -> int:
    queries = load_queries(args.queries)
    resources = Resources(fusion=FusionConfig(alpha=args.alpha, pool_size=args.pool_size, output_k=min(args.k, args.pool_size)))
    if args.mode in ("bm25", "leser"):
        resources.index = _load_or_build_index(args)
    if args.mode in ("dense", "leser"):
        if not args.passage_emb or not args.query_emb:
            raise ValueError(f"{args.mode} mode requires --passage-emb and --query-emb")
        resources.passage_store = read_embeddings(args.passage_emb)
        resources.query_store = read_embeddings(args.query_emb)
    runs = [retrieve(args.mode, q, resources, args.k) for q in queries]
    out = Path(args.out)
    write_run_file(runs, out, tag=args.tag)
    config = {
        "k": args.k,
        "alpha": args.alpha,
        "pool_size": args.pool_size,
        "tag": args.tag,
    }
    if resources.index is not None:
        config.update(
            k1=resources.index.k1,
            b=resources.index.b,
            tokenizer={
                "lowercase": resources.index.tokenizer.lowercase,
                "min_token_len": resources.index.tokenizer.min_token_len,
            },
        )
    manifest = RunManifest(
        mode=args.mode,
        config=config,
        inputs=_digest_inputs(
            {
                "queries": args.queries,
                "index": getattr(args, "index", None),
                "corpus": getattr(args, "corpus", None),
                "passage_emb": args.passage_emb,
                "query_emb": args.query_emb,
            }
        ),
        tool_version=__version__,
        created_utc=datetime.now(timezone.utc).isoformat(),
    )
    manifest.write(out)
    print(f"wrote {len(runs)} runs -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    runs = read_run_file(args.run)
    queries = load_queries(args.queries, require_gold=True)
    report = evaluate_run(runs, qrels_from_queries(queries), args.k)
    payload = report.to_json_dict()
    if args.summary:
        payload.pop("per_query")
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


def cmd_tune(args) -> int:
    queries = load_queries(args.queries, require_gold=True)
    resources = Resources(
        index=_load_or_build_index(args),
        passage_store=read_embeddings(args.passage_emb),
        query_store=read_embeddings(args.query_emb),
        fusion=FusionConfig(pool_size=args.pool_size, output_k=args.k),
    )
    grid = _parse_grid(args.grid)
    alpha_star, report = tune_alpha(queries, resources, grid, objective=args.objective)
    json.dump(
        {"objective": args.objective, "k": args.k, "selected_alpha": alpha_star, "grid": report},
        sys.stdout,
        indent=2,
    )
    print()
    return 0


def cmd_generate(args) -> int:
    queries = load_queries(args.queries)
    runs = read_run_file(args.run)
    corpus = load_corpus(args.corpus)
    cfg = GenerationConfig(
        endpoint_url=args.endpoint,
        model_name=args.model,
        api_key_env_var=args.api_key_env,
        max_contexts=args.max_contexts,
        timeout=args.timeout,
        max_retries=args.max_retries,
        temperature=args.temperature,
    )
    records = run_generation(queries, runs, corpus, cfg, args.out)
    failures = sum(1 for r in records if r.error is not None)
    print(f"wrote {len(records)} answer records ({failures} failed) -> {args.out}")
    return 0 if failures == 0 else 3


def _add_index_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k1", type=float, default=DEFAULT_K1, help="BM25 k1 (default %(default)s)")
    parser.add_argument("--b", type=float, default=DEFAULT_B, help="BM25 b (default %(default)s)")
    parser.add_argument("--no-lowercase", action="store_true", help="disable lowercasing")
    parser.add_argument("--min-token-len", type=int, default=1, help="drop shorter tokens")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lexsem", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="key=value file supplying flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.sub_commands = {}

    p = sub.add_parser("index", help="build and persist an inverted index")
    p.add_argument("--corpus", required=True, help="document file or directory")
    p.add_argument("--out", required=True, help="output index file")
    _add_index_flags(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("retrieve", help="run retrieval and write a run file")
    p.add_argument("--mode", required=True, choices=MODES)
    p.add_argument("--queries", required=True, help="question split file")
    p.add_argument("--out", required=True, help="output run file")
    p.add_argument("--k", type=int, default=10, help="results per query (default %(default)s)")
    p.add_argument("--index", help="persisted index (bm25/leser)")
    p.add_argument("--corpus", help="document path; index is built ad hoc if --index is absent")
    p.add_argument("--passage-emb", help="EMB1 corpus embeddings (dense/leser)")
    p.add_argument("--query-emb", help="EMB1 query embeddings (dense/leser)")
    p.add_argument("--alpha", type=float, default=0.3, help="dense weight in fusion (default %(default)s)")
    p.add_argument("--pool-size", type=int, default=20, help="dense candidate pool for leser (default %(default)s)")
    p.add_argument("--tag", default="lexsem", help="run tag written to the run file")
    _add_index_flags(p)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("evaluate", help="score a run file against gold labels")
    p.add_argument("--run", required=True, help="run file")
    p.add_argument("--queries", required=True, help="labeled question split file")
    p.add_argument("--k", type=int, default=10, help="metric cutoff (default %(default)s)")
    p.add_argument("--summary", action="store_true", help="omit per-query metrics from the report")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("tune", help="grid-search the fusion weight on a labeled split")
    p.add_argument("--queries", required=True, help="labeled dev split file")
    p.add_argument("--index", help="persisted index")
    p.add_argument("--corpus", help="document path; index is built ad hoc if --index is absent")
    p.add_argument("--passage-emb", required=True, help="EMB1 corpus embeddings")
    p.add_argument("--query-emb", required=True, help="EMB1 query embeddings")
    p.add_argument("--grid", default="0.0:1.0:0.1", help="comma list or start:stop:step (default %(default)s)")
    p.add_argument("--objective", default="recall@10", choices=OBJECTIVES)
    p.add_argument("--k", type=int, default=10, help="metric cutoff / output size (default %(default)s)")
    p.add_argument("--pool-size", type=int, default=20)
    _add_index_flags(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("generate", help="generate answers for a run via a chat endpoint")
    p.add_argument("--run", required=True, help="run file from retrieve")
    p.add_argument("--queries", required=True, help="question split file")
    p.add_argument("--corpus", required=True, help="document file or directory")
    p.add_argument("--out", required=True, help="output JSONL answer file")
    p.add_argument("--endpoint", required=True, help="chat-completions URL")
    p.add_argument("--model", required=True, help="model name sent in the request")
    p.add_argument("--api-key-env", default="LEXSEM_API_KEY", help="env var holding the bearer token")
    p.add_argument("--max-contexts", type=int, default=10)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--temperature", type=float, default=0.0)
    p.set_defaults(func=cmd_generate)

    for name, action in sub.choices.items():
        parser.sub_commands[name] = action
    return parser


def _coerce(value: str):
    for converter in (int, float):
        try:
            return converter(value)
        except ValueError:
            pass
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    return value


def _load_config_defaults(path: str) -> dict:
    """key=value per line; '#' comments; keys use flag spelling or dest spelling."""
    defaults = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            defaults[key.replace("-", "_")] = _coerce(value)
    return defaults


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        # A config file supplies defaults; explicit flags always win.
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv)
        if known.config:
            defaults = _load_config_defaults(known.config)
            for sub in parser.sub_commands.values():
                known_dests = {action.dest for action in sub._actions}
                sub.set_defaults(**{k: v for k, v in defaults.items() if k in known_dests})
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:  # one-line machine-parsable failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
