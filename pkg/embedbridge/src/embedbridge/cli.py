"""Command-line entry point: encode corpus/query splits, fine-tune, build tiny models."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import BridgeConfig
from .encode import encode_corpus, encode_queries
from .train import finetune_mnsr


def _config_from_args(args) -> BridgeConfig:
    return BridgeConfig(
        model=args.model,
        device=args.device,
        encode_batch_size=args.batch_size,
        epochs=getattr(args, "epochs", 10),
        train_batch_size=getattr(args, "train_batch_size", 64),
        learning_rate=getattr(args, "learning_rate", 2e-5),
        loss_scale=getattr(args, "scale", 20.0),
        seed=getattr(args, "seed", 42),
    )


def cmd_encode_corpus(args) -> int:
    count = encode_corpus(args.corpus, _config_from_args(args), args.out)
    print(f"encoded {count} passages -> {args.out}")
    return 0


def cmd_encode_queries(args) -> int:
    count = encode_queries(args.queries, _config_from_args(args), args.out)
    print(f"encoded {count} queries -> {args.out}")
    return 0


def cmd_finetune(args) -> int:
    out = finetune_mnsr(args.train, args.corpus, args.dev, _config_from_args(args), args.out, eval_k=args.eval_k)
    print(f"fine-tuned model -> {out}")
    return 0


def cmd_build_tiny(args) -> int:
    from .data import load_passages, load_questions
    from .tiny import build_tiny_model

    texts = [text for _, text in load_passages(args.corpus)]
    for path in args.questions or []:
        texts.extend(q["text"] for q in load_questions(path))
    model_dir = build_tiny_model(texts, args.out, hidden_size=args.hidden_size, seed=args.seed)
    print(f"tiny model -> {model_dir}")
    return 0


def _add_model_flags(parser) -> None:
    parser.add_argument("--model", required=True, help="model id or local directory")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--batch-size", type=int, default=32, help="encoding batch size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="embedbridge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode-corpus", help="embed all passages into an EMB1 file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    _add_model_flags(p)
    p.set_defaults(func=cmd_encode_corpus)

    p = sub.add_parser("encode-queries", help="embed a question split into an EMB1 file")
    p.add_argument("--queries", required=True)
    p.add_argument("--out", required=True)
    _add_model_flags(p)
    p.set_defaults(func=cmd_encode_queries)

    p = sub.add_parser("finetune", help="contrastive fine-tuning on gold pairs")
    p.add_argument("--train", required=True, help="labeled train split")
    p.add_argument("--dev", required=True, help="labeled dev split (checkpoint selection)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="output model directory")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--train-batch-size", type=int, default=64)
    p.add_argument("--learning-rate", type=float, default=2e-5)
    p.add_argument("--scale", type=float, default=20.0)
    p.add_argument("--eval-k", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    _add_model_flags(p)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("build-tiny-model", help="random-init word-level model for offline smoke runs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--questions", nargs="*", help="question splits whose words join the vocabulary")
    p.add_argument("--out", required=True)
    p.add_argument("--hidden-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_build_tiny)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
