"""Command line entry point: one-shot jobs, files in, files out."""

import argparse
import sys

from .encode import export_embeddings
from .finetune import finetune_and_score
from .jobs import MODE_EMBED, MODE_FINETUNE, SidecarError, SidecarJob


def read_id_file(path) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            ids = [line.strip() for line in fh]
    except OSError as exc:
        raise SidecarError(f"cannot read id file {path}: {exc}") from exc
    ids = [i for i in ids if i]
    if not ids:
        raise SidecarError(f"id file {path} is empty")
    return ids


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--checkpoint", required=True,
                        help="checkpoint alias (DBUFS2E, BBU, MBBU, DRB) or explicit identifier/path")
    parser.add_argument("--input", required=True, help="cleaned-corpus JSONL")
    parser.add_argument("--output", required=True, help="destination JSONL")
    parser.add_argument("--max-tokens", type=int, default=None,
                        help="context limit override (default: the tokenizer's own limit)")
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sidecar",
        description="Produce embedding or score files for the textscreen evaluator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    embed = sub.add_parser("embed", help="export pooled document embeddings")
    _add_common(embed)

    finetune = sub.add_parser(
        "finetune-score", help="fine-tune a classifier on train ids, score eval ids"
    )
    _add_common(finetune)
    finetune.add_argument("--epochs", type=int, default=5)
    finetune.add_argument("--train-ids", required=True,
                          help="file with one training user_id per line")
    finetune.add_argument("--eval-ids", required=True,
                          help="file with one evaluation user_id per line")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "embed":
            job = SidecarJob(
                checkpoint=args.checkpoint,
                mode=MODE_EMBED,
                input=args.input,
                output=args.output,
                max_tokens=args.max_tokens,
                seed=args.seed,
            )
            export_embeddings(job)
        else:
            job = SidecarJob(
                checkpoint=args.checkpoint,
                mode=MODE_FINETUNE,
                input=args.input,
                output=args.output,
                max_tokens=args.max_tokens,
                epochs=args.epochs,
                seed=args.seed,
            )
            train_ids = read_id_file(args.train_ids)
            eval_ids = read_id_file(args.eval_ids)
            finetune_and_score(job, train_ids, eval_ids)
    except (SidecarError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
