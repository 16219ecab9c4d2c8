"""Command-line entry point.

Subcommands: train, arc, generate, predict, serve. Every randomized run
carries an explicit or generated seed, and the seed is always printed, so
any run can be reproduced. Outputs are UTF-8; errors go to stderr with a
stable ``narrative-arc: error:`` prefix and a nonzero exit code.
"""

from __future__ import annotations

import argparse
import json
import logging
import secrets
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from .arc import ShapingConfig, compute_arc
from .corpus import (
    load_label_map,
    load_labeled_corpus,
    load_script,
    load_utterance_pool,
    build_tfidf,
    tokenize,
)
from .conversation import (
    RandomProvider,
    RetrievalProvider,
    build_index,
    load_external_scores,
)
from .harness import (
    SyntheticCorpusConfig,
    alpha_sweep,
    build_episodes,
    evaluate,
    external_scorer,
    format_report_table,
    load_episodes,
    random_scorer,
    report,
    save_episodes,
    select_alpha,
    synthetic_corpus,
    unigram_scorer,
)
from .shaping import generate_dialogue, transcript_dict
from .universe import load_model, save_model, train

log = logging.getLogger("narrative_arc")


def _wjson(path, payload) -> None:
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )


def _resolve_seed(args) -> int:
    seed = args.seed if args.seed is not None else secrets.randbits(32)
    print(f"seed: {seed}")
    return seed


def cmd_train(args) -> int:
    docs = load_labeled_corpus(args.corpus)
    label_map = load_label_map(args.label_map) if args.label_map else None
    if label_map is not None and args.drop_unmapped:
        before = len(docs)
        docs = [d for d in docs if d.label in label_map]
        if before != len(docs):
            print(f"dropped {before - len(docs)} documents with unmapped labels")
    model = train(docs, label_map=label_map, smoothing=args.smoothing)
    counts = Counter(
        label_map[d.label] if label_map else d.label for d in docs
    )
    for label in model.labels:
        print(f"{label}: {counts[label]} documents")
    save_model(model, args.out)
    print(f"model written to {args.out}")
    return 0


def cmd_arc(args) -> int:
    dialogue = load_script(args.script)
    model = load_model(args.model)
    arc = compute_arc(dialogue, model)
    if args.format == "json":
        _wjson(args.out, arc.to_dict())
    else:
        Path(args.out).write_text(arc.to_csv(), encoding="utf-8")
    print(f"{len(arc)} arc points over {len(dialogue)} lines -> {args.out}")
    return 0


def _load_seed_lines(args) -> list[str]:
    if args.seed_line:
        return list(args.seed_line)
    if args.seed_lines_file:
        lines = [
            ln.strip()
            for ln in Path(args.seed_lines_file).read_text(encoding="utf-8").splitlines()
            if ln.strip()
        ]
        if not lines:
            raise ValueError(f"{args.seed_lines_file}: no seed lines")
        return lines
    raise ValueError("provide --seed-line or --seed-lines-file")


def _make_provider(kind, pool, remove_stopwords=False):
    if kind == "random":
        return RandomProvider(pool)
    tfidf = build_tfidf([tokenize(u.text) for u in pool])
    return RetrievalProvider(build_index(pool, tfidf, remove_stopwords=remove_stopwords))


def cmd_generate(args) -> int:
    seed = _resolve_seed(args)
    pool = load_utterance_pool(args.pool, min_chars=args.min_chars)
    if not pool:
        raise ValueError(f"{args.pool}: pool is empty after filtering")
    model = load_model(args.model)
    provider = _make_provider(args.provider, pool)
    seed_lines = _load_seed_lines(args)
    config = ShapingConfig.default_for(
        args.alpha, len(model.universe_set), max_samples=args.max_samples
    )

    runs = []
    for i in range(args.repeat):
        rng = np.random.default_rng([seed, i])
        dialogue, arc = generate_dialogue(
            seed_lines, args.n, model, provider, config, rng,
            method=args.method, k=args.k,
        )
        runs.append((dialogue, arc))

    dialogue, arc = runs[0]
    for utt, point in zip(dialogue.utterances, arc.points[1:]):
        print(f"[H={point.entropy:.3f} d={point.delta:+.3f}] {utt.text}")

    if args.repeat == 1:
        payload = transcript_dict(dialogue, arc, config, args.method, seed, len(seed_lines))
    else:
        finals = [a.final_entropy for _, a in runs]
        payload = {
            "config": {
                "alpha": config.alpha,
                "M": config.max_score,
                "S": config.max_samples,
                "method": args.method,
                "seed": seed,
                "repeat": args.repeat,
            },
            "runs": [
                {"run": i, "final_entropy": a.final_entropy,
                 "lines": [u.text for u in d.utterances]}
                for i, (d, a) in enumerate(runs)
            ],
            "mean_final_entropy": float(np.mean(finals)),
        }
        print(f"mean final entropy over {args.repeat} runs: {payload['mean_final_entropy']:.4f}")
    if args.out:
        _wjson(args.out, payload)
        print(f"transcript written to {args.out}")
    return 0


def _predict_episode_sets(args, seed):
    if args.val_episodes and args.test_episodes:
        return load_episodes(args.val_episodes), load_episodes(args.test_episodes), None
    if args.corpus:
        paths = sorted(Path(args.corpus).glob("*.txt"))
        if not paths:
            raise ValueError(f"{args.corpus}: no .txt scripts found")
        dialogues = [load_script(p) for p in paths]
        rng = np.random.default_rng([seed, 0xC0])
        order = rng.permutation(len(dialogues))
        n_val = max(1, int(len(dialogues) * args.val_frac))
        val_d = [dialogues[i] for i in order[:n_val]]
        test_d = [dialogues[i] for i in order[n_val:]]
        if not test_d:
            raise ValueError("corpus split left no test dialogues; lower --val-frac")
        val = build_episodes(val_d, np.random.default_rng([seed, 1]), split="validation")
        test = build_episodes(test_d, np.random.default_rng([seed, 2]), split="test")
        return val, test, None
    if args.synthetic:
        cfg = SyntheticCorpusConfig()
        train_docs, val = synthetic_corpus(cfg, args.synthetic, seed, split="validation")
        _, test = synthetic_corpus(cfg, args.synthetic, seed + 1, split="test")
        return val, test, (train_docs, cfg)
    raise ValueError("provide --val-episodes/--test-episodes, --corpus, or --synthetic N")


def cmd_predict(args) -> int:
    seed = _resolve_seed(args)
    val, test, synth_train = _predict_episode_sets(args, seed)
    print(f"{len(val)} validation episodes, {len(test)} test episodes")

    if args.model:
        model = load_model(args.model)
    elif synth_train is not None:
        docs, cfg = synth_train
        model = train(docs, smoothing=cfg.smoothing)
    else:
        raise ValueError("--model is required unless --synthetic builds one")

    if args.scorer == "unigram":
        scorer = unigram_scorer()
    elif args.scorer == "random":
        scorer = random_scorer(seed)
    else:
        if not args.external_scores:
            raise ValueError("--external-scores is required with --scorer external")
        table = load_external_scores(args.external_scores)
        table.validate_complete([e.id for e in val] + [e.id for e in test])
        scorer = external_scorer(table)

    sweep = alpha_sweep(val, scorer, model, args.alpha_lo, args.alpha_hi, args.steps)
    best_alpha = select_alpha(sweep)
    test_best = evaluate(test, scorer, model, best_alpha)
    test_neutral = evaluate(test, scorer, model, 0.0)
    result = report(test_best, test_neutral)
    result["sweep"] = [
        {"alpha": r.alpha, "top3_accuracy": r.top3_accuracy, "mrr": r.mrr} for r in sweep
    ]
    result["seed"] = seed

    print(format_report_table([
        (args.scorer, f"alpha={best_alpha:.3f}", test_best.top3_accuracy, test_best.mrr),
        (args.scorer, "neutral", test_neutral.top3_accuracy, test_neutral.mrr),
    ]))
    print(f"MRR gain {result['mrr_gain']:+.4f}, paired t-test p={result['p_value']:.4g}")
    if args.out:
        _wjson(args.out, result)
        print(f"report written to {args.out}")
    if args.save_episodes:
        save_episodes(val + test, args.save_episodes)
        print(f"episodes written to {args.save_episodes}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    seed = _resolve_seed(args)
    model = load_model(args.model)
    pool = load_utterance_pool(args.pool, min_chars=args.min_chars)
    if not pool:
        raise ValueError(f"{args.pool}: pool is empty after filtering")
    provider = _make_provider(args.provider, pool)
    app = create_app(
        model,
        provider,
        default_k=args.k,
        default_turn_limit=args.turn_limit,
        base_seed=seed,
        persist_path=args.persist,
    )
    print(f"serving on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="narrative-arc",
        description="Track universe beliefs over dialogue and shape generation with them.",
    )
    parser.add_argument("--seed", type=int, default=None, help="seed for all randomized steps")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a universe classifier on a labeled corpus")
    p.add_argument("--corpus", required=True, help="directory of <label>/<doc>.txt or a label<TAB>text TSV")
    p.add_argument("--label-map", default=None, help="raw_label<TAB>universe_label TSV")
    p.add_argument("--drop-unmapped", action="store_true",
                   help="drop documents whose label is absent from the map")
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("arc", help="compute the narrative arc of a script")
    p.add_argument("--script", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_arc)

    p = sub.add_parser("generate", help="generate a shaped dialogue from a pool")
    p.add_argument("--pool", required=True, help="utterance pool, one line each")
    p.add_argument("--model", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--method", choices=["greedy", "rejection"], default="greedy")
    p.add_argument("--provider", choices=["retrieval", "random"], default="retrieval")
    p.add_argument("--seed-line", action="append", default=None)
    p.add_argument("--seed-lines-file", default=None)
    p.add_argument("-n", type=int, default=10, help="total lines including seeds")
    p.add_argument("-k", type=int, default=32, help="candidates per turn")
    p.add_argument("--max-samples", type=int, default=64)
    p.add_argument("--min-chars", type=int, default=10)
    p.add_argument("--repeat", type=int, default=1, help="seeded repetitions; reports mean final entropy")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("predict", help="run the next-line prediction benchmark")
    p.add_argument("--val-episodes", default=None)
    p.add_argument("--test-episodes", default=None)
    p.add_argument("--corpus", default=None, help="directory of .txt scripts to build episodes from")
    p.add_argument("--synthetic", type=int, default=None,
                   help="generate N synthetic files per split instead of reading a corpus")
    p.add_argument("--val-frac", type=float, default=0.5)
    p.add_argument("--model", default=None)
    p.add_argument("--scorer", choices=["unigram", "external", "random"], default="unigram")
    p.add_argument("--external-scores", default=None)
    p.add_argument("--alpha-lo", type=float, default=-2.0)
    p.add_argument("--alpha-hi", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--save-episodes", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="host interactive dialogue sessions over HTTP")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8722)
    p.add_argument("--model", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--provider", choices=["retrieval", "random"], default="retrieval")
    p.add_argument("-k", type=int, default=16)
    p.add_argument("--turn-limit", type=int, default=5)
    p.add_argument("--min-chars", type=int, default=10)
    p.add_argument("--persist", default=None, help="write session transcripts here on shutdown")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level))
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, RuntimeError) as exc:
        print(f"narrative-arc: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
