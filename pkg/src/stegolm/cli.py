"""Command-line toolchain: prep, train, keygen, encode, decode, eval, roundtrip.

Every subcommand is a pure function of its flags and input files; all
randomness comes from explicit ``--seed`` flags. Payload bytes travel on
stdin/stdout (or ``--in``/``--out`` paths) so commands pipe cleanly;
diagnostics go to stderr as a single machine-parsable line
``error: <ClassName>: <message>`` and the process exits nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import codec, corpus, keying, metrics
from .codec import Framing, GenPolicy, Mode, Payload, RenderOptions
from .corpus import CorpusConfig, Vocabulary
from .errors import StegolmError
from .lm import (
    LstmHyperparams,
    NgramConfig,
    PRESETS,
    load_model,
    save_model,
    train_lstm,
    train_ngram,
)


def _corpus_config(args) -> CorpusConfig:
    return CorpusConfig(
        lowercase=args.lowercase,
        replace_users_urls=args.replace_users_urls,
        drop_retweets=args.drop_retweets,
        max_vocab=args.max_vocab,
        min_count=args.min_count,
    )


def _read_bytes(path: str | None) -> bytes:
    if path is None or path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _write_bytes(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(path).write_bytes(data)


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_prep(args) -> int:
    config = _corpus_config(args)
    raw = Path(args.infile).read_text(encoding="utf-8")
    tokens = corpus.tokenize(raw, config)
    vocab = corpus.build_vocab(tokens, config)
    if args.out_tokens:
        corpus.write_token_file(args.out_tokens, tokens)
    vocab.save(args.out_vocab)
    print(f"tokens: {len(tokens)}", file=sys.stderr)
    print(f"vocab_size: {len(vocab)}", file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    vocab = Vocabulary.load(args.vocab)
    tokens = corpus.read_token_file(args.tokens)
    if args.backend == "ngram":
        model = train_ngram(tokens, vocab, NgramConfig(order=args.order, add_k=args.add_k))
    else:
        hp = PRESETS[args.preset]
        overrides = {
            "layers": args.layers, "units": args.units, "embed_dim": args.embed_dim,
            "unroll_steps": args.unroll, "batch_size": args.batch_size,
            "lr_init": args.lr, "lr_decay": args.lr_decay, "dropout": args.dropout,
        }
        overrides = {k: v for k, v in overrides.items() if v is not None}
        if args.clip_norm is not None:
            overrides["clip_norm"] = None if args.clip_norm <= 0 else args.clip_norm
        hp = LstmHyperparams(**{**{f: getattr(hp, f) for f in hp.__dataclass_fields__},
                                **overrides})
        model = train_lstm(tokens, vocab, hp, epochs=args.epochs, seed=args.seed)
        for st in model.history:
            print(
                f"epoch {st.epoch}: train_nll {st.train_nll:.4f} "
                f"val_nll {st.val_nll:.4f} lr_after {st.lr_after:g}"
                + (" (decayed)" if st.decayed else ""),
                file=sys.stderr,
            )
    save_model(model, args.out)
    return 0


def cmd_keygen(args) -> int:
    vocab = Vocabulary.load(args.vocab)
    key = keying.generate_key(
        vocab, args.block_bits, args.common, args.seed,
        include_eos_common=args.common_eos,
    )
    keying.save_key(key, args.out)
    print(
        f"bins: {key.num_bins} carriers: {key.carrier_count()} "
        f"common: {len(key.common)}",
        file=sys.stderr,
    )
    return 0


def cmd_encode(args) -> int:
    vocab = Vocabulary.load(args.vocab)
    key = keying.load_key(args.key, vocab)
    model = load_model(args.model, vocab)
    payload = Payload(_read_bytes(args.infile), Framing(args.framing))
    policy = GenPolicy(
        mode=Mode(args.mode), temperature=args.temp, seed=args.seed,
        max_common_run=args.max_common_run,
    )
    options = RenderOptions(capitalize=args.capitalize)
    stegotext = codec.encode(payload, key, model, policy, options)
    if args.emit_tokens:
        corpus.write_token_file(args.emit_tokens, stegotext.tokens)
    _write_text(args.out, stegotext.rendered + "\n")
    print(
        f"tokens: {len(stegotext.tokens)} carriers: {stegotext.carrier_count}",
        file=sys.stderr,
    )
    return 0


def cmd_decode(args) -> int:
    vocab = Vocabulary.load(args.vocab)
    key = keying.load_key(args.key, vocab)
    if args.tokens:
        tokens = corpus.read_token_file(args.tokens)
    else:
        # Best-effort path: re-tokenize rendered text. Reliable only for
        # punctuation-safe output; the token sidecar is the canonical input.
        # Line boundaries re-tokenize to <eos>, which carries no payload.
        raw = Path(args.text).read_text(encoding="utf-8")
        tokens = [
            t for t in corpus.tokenize(raw, CorpusConfig(lowercase=args.lowercase_text))
            if t != corpus.EOS_TOKEN
        ]
    framing = Framing(args.framing)
    if framing is Framing.LENGTH_PREFIXED:
        _write_bytes(args.out, codec.decode_payload(tokens, key))
    else:
        bits = codec.decode(tokens, key, framing)
        _write_text(args.out, bits + "\n")
    return 0


def cmd_eval(args) -> int:
    loaded: dict[str, Vocabulary] = {}

    def vocab() -> Vocabulary:
        if "v" not in loaded:
            if not args.vocab:
                raise StegolmError("this evaluation needs --vocab")
            loaded["v"] = Vocabulary.load(args.vocab)
        return loaded["v"]

    sections: dict[str, dict] = {}
    out_lines: list[str] = []
    if args.ppl or args.stego_ppl:
        if not args.model or not args.tokens:
            raise StegolmError("--ppl/--stego-ppl require --model and --tokens")
        model = load_model(args.model, vocab())
        tokens = corpus.read_token_file(args.tokens)
    if args.ppl:
        report = metrics.perplexity(model, tokens)
        out_lines += ["[perplexity]", report.to_text()]
        sections["perplexity"] = json.loads(report.to_json())
    if args.stego_ppl:
        if not args.key:
            raise StegolmError("--stego-ppl requires --key")
        key = keying.load_key(args.key, vocab())
        report = metrics.stego_perplexity(model, key, tokens)
        out_lines += ["[stego_perplexity]", report.to_text()]
        sections["stego_perplexity"] = json.loads(report.to_json())
    if args.capacity:
        if args.block_bits is None:
            raise StegolmError("--capacity requires --block-bits")
        report = metrics.capacity(args.block_bits, args.common_fraction,
                                  args.mean_length)
        out_lines += ["[capacity]", report.to_text()]
        sections["capacity"] = json.loads(report.to_json())
    if args.capacity_empirical:
        if not args.key or not args.tokens:
            raise StegolmError("--capacity-empirical requires --key and --tokens")
        key = keying.load_key(args.key, vocab())
        tokens = corpus.read_token_file(args.tokens)
        report = metrics.capacity_empirical(tokens, key, args.mean_length)
        out_lines += ["[capacity_empirical]", report.to_text()]
        sections["capacity_empirical"] = json.loads(report.to_json())
    if not sections:
        raise StegolmError(
            "nothing to evaluate: pass --ppl, --stego-ppl, --capacity "
            "or --capacity-empirical"
        )
    print("\n".join(out_lines))
    if args.json:
        Path(args.json).write_text(json.dumps(sections, sort_keys=True, indent=2),
                                   encoding="utf-8")
    return 0


def cmd_roundtrip(args) -> int:
    """Self-test: random payloads through encode/decode on a synthetic corpus."""
    rng = np.random.default_rng(args.seed)
    base = corpus.tokenize(_roundtrip_corpus(args.seed), CorpusConfig())
    vocab = corpus.build_vocab(base, CorpusConfig())
    models = {"ngram": train_ngram(base, vocab, NgramConfig(order=2, add_k=0.1))}
    if args.backend in ("lstm", "both"):
        hp = LstmHyperparams(units=32, embed_dim=16, unroll_steps=8, batch_size=8)
        models["lstm"] = train_lstm(base, vocab, hp, epochs=1, seed=args.seed)
    backends = list(models) if args.backend == "both" else [
        args.backend if args.backend in models else "ngram"
    ]
    successes = 0
    for trial in range(args.trials):
        block_bits = int(rng.integers(1, 4))
        common = int(rng.choice([0, 10]))
        key = keying.generate_key(vocab, block_bits, common, seed=int(rng.integers(1 << 30)))
        payload = Payload(rng.bytes(int(rng.integers(1, args.max_bytes + 1))),
                          Framing.LENGTH_PREFIXED)
        policy = GenPolicy(
            mode=Mode.SAMPLE if trial % 2 else Mode.GREEDY,
            seed=int(rng.integers(1 << 30)),
        )
        model = models[backends[trial % len(backends)]]
        stegotext = codec.encode(payload, key, model, policy)
        if codec.decode_payload(stegotext.tokens, key) == payload.data:
            successes += 1
        elif args.verbose:
            print(f"trial {trial}: MISMATCH", file=sys.stderr)
    print(f"{successes}/{args.trials} successes")
    return 0 if successes == args.trials else 1


def _roundtrip_corpus(seed: int) -> str:
    rng = np.random.default_rng([seed, 0xC0])
    words = [f"w{i}" for i in range(40)]
    lines = []
    for _ in range(400):
        n = int(rng.integers(3, 9))
        lines.append(" ".join(rng.choice(words, size=n)) + " .")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stegolm",
        description="Hide byte payloads inside generated text via keyed vocabulary bins.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="tokenize a corpus and build its vocabulary")
    p.add_argument("--in", dest="infile", required=True, help="UTF-8 text, one message per line")
    p.add_argument("--out-tokens", help="write the token stream, one token per line")
    p.add_argument("--out-vocab", required=True, help="write the STEGOVOCAB file")
    p.add_argument("--lowercase", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--replace-users-urls", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--drop-retweets", action=argparse.BooleanOptionalAction, default=False)
    p.add_argument("--max-vocab", type=int, default=None)
    p.add_argument("--min-count", type=int, default=0)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("train", help="train a language model on a token stream")
    p.add_argument("--backend", choices=["ngram", "lstm"], required=True)
    p.add_argument("--tokens", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int, default=3, help="ngram order")
    p.add_argument("--add-k", type=float, default=0.05, help="ngram smoothing constant")
    p.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    p.add_argument("--layers", type=int)
    p.add_argument("--units", type=int)
    p.add_argument("--embed-dim", type=int)
    p.add_argument("--unroll", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--lr-decay", type=float)
    p.add_argument("--clip-norm", type=float, help="0 disables clipping")
    p.add_argument("--dropout", type=float)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("keygen", help="generate the shared bin-partition key")
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--block-bits", type=int, required=True,
                   help="bits per block; the key has 2**block_bits bins")
    p.add_argument("--common", type=int, default=0,
                   help="number of most-frequent tokens shared across all bins")
    p.add_argument("--common-eos", action="store_true",
                   help="also add <eos> to the common set")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encode", help="embed payload bytes into generated text")
    p.add_argument("--vocab", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", help="payload bytes (default: stdin)")
    p.add_argument("--out", help="rendered stegotext (default: stdout)")
    p.add_argument("--emit-tokens", help="sidecar token file, one token per line")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="sample")
    p.add_argument("--temp", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--framing", choices=[f.value for f in Framing], default="length")
    p.add_argument("--max-common-run", type=int, default=5)
    p.add_argument("--capitalize", action="store_true")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="recover payload bits from stegotext (no model)")
    p.add_argument("--vocab", required=True)
    p.add_argument("--key", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--tokens", help="token sidecar file (canonical input)")
    src.add_argument("--text", help="rendered text file (best-effort re-tokenization)")
    p.add_argument("--lowercase-text", action=argparse.BooleanOptionalAction, default=True,
                   help="lowercase when re-tokenizing --text input")
    p.add_argument("--framing", choices=[f.value for f in Framing], default="length")
    p.add_argument("--out", help="payload bytes (length framing) or bit string (raw)")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="perplexity, stego perplexity and capacity reports")
    p.add_argument("--vocab", help="needed for --ppl/--stego-ppl/--capacity-empirical")
    p.add_argument("--model")
    p.add_argument("--key")
    p.add_argument("--tokens", help="validation token stream / stegotext tokens")
    p.add_argument("--ppl", action="store_true")
    p.add_argument("--stego-ppl", action="store_true")
    p.add_argument("--capacity", action="store_true")
    p.add_argument("--capacity-empirical", action="store_true")
    p.add_argument("--block-bits", type=int)
    p.add_argument("--common-fraction", type=float, default=0.0)
    p.add_argument("--mean-length", type=float)
    p.add_argument("--json", help="also write a machine-readable JSON report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("roundtrip", help="encode/decode self-test on random payloads")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-bytes", type=int, default=32)
    p.add_argument("--backend", choices=["ngram", "lstm", "both"], default="ngram")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_roundtrip)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StegolmError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
