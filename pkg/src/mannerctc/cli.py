"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data or format error, 3 internal
error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import posterior
from .alphabet import format_config, load_alphabet, load_manner_map
from .decode import DEFAULT_BEAM_WIDTH, BeamParams, beam_search_decode, greedy_decode
from .exceptions import AlphabetError, MannerCTCError
from .experiment import ExperimentConfig, format_report, run_experiment
from .mask import mask_posteriors, plan_from_manner_posteriors
from .metrics import score_corpus
from .synth import SynthConfig, generate_corpus, read_text_lines, write_corpus
from .validation import check_frame_sync

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _fmt_score(score: float) -> str:
    return f"{score:.6f}" if math.isfinite(score) else "-inf"


def _beam_params(args) -> BeamParams | None:
    if getattr(args, "greedy", False):
        return None
    return BeamParams(args.beam, args.prune)


def _emit_decode(result, args, out, err):
    if args.json:
        out.write(_dump_json(result.to_dict()))
    else:
        out.write(result.transcript + "\n")
        err.write(f"score {_fmt_score(result.score)}\n")


def cmd_decode(args, out, err):
    alphabet = load_alphabet(args.alphabet, args.apostrophe)
    p = posterior.load(args.posteriors, args.format, alphabet)
    params = _beam_params(args)
    result = greedy_decode(p, alphabet) if params is None else beam_search_decode(p, alphabet, params)
    _emit_decode(result, args, out, err)
    return EXIT_OK


def cmd_mask_decode(args, out, err):
    manner_map = load_manner_map(args.manner_map, args.apostrophe)
    alphabet = load_alphabet(args.alphabet, args.apostrophe)
    if alphabet != manner_map.chars:
        raise AlphabetError("--alphabet and --manner-map describe different character alphabets")
    pc = posterior.load(args.char_posteriors, args.format, alphabet)
    pm = posterior.load(args.manner_posteriors, args.format, manner_map.manners)
    check_frame_sync(pc.frames, pm.frames)
    masked = mask_posteriors(pc, plan_from_manner_posteriors(pm, manner_map))
    if args.dump_masked:
        posterior.save(posterior.PosteriorMatrix(masked, alphabet.labels), args.dump_masked,
                       args.dump_format, alphabet)
    params = _beam_params(args)
    result = greedy_decode(masked, alphabet) if params is None else beam_search_decode(masked, alphabet, params)
    _emit_decode(result, args, out, err)
    return EXIT_OK


def _read_utterances(path):
    with open(path, encoding="utf-8") as fh:
        explicit = any("\t" in line for line in fh)
    return read_text_lines(path), explicit


def _pair_lines(ref_path, hyp_path):
    """Pair by id when either file carries ids, else by line position."""
    refs, ref_ids = _read_utterances(ref_path)
    hyps, hyp_ids = _read_utterances(hyp_path)
    if ref_ids or hyp_ids:
        hyp_map = dict(hyps)
        if len(hyp_map) != len(hyps):
            raise MannerCTCError("duplicate utterance ids in hypothesis file")
        missing = [u for u, _ in refs if u not in hyp_map]
        extra = sorted(set(hyp_map) - {u for u, _ in refs})
        if missing or extra:
            detail = f"missing from hypothesis: {', '.join(missing[:5])}" if missing \
                else f"not in reference: {', '.join(extra[:5])}"
            raise MannerCTCError(f"utterance ids do not match ({detail})")
        return [u for u, _ in refs], [(text, hyp_map[u]) for u, text in refs]
    if len(refs) != len(hyps):
        raise MannerCTCError(f"reference has {len(refs)} utterances, hypothesis has {len(hyps)}")
    return [u for u, _ in refs], [(r, h) for (_, r), (_, h) in zip(refs, hyps)]


_LEVELS = {"wer": "word", "cer": "char", "mer": "manner"}


def cmd_score(args, out, err):
    manner_map = load_manner_map(args.manner_map, args.apostrophe)
    ids, pairs = _pair_lines(args.ref, args.hyp)
    report = score_corpus(pairs, manner_map.chars, manner_map, ids)
    metrics = list(_LEVELS) if args.metric == "all" else [args.metric]
    if args.json:
        full = report.to_dict(per_utt=args.per_utt)
        data = {m: full[m] for m in metrics}
        data["totals"] = {m: full["totals"][m] for m in metrics}
        data["utterances"] = full["utterances"]
        if args.per_utt:
            data["per_utterance"] = full["per_utterance"]
        out.write(_dump_json(data))
        return EXIT_OK
    out.write(f"{'metric':<6} {'rate':>7} {'errors':>7} {'N':>7} {'S':>6} {'I':>6} {'D':>6}\n")
    for m in metrics:
        t = report.totals(_LEVELS[m])
        rate = getattr(report, m)
        out.write(f"{m.upper():<6} {_pct(rate):>7} {t['errors']:>7} {t['N']:>7} "
                  f"{t['S']:>6} {t['I']:>6} {t['D']:>6}\n")
    if args.per_utt:
        out.write("\n")
        out.write(f"{'id':<16} " + " ".join(f"{m.upper():>7}" for m in metrics) + "\n")
        for u in report.per_utterance:
            rates = " ".join(f"{_pct(getattr(u, _LEVELS[m]).rate):>7}" for m in metrics)
            out.write(f"{u.utt_id:<16} {rates}\n")
    return EXIT_OK


def _pct(x: float) -> str:
    return f"{100 * x:.1f}%" if math.isfinite(x) else "inf"


def cmd_synth(args, out, err):
    manner_map = load_manner_map(args.manner_map, args.apostrophe)
    cfg = SynthConfig(
        frames_per_symbol=args.frames_per_symbol,
        blank_fraction=args.blank_fraction,
        char_noise=args.char_noise,
        manner_error_rate=args.manner_error_rate,
        seed=args.seed,
        noise_concentration=args.noise_concentration,
    )
    lines = read_text_lines(args.refs)
    corpus = generate_corpus([t for _, t in lines], cfg, manner_map.chars, manner_map,
                             ids=[u for u, _ in lines])
    manifest = write_corpus(corpus, args.out_dir, args.format, manner_map.chars, manner_map.manners)
    if args.json:
        out.write(_dump_json({"manifest": str(manifest), "utterances": len(corpus),
                              "config": cfg.to_dict(), "format": args.format}))
    else:
        out.write(f"{manifest}\n")
    return EXIT_OK


_EXPERIMENT_FLAGS = {
    "manifest": "manifest", "refs": "refs", "utterances": "n_utterances",
    "char_noise": "char_noise", "manner_error_rate": "manner_error_rate", "seeds": "seeds",
    "frames_per_symbol": "frames_per_symbol", "blank_fraction": "blank_fraction",
    "noise_concentration": "noise_concentration", "beam": "beam_width", "prune": "prune_threshold",
    "manner_map": "manner_map", "jobs": "jobs", "out": "output",
}


def experiment_config(args) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            values.update(json.load(fh))
    for flag, key in _EXPERIMENT_FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            values[key] = v
    if args.apostrophe:
        values["apostrophe"] = True
    return ExperimentConfig.from_dict(values)


def cmd_experiment(args, out, err):
    cfg = experiment_config(args)
    report = run_experiment(cfg)
    text = _dump_json(report) if args.json else format_report(report)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    out.write(text)
    for e in report["errors"]:
        err.write(f"utterance {e['id']}: {e['error']}\n")
    return EXIT_DATA if report["errors"] else EXIT_OK


def cmd_config(args, out, err):
    text = format_config(load_manner_map(None, args.apostrophe))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if args.json:
        mm = load_manner_map(None, args.apostrophe)
        out.write(_dump_json({"labels": list(mm.chars.labels),
                              "manners": {m: list(cs) for m, cs in mm.classes().items()}}))
    elif not args.out:
        out.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mannerctc", description="Manner-constrained CTC decoding toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--apostrophe", action="store_true",
                       help="use the built-in inventories extended with an apostrophe label")

    def beam_opts(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--beam", type=int, default=DEFAULT_BEAM_WIDTH, metavar="N", help="beam width")
        g.add_argument("--greedy", action="store_true", help="best-path decoding")
        p.add_argument("--prune", type=float, default=0.0, metavar="P",
                       help="skip emitting labels below this posterior")

    fmt = dict(choices=posterior.FORMATS, default=None, help="posterior file format (default: sniff)")

    p = sub.add_parser("decode", help="decode a character posterior file")
    p.add_argument("--posteriors", required=True, metavar="FILE")
    p.add_argument("--alphabet", metavar="FILE")
    p.add_argument("--format", **fmt)
    beam_opts(p)
    common(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("mask-decode", help="mask character posteriors by manner, then decode")
    p.add_argument("--char-posteriors", required=True, metavar="FILE")
    p.add_argument("--manner-posteriors", required=True, metavar="FILE")
    p.add_argument("--alphabet", metavar="FILE")
    p.add_argument("--manner-map", metavar="FILE")
    p.add_argument("--format", **fmt)
    p.add_argument("--dump-masked", metavar="FILE")
    p.add_argument("--dump-format", choices=posterior.FORMATS, default="bin")
    beam_opts(p)
    common(p)
    p.set_defaults(func=cmd_mask_decode)

    p = sub.add_parser("score", help="WER/CER/MER of hypotheses against references")
    p.add_argument("--ref", required=True, metavar="FILE")
    p.add_argument("--hyp", required=True, metavar="FILE")
    p.add_argument("--metric", choices=("wer", "cer", "mer", "all"), default="all")
    p.add_argument("--per-utt", action="store_true")
    p.add_argument("--manner-map", metavar="FILE")
    common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("synth", help="generate synthetic posterior stream pairs")
    p.add_argument("--refs", required=True, metavar="FILE")
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.add_argument("--frames-per-symbol", type=int, default=4, metavar="N")
    p.add_argument("--blank-fraction", type=float, default=0.5, metavar="X")
    p.add_argument("--char-noise", type=float, default=0.0, metavar="X")
    p.add_argument("--manner-error-rate", type=float, default=0.0, metavar="Y")
    p.add_argument("--noise-concentration", type=float, default=0.1, metavar="C")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--format", choices=posterior.FORMATS, default="bin")
    p.add_argument("--manner-map", metavar="FILE")
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("experiment", help="baseline vs. manner-constrained comparison")
    p.add_argument("--config", metavar="FILE", help="JSON experiment config (flags override it)")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--manifest", metavar="FILE")
    src.add_argument("--refs", metavar="FILE")
    p.add_argument("--utterances", type=int, metavar="N")
    p.add_argument("--char-noise", type=float, nargs="+", metavar="X")
    p.add_argument("--manner-error-rate", type=float, nargs="+", metavar="Y")
    p.add_argument("--seeds", type=int, nargs="+", metavar="S")
    p.add_argument("--frames-per-symbol", type=int, metavar="N")
    p.add_argument("--blank-fraction", type=float, metavar="X")
    p.add_argument("--noise-concentration", type=float, metavar="C")
    p.add_argument("--beam", type=int, metavar="N")
    p.add_argument("--prune", type=float, metavar="P")
    p.add_argument("--manner-map", metavar="FILE")
    p.add_argument("--jobs", type=int, metavar="N")
    p.add_argument("--out", metavar="FILE", help="also write the report here")
    common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("config", help="print the built-in alphabet and manner map file")
    p.add_argument("--out", metavar="FILE")
    common(p)
    p.set_defaults(func=cmd_config)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out, err)
    except (MannerCTCError, ValueError, OSError, json.JSONDecodeError) as exc:
        err.write(f"mannerctc: error: {exc}\n")
        return EXIT_DATA
    except Exception as exc:  # invariant violations and bugs
        err.write(f"mannerctc: internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
