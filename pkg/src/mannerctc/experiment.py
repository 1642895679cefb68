"""Baseline vs. manner-constrained decoding over a corpus of stream pairs.

A corpus is either a manifest of posterior files or a synthetic sweep over
``char_noise x manner_error_rate x seed``. Every utterance is decoded twice
(beam search on the raw character posteriors, and after manner masking),
the manner stream is greedy-decoded for MER, and the results are pooled per
condition.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from . import posterior
from .alphabet import Alphabet, MannerMap, chars_to_manner_transcript, load_manner_map
from .decode import BeamParams, beam_search_decode, greedy_decode
from .mask import manner_based_char_decode
from .metrics import manner_error_rate, normalize_text, score_corpus
from .synth import SynthConfig, generate, random_references, read_manifest, read_text_lines

_CHUNK = 25


@dataclass
class ExperimentConfig:
    """Effective experiment settings; echoed verbatim into every report."""

    manifest: str | None = None
    refs: str | None = None
    n_utterances: int = 200
    char_noise: Sequence[float] = (0.52,)
    manner_error_rate: Sequence[float] = (0.028,)
    seeds: Sequence[int] = (0,)
    frames_per_symbol: int = 2
    blank_fraction: float = 0.5
    noise_concentration: float = 0.1
    beam_width: int | None = 16
    prune_threshold: float = 1e-3
    manner_map: str | None = None
    apostrophe: bool = False
    jobs: int = 1
    output: str | None = None

    def __post_init__(self):
        self.char_noise = tuple(float(x) for x in self.char_noise)
        self.manner_error_rate = tuple(float(x) for x in self.manner_error_rate)
        self.seeds = tuple(int(x) for x in self.seeds)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown experiment config keys: {', '.join(unknown)}")
        return cls(**data)

    def validate(self) -> None:
        for name in ("manifest", "refs", "manner_map"):
            path = getattr(self, name)
            if path is not None and not os.path.isfile(path):
                raise FileNotFoundError(f"{name} file not found: {path}")
        if self.manifest is None:
            for name in ("char_noise", "manner_error_rate", "seeds"):
                if not getattr(self, name):
                    raise ValueError(f"sweep list {name} is empty")
            if self.refs is None and self.n_utterances < 1:
                raise ValueError("n_utterances must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        BeamParams(self.beam_width, self.prune_threshold)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("char_noise", "manner_error_rate", "seeds"):
            d[k] = list(d[k])
        return d


@dataclass(frozen=True)
class UtteranceOutcome:
    utt_id: str
    ref: str = ""
    baseline: str = ""
    proposed: str = ""
    manner_ref: str = ""
    manner_hyp: str = ""
    error: str | None = None


def evaluate_pair(char_posteriors, manner_posteriors, ref: str, manner_map: MannerMap,
                  params: BeamParams, utt_id: str = "") -> UtteranceOutcome:
    alphabet = manner_map.chars
    ref = normalize_text(ref)
    baseline = beam_search_decode(char_posteriors, alphabet, params)
    proposed = manner_based_char_decode(char_posteriors, manner_posteriors, alphabet, manner_map, params)
    manner = greedy_decode(manner_posteriors, manner_map.manners)
    return UtteranceOutcome(
        utt_id=utt_id,
        ref=ref,
        baseline=baseline.transcript,
        proposed=proposed.transcript,
        manner_ref=chars_to_manner_transcript(alphabet, manner_map, ref),
        manner_hyp=manner_map.manners.decode(manner.labels, spaces=False),
    )


# -- workers (module level so they pickle) ------------------------------------


def _run_synthetic_chunk(task):
    cfg, refs, ids, start, stop, manner_map, params = task
    children = np.random.SeedSequence(cfg.seed).spawn(len(refs))
    out = []
    for i in range(start, stop):
        try:
            utt = generate(refs[i], cfg, manner_map.chars, manner_map, np.random.default_rng(children[i]), ids[i])
            out.append(evaluate_pair(utt.char_posteriors.frames, utt.manner_posteriors.frames,
                                     utt.ref, manner_map, params, ids[i]))
        except Exception as exc:  # reported per utterance
            out.append(UtteranceOutcome(ids[i], ref=refs[i], error=f"{type(exc).__name__}: {exc}"))
    return out


def _run_manifest_chunk(task):
    entries, manner_map, params = task
    out = []
    for e in entries:
        if e.error:
            out.append(UtteranceOutcome(e.utt_id, ref=e.ref, error=e.error))
            continue
        try:
            pc = posterior.load(e.char_path, alphabet=manner_map.chars)
            pm = posterior.load(e.manner_path, alphabet=manner_map.manners)
            out.append(evaluate_pair(pc.frames, pm.frames, e.ref, manner_map, params, e.utt_id))
        except Exception as exc:  # reported per utterance
            out.append(UtteranceOutcome(e.utt_id, ref=e.ref, error=f"{type(exc).__name__}: {exc}"))
    return out


def _map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map() yields in submission order, so parallelism never reorders
        return list(pool.map(fn, tasks))


def _condition_summary(label: dict, outcomes: list[UtteranceOutcome], alphabet: Alphabet,
                       manner_map: MannerMap) -> dict:
    good = [o for o in outcomes if o.error is None]
    ids = [o.utt_id for o in good]
    base = score_corpus([(o.ref, o.baseline) for o in good], alphabet, manner_map, ids)
    prop = score_corpus([(o.ref, o.proposed) for o in good], alphabet, manner_map, ids)
    summary = dict(label)
    summary.update(
        utterances=len(good),
        failed=len(outcomes) - len(good),
        mer=manner_error_rate((o.manner_ref, o.manner_hyp) for o in good),
        baseline={"wer": base.wer, "cer": base.cer},
        proposed={"wer": prop.wer, "cer": prop.cer},
    )
    return summary


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Decode and score every condition; returns a JSON-ready report."""
    cfg.validate()
    manner_map = load_manner_map(cfg.manner_map, cfg.apostrophe)
    alphabet = manner_map.chars
    params = BeamParams(cfg.beam_width, cfg.prune_threshold)

    labels: list[dict] = []
    tasks: list = []
    owners: list[int] = []
    if cfg.manifest is not None:
        entries = read_manifest(cfg.manifest)
        labels.append({"source": cfg.manifest})
        for start in range(0, len(entries), _CHUNK):
            tasks.append((entries[start:start + _CHUNK], manner_map, params))
            owners.append(0)
        worker = _run_manifest_chunk
    else:
        fixed_refs = read_text_lines(cfg.refs) if cfg.refs is not None else None
        sweep = itertools.product(cfg.char_noise, cfg.manner_error_rate, cfg.seeds)
        for k, (noise, rate, seed) in enumerate(sweep):
            scfg = SynthConfig(cfg.frames_per_symbol, cfg.blank_fraction, noise, rate, seed,
                               cfg.noise_concentration)
            if fixed_refs is not None:
                ids = [uid for uid, _ in fixed_refs]
                refs = [text for _, text in fixed_refs]
            else:
                refs = random_references(cfg.n_utterances, seed)
                ids = [f"utt{i:05d}" for i in range(len(refs))]
            labels.append({"char_noise": noise, "manner_error_rate": rate, "seed": seed})
            for start in range(0, len(refs), _CHUNK):
                stop = min(start + _CHUNK, len(refs))
                tasks.append((scfg, refs, ids, start, stop, manner_map, params))
                owners.append(k)
        worker = _run_synthetic_chunk

    results = _map(worker, tasks, cfg.jobs)
    per_condition: list[list[UtteranceOutcome]] = [[] for _ in labels]
    for k, chunk in zip(owners, results):
        per_condition[k].extend(chunk)

    conditions = []
    errors = []
    for label, outcomes in zip(labels, per_condition):
        conditions.append(_condition_summary(label, outcomes, alphabet, manner_map))
        errors.extend({"condition": label, "id": o.utt_id, "error": o.error}
                      for o in outcomes if o.error is not None)

    return {
        "config": cfg.to_dict(),
        "conditions": conditions,
        "summary": summarize(conditions),
        "errors": errors,
    }


def summarize(conditions: list[dict]) -> dict:
    scored = [c for c in conditions if c["utterances"]]
    if not scored:
        return {"conditions": 0}
    n = len(scored)
    reductions = [c["baseline"]["cer"] - c["proposed"]["cer"] for c in scored]
    return {
        "conditions": n,
        "mean_mer": sum(c["mer"] for c in scored) / n,
        "mean_baseline_cer": sum(c["baseline"]["cer"] for c in scored) / n,
        "mean_proposed_cer": sum(c["proposed"]["cer"] for c in scored) / n,
        "mean_baseline_wer": sum(c["baseline"]["wer"] for c in scored) / n,
        "mean_proposed_wer": sum(c["proposed"]["wer"] for c in scored) / n,
        "mean_cer_reduction": sum(reductions) / n,
        "proposed_better_fraction": sum(r > 0 for r in reductions) / n,
    }


def _pct(x: float) -> str:
    return f"{100 * x:.1f}" if math.isfinite(x) else "inf"


def format_report(report: dict) -> str:
    """Plain-text tables in the layout of a baseline/proposed comparison."""
    lines = ["# config " + json.dumps(report["config"], sort_keys=True)]
    header = f"{'condition':<34} {'utts':>5} {'%MER':>6} {'method':<9} {'%WER':>6} {'%CER':>6}"
    lines += [header, "-" * len(header)]
    for c in report["conditions"]:
        if "source" in c:
            name = os.path.basename(str(c["source"]))
        else:
            name = f"noise={c['char_noise']:g} mer={c['manner_error_rate']:g} seed={c['seed']}"
        for i, method in enumerate(("baseline", "proposed")):
            lead = f"{name:<34} {c['utterances']:>5} {_pct(c['mer']):>6}" if i == 0 else " " * 47
            lines.append(f"{lead} {method:<9} {_pct(c[method]['wer']):>6} {_pct(c[method]['cer']):>6}")
    s = report["summary"]
    if s.get("conditions"):
        lines.append("")
        lines.append(
            f"mean over {s['conditions']} condition(s): MER {_pct(s['mean_mer'])}%  "
            f"CER {_pct(s['mean_baseline_cer'])}% -> {_pct(s['mean_proposed_cer'])}%  "
            f"WER {_pct(s['mean_baseline_wer'])}% -> {_pct(s['mean_proposed_wer'])}%  "
            f"proposed better in {100 * s['proposed_better_fraction']:.0f}% of conditions"
        )
    for e in report["errors"]:
        lines.append(f"error {e['id']}: {e['error']}")
    return "\n".join(lines) + "\n"
