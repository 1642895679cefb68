import json

import pytest

from mannerctc.experiment import ExperimentConfig, format_report, run_experiment, summarize


def small(**kw):
    base = dict(n_utterances=30, seeds=(0,), beam_width=8)
    base.update(kw)
    return ExperimentConfig(**base)


def test_noiseless_is_perfect():
    report = run_experiment(small(char_noise=(0.0,), manner_error_rate=(0.0,)))
    (c,) = report["conditions"]
    assert c["utterances"] == 30 and c["failed"] == 0
    assert c["mer"] == 0.0
    assert c["baseline"] == {"wer": 0.0, "cer": 0.0}
    assert c["proposed"] == {"wer": 0.0, "cer": 0.0}


def test_oracle_manner_never_hurts():
    report = run_experiment(ExperimentConfig(n_utterances=200, char_noise=(0.52,),
                                             manner_error_rate=(0.0,), seeds=(4,)))
    (c,) = report["conditions"]
    assert c["baseline"]["cer"] > 0
    assert c["proposed"]["cer"] <= c["baseline"]["cer"]


def test_sweep_layout_and_determinism():
    cfg = small(char_noise=(0.3, 0.5), manner_error_rate=(0.0, 0.05), seeds=(1, 2))
    a = run_experiment(cfg)
    assert len(a["conditions"]) == 8
    assert [(c["char_noise"], c["manner_error_rate"], c["seed"]) for c in a["conditions"]][:3] == \
        [(0.3, 0.0, 1), (0.3, 0.0, 2), (0.3, 0.05, 1)]
    b = run_experiment(small(char_noise=(0.3, 0.5), manner_error_rate=(0.0, 0.05), seeds=(1, 2), jobs=2))
    a["config"].pop("jobs"), b["config"].pop("jobs")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_report_echoes_config_and_formats():
    report = run_experiment(small())
    assert report["config"]["beam_width"] == 8
    text = format_report(report)
    assert text.startswith("# config ")
    assert "baseline" in text and "proposed" in text


def test_bad_manifest_rows_do_not_abort(tmp_path):
    m = tmp_path / "manifest.tsv"
    m.write_text("a\tmissing.bin\tmissing2.bin\tHELLO\nbad line\n")
    report = run_experiment(ExperimentConfig(manifest=str(m)))
    assert report["conditions"][0]["failed"] == 2
    assert {e["id"] for e in report["errors"]} == {"a", "bad line"}


@pytest.mark.parametrize("kw", [dict(seeds=()), dict(jobs=0), dict(beam_width=0),
                                dict(manifest="/nonexistent/manifest.tsv")])
def test_validate(kw):
    with pytest.raises((ValueError, FileNotFoundError)):
        ExperimentConfig(**kw).validate()


def test_from_dict_rejects_unknown():
    with pytest.raises(ValueError, match="bogus"):
        ExperimentConfig.from_dict({"bogus": 1})


def test_summarize_empty():
    assert summarize([]) == {"conditions": 0}
