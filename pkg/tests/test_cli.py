import io
import json
import subprocess
import sys

import numpy as np
import pytest

from mannerctc import posterior
from mannerctc.cli import main
from mannerctc.posterior import PosteriorMatrix


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def corpus(tmp_path):
    refs = tmp_path / "refs.txt"
    refs.write_text("a1\tELEVEN TWENTY SEVEN\na2\tFIFTY SEVEN\na3\tOH NINE\n")
    out = tmp_path / "corpus"
    code, stdout, _ = run("synth", "--refs", str(refs), "--out-dir", str(out), "--frames-per-symbol", "2",
                          "--char-noise", "0.5", "--manner-error-rate", "0.05", "--seed", "3")
    assert code == 0
    return refs, out, stdout.strip()


def test_decode_text_file(tmp_path):
    labels = "- A B C D E F G H I J K L M N O P Q R S T U V W X Y Z >".split()
    path = [1, 1, 0, 14, 14]
    p = tmp_path / "an.txt"
    posterior.save(PosteriorMatrix(0.9 * np.eye(28)[path] + 0.1 / 28, tuple(labels)), p, "text")
    code, out, err = run("decode", "--posteriors", str(p))
    assert (code, out) == (0, "AN\n")
    assert err.startswith("score ")
    code, out, _ = run("decode", "--posteriors", str(p), "--greedy", "--json")
    data = json.loads(out)
    assert data["transcript"] == "AN" and data["path"] == path


def test_usage_errors():
    assert run()[0] == 1
    assert run("decode")[0] == 1
    assert run("decode", "--posteriors", "x", "--beam", "4", "--greedy")[0] == 1


def test_data_errors(tmp_path):
    code, _, err = run("decode", "--posteriors", str(tmp_path / "nope.bin"))
    assert code == 2 and "error" in err
    bad = tmp_path / "bad.txt"
    bad.write_text("labels: - A\n0.5 0.6\n")
    code, _, err = run("decode", "--posteriors", str(bad))
    assert code == 2


def test_mask_decode_and_dump(corpus, tmp_path):
    _, out, _ = corpus
    dump = tmp_path / "masked.txt"
    code, stdout, _ = run("mask-decode", "--char-posteriors", str(out / "a2.char.bin"),
                          "--manner-posteriors", str(out / "a2.manner.bin"),
                          "--dump-masked", str(dump), "--dump-format", "text", "--beam", "8")
    assert code == 0 and stdout.strip()
    masked = posterior.load(dump)
    np.testing.assert_allclose(masked.frames.sum(axis=1), 1, atol=1e-6)


def test_mask_decode_frame_mismatch(corpus):
    _, out, _ = corpus
    code, _, err = run("mask-decode", "--char-posteriors", str(out / "a1.char.bin"),
                       "--manner-posteriors", str(out / "a2.manner.bin"))
    assert code == 2 and "frame" in err


def test_score(tmp_path):
    ref, hyp = tmp_path / "ref.txt", tmp_path / "hyp.txt"
    ref.write_text("u1\tELEVEN TWENTY SEVEN FIFTY SEVEN\nu2\tAN\n")
    hyp.write_text("u2\tAM\nu1\tE NEN TWENTY SEVEN FIFTY SEVEN\n")
    code, out, _ = run("score", "--ref", str(ref), "--hyp", str(hyp), "--metric", "wer", "--json", "--per-utt")
    data = json.loads(out)
    assert code == 0 and data["wer"] == pytest.approx(3 / 6)
    assert [u["id"] for u in data["per_utterance"]] == ["u1", "u2"]
    code, out, _ = run("score", "--ref", str(ref), "--hyp", str(hyp), "--per-utt")
    assert "WER" in out and "40.0%" in out
    hyp.write_text("u1\tX\n")
    assert run("score", "--ref", str(ref), "--hyp", str(hyp))[0] == 2


def test_config_round_trip(tmp_path):
    code, out, _ = run("config")
    assert code == 0 and out.splitlines()[0].split() == list("-ABCDEFGHIJKLMNOPQRSTUVWXYZ>")
    f = tmp_path / "inv.txt"
    f.write_text(out)
    code, _, _ = run("score", "--ref", str(f), "--hyp", str(f), "--manner-map", str(f))
    # the inventory file itself is not valid transcript text
    assert code == 2


def test_experiment_matches_standalone_commands(corpus, tmp_path):
    refs, out, manifest = corpus
    code, text, _ = run("experiment", "--manifest", manifest, "--beam", "8", "--prune", "0", "--json")
    assert code == 0
    c = json.loads(text)["conditions"][0]
    base, prop = tmp_path / "base.txt", tmp_path / "prop.txt"
    base_lines, prop_lines = [], []
    for uid in ("a1", "a2", "a3"):
        _, b, _ = run("decode", "--posteriors", str(out / f"{uid}.char.bin"), "--beam", "8")
        _, p, _ = run("mask-decode", "--char-posteriors", str(out / f"{uid}.char.bin"),
                      "--manner-posteriors", str(out / f"{uid}.manner.bin"), "--beam", "8")
        base_lines.append(f"{uid}\t{b}")
        prop_lines.append(f"{uid}\t{p}")
    base.write_text("".join(base_lines))
    prop.write_text("".join(prop_lines))
    for hyp, key in ((base, "baseline"), (prop, "proposed")):
        _, s, _ = run("score", "--ref", str(refs), "--hyp", str(hyp), "--json")
        s = json.loads(s)
        assert (s["wer"], s["cer"]) == (c[key]["wer"], c[key]["cer"])


def test_experiment_config_precedence(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"n_utterances": 5, "beam_width": 4, "seeds": [9]}))
    code, text, _ = run("experiment", "--config", str(cfg), "--beam", "6", "--json")
    assert code == 0
    echoed = json.loads(text)["config"]
    assert (echoed["n_utterances"], echoed["beam_width"], echoed["seeds"]) == (5, 6, [9])
    cfg.write_text("{not json")
    assert run("experiment", "--config", str(cfg))[0] == 2


def test_experiment_bad_manifest_exit_code(tmp_path):
    m = tmp_path / "manifest.tsv"
    m.write_text("x\tnope.bin\tnope2.bin\tHI\n")
    code, _, err = run("experiment", "--manifest", str(m))
    assert code == 2 and "utterance x" in err


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mannerctc.cli", "config", "--json"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["manners"]["N"] == ["M", "N"]
