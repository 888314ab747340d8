import json

import numpy as np
import pytest

from rawboost import (
    ChainParseError,
    ChainSpec,
    DegenerateInputError,
    ParameterRanges,
    ProvenanceRecord,
    Technique,
    Waveform,
    derive_utterance_rng,
    normalize,
    parse_chain,
    replay,
    run_chain,
    run_parallel,
    run_series,
)
from rawboost.errors import ReplayError

from conftest import make_speechlike

FS = 16000


class TestParseChain:
    def test_single_techniques(self):
        for text, tech in (("1", Technique.CONVOLUTIVE), ("2", Technique.IMPULSIVE), ("3", Technique.STATIONARY)):
            spec = parse_chain(text)
            assert spec.techniques == (tech,)
            assert str(spec) == text

    def test_series(self):
        spec = parse_chain("1+2+3")
        assert spec.mode == "series"
        assert [int(t) for t in spec.techniques] == [1, 2, 3]
        assert str(spec) == "1+2+3"

    def test_parallel(self):
        spec = parse_chain("1|2")
        assert spec.mode == "parallel"
        assert str(spec) == "1|2"

    def test_empty_is_identity_chain(self):
        spec = parse_chain("")
        assert spec.techniques == ()

    def test_rejects_mixed_separators(self):
        with pytest.raises(ChainParseError):
            parse_chain("1+2|3")

    def test_rejects_unknown_technique(self):
        with pytest.raises(ChainParseError):
            parse_chain("4")
        with pytest.raises(ChainParseError):
            parse_chain("12")
        with pytest.raises(ChainParseError):
            parse_chain("1++2")


class TestNormalize:
    def test_clean_peak_unchanged(self):
        y = np.array([0.1, -0.8, 0.5])
        assert np.array_equal(normalize(y), y)

    def test_overflow_rescaled_shape_preserved(self):
        y = np.array([2.0, -1.0, 0.5])
        out = normalize(y)
        assert np.max(np.abs(out)) == 1.0
        ratios = out / y
        assert np.allclose(ratios, ratios[0], rtol=0, atol=0)

    def test_idempotent_bit_exact(self):
        g = np.random.default_rng(0)
        for _ in range(200):
            y = g.normal(scale=g.uniform(0.1, 3.0), size=int(g.integers(1, 200)))
            once = normalize(y)
            twice = normalize(once)
            assert np.array_equal(once, twice)
            assert np.max(np.abs(once)) <= 1.0


def run_text_chain(x, text, seed=7, key="utt.wav", ranges=None):
    return run_chain(x, parse_chain(text), derive_utterance_rng(seed, key), ranges, utterance=key, seed=seed)


class TestRunChain:
    def test_empty_chain_identity(self):
        x = make_speechlike(1000, 0)
        out, record = run_text_chain(x, "")
        assert np.array_equal(out.samples, x.samples)
        assert record.techniques == ()

    def test_deterministic(self):
        x = make_speechlike(4000, 1)
        a, ra = run_text_chain(x, "1+2")
        b, rb = run_text_chain(x, "1+2")
        assert np.array_equal(a.samples, b.samples)
        assert ra == rb

    def test_series_best_config_differs_from_singles(self):
        x = make_speechlike(4000, 2)
        both, _ = run_text_chain(x, "1+2")
        only1, _ = run_text_chain(x, "1")
        only2, _ = run_text_chain(x, "2")
        assert not np.array_equal(both.samples, only1.samples)
        assert not np.array_equal(both.samples, only2.samples)

    def test_single_technique_series_equals_parallel(self):
        x = make_speechlike(3000, 3)
        for text in ("1", "2", "3"):
            srs, _ = run_chain(x, ChainSpec((Technique(int(text)),), "series"), derive_utterance_rng(5, "k"))
            par, _ = run_chain(x, ChainSpec((Technique(int(text)),), "parallel"), derive_utterance_rng(5, "k"))
            assert np.array_equal(srs.samples, par.samples)

    def test_series_vs_parallel_differ_generically(self):
        x = make_speechlike(4000, 4)
        srs, _ = run_text_chain(x, "1+2")
        par, _ = run_text_chain(x, "1|2")
        assert not np.array_equal(srs.samples, par.samples)

    def test_parallel_zero_input_stays_zero(self):
        x = Waveform(samples=np.zeros(500), sample_rate=FS)
        out, _ = run_text_chain(x, "1|2")
        assert np.all(out.samples == 0.0)

    def test_extending_chain_preserves_earlier_draws(self):
        x = make_speechlike(2000, 5)
        _, short = run_text_chain(x, "1")
        _, long = run_text_chain(x, "1+2")
        assert short.techniques[0].params == long.techniques[0].params

    def test_output_peak_and_length(self):
        for seed, text in enumerate(("1", "2", "3", "1+2", "1+2+3", "1|2", "2|3")):
            x = make_speechlike(2500, seed + 10)
            out, _ = run_text_chain(x, text, seed=seed)
            assert len(out) == len(x)
            assert np.max(np.abs(out.samples)) <= 1.0

    def test_zero_energy_input_to_stationary_propagates(self):
        x = Waveform(samples=np.zeros(100), sample_rate=FS)
        with pytest.raises(DegenerateInputError):
            run_text_chain(x, "3")

    def test_mode_checked(self):
        x = make_speechlike(100, 6)
        with pytest.raises(ChainParseError):
            run_series(x, parse_chain("1|2"), derive_utterance_rng(0, "k"))
        with pytest.raises(ChainParseError):
            run_parallel(x, parse_chain("1+2"), derive_utterance_rng(0, "k"))


class TestProvenance:
    def test_record_contents(self):
        x = make_speechlike(2000, 7)
        _, record = run_text_chain(x, "1+2+3", seed=11, key="clip.wav")
        assert record.utterance == "clip.wav"
        assert record.seed == 11
        assert record.chain == "1+2+3"
        assert record.sample_rate == FS
        assert record.num_samples == 2000
        assert [t.technique for t in record.techniques] == [1, 2, 3]
        conv = record.techniques[0].params
        assert len(conv["orders"]) == 5
        assert conv["orders"][0]["gain_db"] == 0.0
        assert len(conv["orders"][0]["notches"]) == 5
        imp = record.techniques[1].params
        assert 0.0 <= imp["p_rel"] <= 0.10 and imp["g_sd"] == 2.0
        stat = record.techniques[2].params
        assert 10.0 <= stat["snr_db"] <= 40.0
        for t in record.techniques:
            assert t.draws_config >= 0 and t.draws_kernel >= 0

    def test_json_roundtrip_equality(self):
        x = make_speechlike(1500, 8)
        _, record = run_text_chain(x, "1|3", seed=13, key="r.wav")
        obj = json.loads(json.dumps(record.to_json_obj()))
        assert ProvenanceRecord.from_json_obj(obj) == record

    def test_replay_bit_exact(self):
        for text in ("1", "2", "3", "1+2", "2+3", "1+2+3", "1|2", "1|2|3"):
            x = make_speechlike(3000, hash(text) % 100)
            out, record = run_text_chain(x, text, seed=3, key=f"{text}.wav")
            replayed, traces = replay(record, x)
            assert np.array_equal(replayed.samples, out.samples)
            assert len(traces) == len(record.techniques)

    def test_replay_after_serialization(self):
        x = make_speechlike(2000, 9)
        out, record = run_text_chain(x, "1+2", seed=21, key="s.wav")
        obj = json.loads(json.dumps(record.to_json_obj()))
        replayed, _ = replay(ProvenanceRecord.from_json_obj(obj), x)
        assert np.array_equal(replayed.samples, out.samples)

    def test_replay_validates_input(self):
        x = make_speechlike(1000, 10)
        _, record = run_text_chain(x, "2")
        with pytest.raises(ReplayError):
            replay(record, make_speechlike(999, 10))
        with pytest.raises(ReplayError):
            replay(record, Waveform(samples=x.samples, sample_rate=8000))

    def test_replay_traces_expose_kernel_io(self):
        x = make_speechlike(2000, 11)
        out, record = run_text_chain(x, "2+3", seed=5, key="t.wav")
        _, traces = replay(record, x)
        imp, stat = traces
        p = int(np.floor(imp.params["p_rel"] * 2000 + 0.5))
        assert int(np.count_nonzero(imp.output_samples != imp.input_samples)) <= p
        residual = stat.output_samples - stat.input_samples
        measured = 10 * np.log10(np.sum(stat.input_samples**2) / np.sum(residual**2))
        assert measured == pytest.approx(stat.params["snr_db"], abs=0.01)
