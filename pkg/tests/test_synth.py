import numpy as np
import pytest

from qkad import synth
from qkad.synth import ANOMALY_1, ANOMALY_2, NORMAL, DatasetConfig, Regime


def small(regime, **kw):
    return DatasetConfig(regime, seed=3, segment_seconds=1.0, n_normal_segments=3,
                         n_anomaly_segments_per_type=2, **kw)


def rms_db(segments, label):
    return 10 * np.log10(np.mean([np.mean(s.signal.samples ** 2) for s in segments if s.label == label]))


def test_default_composition(obd_segments, m4w_segments):
    assert len(obd_segments) == 40 and len(m4w_segments) == 50
    assert {s.label for s in obd_segments} == {NORMAL, ANOMALY_1}
    assert {s.label for s in m4w_segments} == {NORMAL, ANOMALY_1, ANOMALY_2}
    assert sum(s.label == ANOMALY_2 for s in m4w_segments) == 10
    assert all(s.signal.samples.size == 160000 for s in obd_segments)
    assert [s.index for s in obd_segments] == list(range(40))


def test_samples_in_pcm_range(obd_segments, m4w_segments):
    for s in obd_segments + m4w_segments:
        x = s.signal.samples
        assert np.all(np.abs(x) <= 1.0)
        np.testing.assert_array_equal(x * synth.PCM_SCALE, np.round(x * synth.PCM_SCALE))


def test_obd_anomalies_louder(obd_segments):
    assert rms_db(obd_segments, ANOMALY_1) > rms_db(obd_segments, NORMAL)


def test_m4w_anomalies_subtle(m4w_segments):
    base = rms_db(m4w_segments, NORMAL)
    for lab in (ANOMALY_1, ANOMALY_2):
        assert abs(rms_db(m4w_segments, lab) - base) < 1.0


@pytest.mark.parametrize("regime", ["OBD", "M4W"])
def test_deterministic(regime):
    a, b = synth.generate(small(regime)), synth.generate(small(regime))
    for x, y in zip(a, b):
        assert x.label == y.label
        np.testing.assert_array_equal(x.signal.samples, y.signal.samples)


def test_seed_and_regime_change_output():
    base = synth.generate_segment(small("OBD"), 0).signal.samples
    other_seed = synth.generate_segment(DatasetConfig("OBD", seed=4, segment_seconds=1.0), 0).signal.samples
    other_regime = synth.generate_segment(small("M4W"), 0).signal.samples
    assert not np.array_equal(base, other_seed)
    assert not np.array_equal(base, other_regime)


def test_segment_independent_of_dataset_size():
    a = synth.generate_segment(small("M4W"), 1)
    b = synth.generate_segment(DatasetConfig("M4W", seed=3, segment_seconds=1.0, n_normal_segments=3,
                                             n_anomaly_segments_per_type=5), 1)
    np.testing.assert_array_equal(a.signal.samples, b.signal.samples)


def test_config_defaults_and_validation():
    cfg = DatasetConfig("m4w")
    assert cfg.regime is Regime.M4W
    assert cfg.anomaly_snr_db == synth.DEFAULT_SNR_DB[Regime.M4W]
    assert DatasetConfig("OBD").anomaly_snr_db == 12.0
    for bad in (dict(regime="XYZ"), dict(regime="OBD", segment_seconds=0),
                dict(regime="OBD", n_normal_segments=0), dict(regime="OBD", sample_rate_hz=-1)):
        with pytest.raises(ValueError):
            DatasetConfig(**bad)


def test_manifest_round_trip(tmp_path):
    cfg = small("M4W")
    segs = synth.generate(cfg)
    manifest = synth.write_dataset(segs, cfg, tmp_path, comment="prov")
    assert manifest.read_text().splitlines()[0] == "# prov"
    rows = synth.read_manifest(manifest)
    assert [r["label"] for r in rows] == [s.label for s in segs]
    assert {r["seed"] for r in rows} == {"3"}
    back = synth.load_dataset(manifest)
    for x, y in zip(segs, back):
        assert x.label == y.label and x.regime is y.regime
        np.testing.assert_array_equal(x.signal.samples, y.signal.samples)
