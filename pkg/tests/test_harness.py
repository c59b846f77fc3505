import csv
import math
from collections import Counter

import numpy as np
import pytest

from sparsedyn import harness
from sparsedyn.config import default_config
from sparsedyn.library import load_library, read_manifest
from sparsedyn.pde import REGIMES
from sparsedyn.sensing import Measurement


@pytest.fixture(scope="module")
def small_cfg():
    return default_config(
        n=256, regimes=((1, REGIMES[1]), (5, REGIMES[5])),
        snapshot_start=10.0, snapshot_stop=20.0,
        segment_starts=(0.0, 20.0), segment_regimes=(1, 5), t_end=40.0,
        measurement_times=(5.0, 25.0), rom_window=10.0, trials=12, sigma=0.2, seed=3)


@pytest.fixture(scope="module")
def small_lib(small_cfg, tmp_path_factory):
    path = tmp_path_factory.mktemp("small") / "small.podl"
    return harness.build_all(small_cfg, path), path


@pytest.fixture(scope="module")
def small_ref(small_cfg):
    return harness.simulate_reference(small_cfg)


def test_one_regime_gives_one_block(tmp_path):
    cfg = default_config(n=128, regimes=((5, REGIMES[5]),), snapshot_start=1.0, snapshot_stop=3.0,
                         segment_starts=(0.0,), segment_regimes=(5,), t_end=5.0,
                         measurement_times=(2.0,))
    lib = harness.build_all(cfg)
    assert lib.regime_ids == [5]


def test_build_writes_library_and_manifest(small_lib):
    lib, path = small_lib
    assert load_library(path) == lib
    m = read_manifest(path)
    assert m["n"] == "256" and m["regimes"] == "1 5" and m["energy"] == "0.99"
    assert m["ranks"] == " ".join(map(str, lib.ranks))
    assert "tau=-0.3" in m["regime.1"]


def test_rebuild_is_bit_identical(small_cfg, small_lib, tmp_path):
    _, path = small_lib
    again = tmp_path / "again.podl"
    harness.build_all(small_cfg, again)
    assert again.read_bytes() == path.read_bytes()


def test_switching_noiseless_single_segment(small_cfg, small_lib):
    cfg = default_config(**{**small_cfg.__dict__, "segment_starts": (0.0,),
                            "segment_regimes": (1,), "t_end": 20.0,
                            "measurement_times": (12.0,), "sigma": 0.0})
    report = harness.run_switching_experiment(cfg, small_lib[0])
    assert [r.predicted_regime for r in report.rows] == [1]


def test_switching_report_contents(small_cfg, small_lib, small_ref):
    lib = small_lib[0]
    cfg = default_config(**{**small_cfg.__dict__, "sigma": 0.0})
    report = harness.run_switching_experiment(cfg, lib, reference=small_ref)
    assert [r.true_regime for r in report.rows] == [1, 5]
    assert [r.predicted_regime for r in report.rows] == [1, 5]
    assert all(r.margin >= 0 for r in report.rows)
    assert all(math.isfinite(r.recon_rel_l2) for r in report.rows)
    assert len(report.coefficients) == 2 and report.coefficients[0].shape == (lib.p,)


def test_monte_carlo_counts_and_determinism(small_cfg, small_lib, small_ref):
    lib = small_lib[0]
    a = harness.run_monte_carlo(small_cfg, lib, reference=small_ref)
    b = harness.run_monte_carlo(small_cfg, lib, reference=small_ref)
    assert a.counts == b.counts
    assert a.true_regimes == [1, 5] and a.times == [5.0, 25.0]
    for cell in a.counts:
        assert sum(cell.values()) == small_cfg.trials
    assert all(0 <= x <= 100 for x in a.accuracies)
    assert a.diagnostics["solves"] == 2 * small_cfg.trials


def test_monte_carlo_trials_are_independent_of_batch(small_cfg, small_lib, small_ref):
    # trial i draws from seed base + i, so single-trial runs add up to the batch
    lib = small_lib[0]
    batch = harness.run_monte_carlo(small_cfg, lib, trials=5, reference=small_ref)
    total = [Counter() for _ in batch.times]
    for i in range(5):
        one = harness.run_monte_carlo(small_cfg, lib, trials=1, seed=small_cfg.seed + i,
                                      reference=small_ref)
        for k, cell in enumerate(one.counts):
            total[k].update(cell)
    assert [dict(c) for c in total] == batch.counts


def test_monte_carlo_noiseless_is_perfect(small_cfg, small_lib, small_ref):
    stats = harness.run_monte_carlo(small_cfg, small_lib[0], sigma=0.0, trials=3,
                                    reference=small_ref)
    assert stats.accuracies == [100.0, 100.0]


def test_monte_carlo_aggregate_window(small_cfg, small_lib, small_ref):
    cfg = default_config(**{**small_cfg.__dict__, "aggregate_window": 3})
    stats = harness.run_monte_carlo(cfg, small_lib[0], reference=small_ref)
    for cell in stats.counts:
        assert sum(cell.values()) == cfg.trials
    assert stats.diagnostics["solves"] == 3 * 2 * cfg.trials


def test_monte_carlo_rejects_zero_trials(small_cfg, small_lib, small_ref):
    with pytest.raises(ValueError):
        harness.run_monte_carlo(small_cfg, small_lib[0], trials=0, reference=small_ref)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_emit_header_only(tmp_path):
    harness.emit_report(None, tmp_path / "empty.csv")
    assert _rows(tmp_path / "empty.csv") == [list(harness.ACCURACY_COLUMNS)]
    stats = harness.TrialStats([], [], [], 1)
    harness.emit_report(stats, tmp_path / "empty2.csv")
    assert (tmp_path / "empty2.csv").read_text() == "true_regime,predicted_regime,time_label,count,percent\n"


def test_accuracy_table_shape(tmp_path):
    stats = harness.TrialStats([25.0, 125.0, 225.0], [1, 3, 5],
                               [{1: 360, 2: 40}, {3: 392, 4: 8}, {5: 284, 6: 116}], 400)
    path = tmp_path / "acc.csv"
    harness.emit_report(stats, path, regime_ids=[1, 2, 3, 4, 5, 6])
    rows = _rows(path)
    assert rows[0] == list(harness.ACCURACY_COLUMNS)
    assert len(rows) == 1 + 6 * 3
    assert rows[1] == ["1", "1", "t=25", "360", "90.00"]
    assert ["3", "3", "t=125", "392", "98.00"] in rows
    assert stats.accuracies == [90.0, 98.0, 71.0]


def test_switching_table_and_byte_identical_reemission(small_cfg, small_lib, small_ref, tmp_path):
    report = harness.run_switching_experiment(small_cfg, small_lib[0], reference=small_ref)
    harness.emit_report(report, tmp_path / "a.csv")
    harness.emit_report(report, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    rows = _rows(tmp_path / "a.csv")
    assert rows[0] == list(harness.SWITCHING_COLUMNS) and len(rows) == 3
    harness.emit_coefficients(report, small_lib[0], tmp_path / "c.csv")
    assert len(_rows(tmp_path / "c.csv")) == 1 + 2 * small_lib[0].p


def test_emit_rejects_unknown(tmp_path):
    with pytest.raises(TypeError):
        harness.emit_report(42, tmp_path / "x.csv")


def test_measurement_csv_round_trip(tmp_path):
    ms = [Measurement(np.array([1 + 2j, -0.5j]), 25.0, 0.2, (0.0, 0.7)),
          Measurement(np.array([3.0 + 0j, 1e-17 + 1j]), 125.0, 0.2, (0.0, 0.7))]
    path = tmp_path / "m.csv"
    harness.write_measurements(ms, path)
    assert path.read_text().splitlines()[0] == "sensor_x,real,imag,time"
    back = harness.read_measurements(path)
    assert [m.time for m in back] == [25.0, 125.0]
    for a, b in zip(ms, back):
        np.testing.assert_array_equal(a.values, b.values)
        assert a.positions == b.positions


def test_measurement_csv_bad_header(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("x,re,im,t\n0,1,0,25\n")
    with pytest.raises(ValueError):
        harness.read_measurements(path)


def test_end_to_end_determinism(small_cfg, tmp_path):
    outputs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        lib = harness.build_all(small_cfg, d / "lib.podl")
        ref = harness.simulate_reference(small_cfg)
        harness.emit_report(harness.run_switching_experiment(small_cfg, lib, reference=ref),
                            d / "switching.csv")
        harness.emit_report(harness.run_monte_carlo(small_cfg, lib, reference=ref),
                            d / "accuracy.csv", lib.regime_ids)
        outputs.append([(d / f).read_bytes() for f in ("lib.podl", "switching.csv", "accuracy.csv")])
    assert outputs[0] == outputs[1]
