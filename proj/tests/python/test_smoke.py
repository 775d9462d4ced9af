# Copyright 2026 The gacompress Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import pytest

import gacompress


def test_cardinality():
    assert gacompress.cardinality() == 11059200


def test_reference_estimate():
    est = gacompress.estimate()
    assert est["param_count"] == 124644866
    assert abs(est["megabytes"] - 476.0) <= 0.03 * 476.0
    assert est["seq_len"] == 400


def test_estimate_rejects_off_grid():
    with pytest.raises(gacompress.ValidationError, match="heads"):
        gacompress.estimate(gacompress.reference_arch(), check_grid=True)
    with pytest.raises(ValueError):
        gacompress.estimate(seq_len=513)


def test_fitness_matches_gflops_at_exact_size():
    arch = {"layers": 1, "hidden": 64, "heads": 1, "ffn": 128, "vocab": 11000,
            "max_seq_len": 512, "num_classes": 2}
    est = gacompress.estimate(arch)
    genes = (1, 64, 1, 128, 11000)
    f = gacompress.fitness(genes, est["megabytes"])
    assert f == pytest.approx(est["gflops"], rel=0, abs=1e-12)
    assert gacompress.fitness(genes, est["megabytes"] + 1.0) == pytest.approx(
        est["gflops"] - 1.0)


def test_search_hits_budget_and_is_deterministic():
    a = gacompress.search(3.0, seed=1)
    b = gacompress.search(3.0, seed=1)
    a.pop("elapsed_seconds")
    b.pop("elapsed_seconds")
    assert a == b
    size = gacompress.estimate(a["best"])["megabytes"]
    assert 2.8 <= size <= 3.2
    assert a["history"] == sorted(a["history"])
    with pytest.raises(gacompress.ValidationError):
        gacompress.search(0.0)


def test_soft_ce_loss():
    loss, grad = gacompress.soft_ce_loss([0.0, 0.0], [0.0, 0.0], 1.0)
    assert loss == pytest.approx(math.log(2.0), abs=1e-12)
    assert grad == pytest.approx([0.0, 0.0])
    self_loss, _ = gacompress.soft_ce_loss([3.0, -1.0, 0.5], [3.0, -1.0, 0.5], 2.0)
    cross, _ = gacompress.soft_ce_loss([3.0, -1.0, 0.5], [-2.0, 4.0, 0.0], 2.0)
    assert cross > self_loss
    big, _ = gacompress.soft_ce_loss([50.0, -50.0], [-50.0, 50.0], 0.5)
    assert math.isfinite(big)


def test_tiny_pipeline(tmp_path):
    with pytest.raises(gacompress.DependencyError):
        gacompress.capture(tmp_path)
    arch = {"layers": 1, "hidden": 16, "heads": 2, "ffn": 32, "vocab": 2000,
            "max_seq_len": 32, "num_classes": 2}
    task = {"labeled": 200, "unlabeled": 200, "val": 100, "test": 100}
    teach = gacompress.teach(tmp_path, arch=arch, task=task, epochs=1)
    assert teach["command"] == "teach"
    assert (tmp_path / "teacher.ckpt").exists()
    gacompress.capture(tmp_path)
    search = gacompress.search_run(tmp_path, target_fraction=0.5, max_iter=5)
    assert len(search["metrics"]["history"]) == 5
    distill = gacompress.distill(tmp_path, epochs=1, seed=3)
    assert len(distill["metrics"]["loss_trace"]) == 2
    bench = gacompress.bench(tmp_path, examples=5, repeats=2)
    assert [len(m["latency_ms_per_repeat"])
            for m in bench["metrics"]["models"]] == [2, 2]
    merged = gacompress.report(tmp_path)
    assert set(merged["metrics"]["reports"]) >= {
        "teach", "capture", "search", "distill", "bench"}
