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

"""Size-targeted architecture search and distillation for small encoders."""

import json
import os

from gacompress import _gacompress as _core
from gacompress._gacompress import DependencyError, NumericalError, ValidationError

__all__ = [
    "DependencyError",
    "NumericalError",
    "ValidationError",
    "bench",
    "capture",
    "cardinality",
    "distill",
    "estimate",
    "fitness",
    "reference_arch",
    "report",
    "search",
    "search_run",
    "soft_ce_loss",
    "teach",
]


def cardinality():
    return _core.cardinality()


def reference_arch():
    return json.loads(_core.reference_arch())


def estimate(arch=None, seq_len=None, bytes_per_param=4, check_grid=False):
    """Parameter count, size and forward FLOPs for an architecture dict."""
    arch = reference_arch() if arch is None else arch
    return json.loads(
        _core.estimate(json.dumps(arch), seq_len, bytes_per_param, check_grid))


def fitness(genes, target_size_mb, **ga):
    """Fitness of (layers, hidden, heads, ffn, vocab) for a size budget."""
    ga["target_size_mb"] = target_size_mb
    return _core.fitness(list(genes), json.dumps(ga))


def search(target_size_mb, seed=0, **ga):
    """Runs the genetic search in memory and returns the result dict."""
    ga.update(target_size_mb=target_size_mb, seed=seed)
    return json.loads(_core.search(json.dumps(ga)))


def soft_ce_loss(p, q, temperature):
    """Returns (loss, d loss / d q) for teacher logits p, student logits q."""
    return _core.soft_ce_loss(list(p), list(q), temperature)


def teach(out_dir, arch=None, task=None, epochs=0, seed=11):
    return json.loads(_core.teach(
        os.fspath(out_dir), json.dumps(arch) if arch else "",
        json.dumps(task) if task else "", epochs, seed))


def capture(out_dir, strict=True):
    return json.loads(_core.capture(os.fspath(out_dir), strict))


def search_run(out_dir, target_size_mb=3.0, target_fraction=None,
               teacher=None, seed=0, **ga):
    """Search step of the pipeline; writes arch.json and ga_result.json."""
    ga.update(target_size_mb=target_size_mb, seed=seed)
    return json.loads(_core.search_run(
        os.fspath(out_dir), json.dumps(ga), target_fraction,
        os.fspath(teacher) if teacher else None))


def distill(out_dir, temperature=2.0, learning_rate=1e-3, epochs=20,
            batch_size=32, seed=0):
    return json.loads(_core.distill(os.fspath(out_dir), temperature,
                                    learning_rate, epochs, batch_size, seed))


def bench(out_dir, examples=100, repeats=3, seed=0):
    return json.loads(_core.bench(os.fspath(out_dir), examples, repeats, seed))


def report(out_dir):
    return json.loads(_core.report(os.fspath(out_dir)))
