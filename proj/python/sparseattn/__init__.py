# Copyright 2026 The sparseattn Authors.
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

"""Approximate sparse attention targets with low-dimensional softmax attention."""

from ._core import (
    ApproxParams,
    Error,
    Pipeline,
    ProjectionMode,
    SparseStochasticMatrix,
    attention_inputs,
    check_conditions,
    check_direct,
    csam,
    format_coo,
    generate,
    log_gap,
    logits,
    parse_coo,
    projection_matrix,
    read_coo,
    redraw_budget,
    redraw_seed,
    render_pgm,
    sam,
    sample_stiefel,
    svd_factor,
    sweep,
    tail_estimate,
    theoretical_d,
    theoretical_tail,
    validate,
    write_coo,
)

__version__ = "0.1.0"


def approximate(A, d, eps1=0.15, eps2=1.41, q=1.0, seed=0, threads=1):
    """Search redraws at width d; returns (report, Z) for the first passing
    draw, or for the last draw tried when none passes."""
    pipe = Pipeline(A, eps1, eps2, A.causal)
    index, used = pipe.search(d, seed, redraw_budget(q, A.L), threads)
    t = index if index is not None else used - 1
    return pipe.evaluate(d, redraw_seed(seed, d, t))


__all__ = [name for name in dir() if not name.startswith("_")]
