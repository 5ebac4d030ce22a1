#
# Copyright 2026 The fednga Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Normalized-gradient federated aggregation simulator."""

from ._fednga import (
    BenchResult,
    Config,
    FormatError,
    GradCheckResult,
    NonFiniteError,
    RoundRecord,
    SimulationResult,
    ValidationError,
    aggregate,
    bench_aggregator,
    calibrate_constant_step,
    compute_gamma,
    config_keys,
    coordinate_median,
    descent_coefficient,
    dirichlet_partition,
    fed_nga,
    fedavg,
    fit_loglog_slope,
    gaussian_attack,
    geometric_median,
    gradient_check,
    krum,
    krum_select,
    lemma1_report,
    lr_schedule,
    normalize,
    read_records_csv,
    run_simulation,
    same_value,
    sign_flip,
    theorem1_check,
    theorem2_bounds,
    trimmed_mean,
)

__version__ = "0.1.0"
__all__ = [name for name in dir() if not name.startswith("_")]
