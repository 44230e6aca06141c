"""Cross-route consistency battery.

Every headline quantity in the package is computable two independent
ways; this module runs the comparisons over a seeded Haar corpus and
reports the worst deviation per check.  The tolerance here governs
only these comparisons, never the solver internals.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .distill import fidelity_distill, one_shot_distillable
from .errors import CoherenceError
from .experiments import haar_states
from .linalg import StateVector
from .monotones import theta
from .purestate import fidelity_pure, m_distillation_norm, m_norm_dual_check
from .stateio import state_to_json

DEFAULT_DIMS = (2, 3, 4, 5, 6, 7, 8)
DEFAULT_SAMPLES = 50
DEFAULT_SEED = 746063
# heavier SDP checks run on a slice of the corpus
HEAVY_SLICE = 10


@dataclass
class CheckResult:
    name: str
    instances: int = 0
    worst: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, deviation: float, tolerance: float, context: dict):
        self.instances += 1
        self.worst = max(self.worst, deviation)
        if deviation > tolerance:
            self.failures.append(dict(context, deviation=deviation))

    def record_error(self, exc: Exception, context: dict):
        self.instances += 1
        self.worst = float("inf")
        self.failures.append(dict(context, error=str(exc)))


def _corpus(dims, samples, seed):
    out = {}
    rng = np.random.default_rng(seed)
    for d in dims:
        out[d] = [StateVector(v) for v in haar_states(d, samples, rng)]
    return out


def run_battery(
    dims=DEFAULT_DIMS,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tolerance: float = 1e-6,
    progress=None,
):
    """Run all checks; returns a list of CheckResult."""
    corpus = _corpus(dims, samples, seed)

    c_norm = CheckResult("interval witness vs rearrangement")
    c_dual = CheckResult("rearrangement dual certificate")
    c_fid = CheckResult("fidelity program vs shifted monotone")
    c_rate = CheckResult("rate program vs exhaustive scan")

    for d, states in corpus.items():
        for idx, psi in enumerate(states):
            ctx = {"dim": d, "sample": idx, "state": psi}
            for m in range(1, d + 1):
                value = m_distillation_norm(psi, m).value
                try:
                    t = theta(psi, m - 1).value
                except CoherenceError as exc:
                    c_norm.record_error(exc, dict(ctx, m=m))
                    continue
                c_norm.record(abs(t - (value**2 - 1.0)), tolerance, dict(ctx, m=m))

            for m in (2, min(d, 4)):
                res = m_distillation_norm(psi, m)
                dual = m_norm_dual_check(psi, m)
                c_dual.record(
                    abs(dual["overlap"] - res.value), tolerance, dict(ctx, m=m)
                )

            if idx < HEAVY_SLICE:
                for m in (2, d):
                    try:
                        rep = fidelity_distill(psi, m)
                    except CoherenceError as exc:
                        c_fid.record_error(exc, dict(ctx, m=m))
                        continue
                    c_fid.record(
                        abs(rep.fidelity - fidelity_pure(psi, m)),
                        tolerance,
                        dict(ctx, m=m),
                    )
                for eps in (0.0, 0.1):
                    try:
                        rep = one_shot_distillable(psi, eps)
                    except CoherenceError as exc:
                        c_rate.record_error(exc, dict(ctx, eps=eps))
                        continue
                    c_rate.record(
                        abs(rep.m - rep.scan_m), tolerance, dict(ctx, eps=eps)
                    )
            if progress:
                progress(d, idx)

    return [c_norm, c_dual, c_fid, c_rate]


def dump_failure(failure: dict, directory, index: int):
    """Serialize a failing instance for offline reproduction."""
    os.makedirs(directory, exist_ok=True)
    base = os.path.join(directory, "selftest_failure_%02d" % index)
    state = failure.get("state")
    query = {k: v for k, v in failure.items() if k != "state"}
    if state is not None:
        with open(base + ".state.json", "w", encoding="utf-8") as fh:
            json.dump(state_to_json(state), fh)
            fh.write("\n")
        query["state_file"] = base + ".state.json"
    with open(base + ".query.json", "w", encoding="utf-8") as fh:
        json.dump(query, fh, indent=2, default=str)
        fh.write("\n")
    return base
