"""Seeded synthetic operator cohorts and batch production records.

Every draw comes from a counter-based Philox4x64 stream keyed by
(seed, sha256(group name, operator index)), so adding operators or
reordering groups never perturbs existing sequences. Uniforms are the top
53 bits of each raw word, normals come from the AS241 inverse CDF; the
whole recipe is recorded in dataset metadata as the RNG identifier.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np
from numpy.random import Philox

from .analytics import LearningCurveModel, predict

RNG_ID = "philox4x64:u53:as241-inverse-normal"
_MASK64 = (1 << 64) - 1
MULTIPLIER_FLOOR = 0.05


@dataclass(frozen=True)
class ProcessParams:
    """Steady-state process figures for the machining line."""

    avg_cycle_time: float = 4994.0  # seconds, 01:23:14
    cycle_cv: float = 0.1063
    avg_setup_time: float = 16.97  # minutes
    setup_cv: float = 0.1233
    defect_rate: float = 0.02
    batch_size: int = 100

    def __post_init__(self):
        if min(self.avg_cycle_time, self.avg_setup_time, self.batch_size) <= 0:
            raise ValueError("process parameters must be positive")
        if not (0 <= self.cycle_cv < 1 and 0 <= self.setup_cv < 1):
            raise ValueError("coefficients of variation must be in [0, 1)")
        if not 0 <= self.defect_rate <= 1:
            raise ValueError("defect rate must be in [0, 1]")


@dataclass(frozen=True)
class GroupSpec:
    """One simulated cohort group: its name keys the random substreams."""

    name: str
    curve: LearningCurveModel


@dataclass(frozen=True)
class CohortConfig:
    groups: tuple[GroupSpec, ...]
    operators_per_group: int = 10
    batches: int = 64
    noise_cv: float = 0.1233
    noise_model: str = "gaussian"  # or "lognormal"
    seed: int = 0

    def __post_init__(self):
        if self.operators_per_group < 1 or self.batches < 1:
            raise ValueError("operators_per_group and batches must be >= 1")
        if self.noise_model not in ("gaussian", "lognormal"):
            raise ValueError(f"unknown noise model {self.noise_model!r}")
        names = [g.name for g in self.groups]
        if len(set(names)) != len(names):
            raise ValueError("group names must be unique")


@dataclass(frozen=True)
class CohortDataset:
    """Matrices of setup minutes (operator x batch) keyed by group name."""

    groups: dict[str, np.ndarray]
    metadata: dict


# ---------------------------------------------------------------------------
# AS241 inverse normal CDF (Wichura), double precision. Used instead of a
# library sampler so the uniform-to-normal mapping is a fixed published
# algorithm and generated datasets stay reproducible cross-platform.

_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coeffs, r):
    out = np.full_like(r, coeffs[-1])
    for c in coeffs[-2::-1]:
        out = out * r + c
    return out


def norm_ppf(p: np.ndarray) -> np.ndarray:
    """Inverse standard normal CDF, AS241 PPND16 (about 1e-16 relative)."""
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0.0) | (p >= 1.0)):
        raise ValueError("p must lie strictly inside (0, 1)")
    q = p - 0.5
    result = np.empty_like(p)

    central = np.abs(q) <= 0.425
    if np.any(central):
        r = 0.180625 - q[central] * q[central]
        result[central] = q[central] * _poly(_A, r) / _poly(_B, r)

    tails = ~central
    if np.any(tails):
        qt = q[tails]
        r = np.where(qt < 0.0, p[tails], 1.0 - p[tails])
        r = np.sqrt(-np.log(r))
        near = r <= 5.0
        val = np.empty_like(r)
        val[near] = _poly(_C, r[near] - 1.6) / _poly(_D, r[near] - 1.6)
        val[~near] = _poly(_E, r[~near] - 5.0) / _poly(_F, r[~near] - 5.0)
        result[tails] = np.where(qt < 0.0, -val, val)
    return result


class NoiseStream:
    """Deterministic per-entity random stream.

    Raw 64-bit Philox words are mapped to uniforms by
    u = (word >> 11 + 0.5) * 2**-53, which never produces an endpoint.
    """

    def __init__(self, seed: int, substream: int):
        self._bitgen = Philox(key=[seed & _MASK64, substream & _MASK64])

    def uniforms(self, n: int) -> np.ndarray:
        raw = self._bitgen.random_raw(n)
        return ((raw >> np.uint64(11)) + 0.5) * 2.0**-53

    def normals(self, n: int) -> np.ndarray:
        return norm_ppf(self.uniforms(n))


def stream_for(seed: int, group_name: str, operator_index: int) -> NoiseStream:
    """The documented stream split: substream = first 8 bytes of
    sha256("<group>:<operator>"). Index-stable: new operators or reordered
    groups leave existing streams untouched.
    """
    digest = hashlib.sha256(f"{group_name}:{operator_index}".encode("utf-8")).digest()
    return NoiseStream(seed, int.from_bytes(digest[:8], "big"))


def _noise_multipliers(stream: NoiseStream, cv: float, n: int, model: str) -> np.ndarray:
    draws = stream.normals(n)
    if model == "lognormal":
        if cv == 0.0:
            return np.ones(n)
        sigma = np.sqrt(np.log1p(cv * cv))
        mult = np.exp(sigma * draws - 0.5 * sigma * sigma)
    else:
        mult = 1.0 + cv * draws
    return np.maximum(MULTIPLIER_FLOOR, mult)


def simulate_operator(
    curve: LearningCurveModel,
    noise_cv: float,
    batches: int,
    stream: NoiseStream,
    noise_model: str = "gaussian",
) -> np.ndarray:
    """Setup minutes for one operator: curve value times a noisy multiplier."""
    if batches < 1:
        raise ValueError("batches must be >= 1")
    base = np.array([predict(curve, k) for k in range(1, batches + 1)])
    return base * _noise_multipliers(stream, noise_cv, batches, noise_model)


def simulate_cohort(config: CohortConfig) -> CohortDataset:
    """Generate every group's operator x batch matrix from the config seed."""
    groups: dict[str, np.ndarray] = {}
    for spec in config.groups:
        rows = [
            simulate_operator(
                spec.curve,
                config.noise_cv,
                config.batches,
                stream_for(config.seed, spec.name, op),
                config.noise_model,
            )
            for op in range(config.operators_per_group)
        ]
        groups[spec.name] = np.vstack(rows)
    return CohortDataset(groups=groups, metadata=cohort_metadata(config))


def cohort_metadata(config: CohortConfig) -> dict:
    canonical = {
        "seed": config.seed,
        "operators_per_group": config.operators_per_group,
        "batches": config.batches,
        "noise_cv": config.noise_cv,
        "noise_model": config.noise_model,
        "groups": [
            {"name": g.name, "b0": g.curve.b0, "b1": g.curve.b1, "b2": g.curve.b2}
            for g in config.groups
        ],
    }
    blob = json.dumps(canonical, sort_keys=True, separators=(",", ":"))
    return {
        **canonical,
        "rng": RNG_ID,
        "stream_split": "substream = sha256('<group>:<operator>')[:8] as uint64",
        "multiplier_floor": MULTIPLIER_FLOOR,
        "config_sha256": hashlib.sha256(blob.encode()).hexdigest(),
        "format_version": 1,
    }


@dataclass(frozen=True)
class BatchRecord:
    batch: int
    mean_cycle_seconds: float
    defects: int


def simulate_production(
    params: ProcessParams, batches: int, stream: NoiseStream
) -> list[BatchRecord]:
    """Per-batch cycle-time summaries and defect counts.

    Piece cycle times are normal with the configured mean and CV, floored at
    5% of the mean; defects are a sum of per-piece Bernoulli draws.
    """
    if batches < 1:
        raise ValueError("batches must be >= 1")
    n = params.batch_size
    records = []
    for b in range(1, batches + 1):
        cycles = params.avg_cycle_time * (1.0 + params.cycle_cv * stream.normals(n))
        cycles = np.maximum(MULTIPLIER_FLOOR * params.avg_cycle_time, cycles)
        defects = int(np.count_nonzero(stream.uniforms(n) < params.defect_rate))
        records.append(
            BatchRecord(batch=b, mean_cycle_seconds=float(cycles.mean()), defects=defects)
        )
    return records
