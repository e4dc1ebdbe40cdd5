"""
In-process model of an N-server cluster with stragglers.

Time is simulated: each server finishes at ``1 + delay`` ticks where the
delay comes from a :class:`StragglerConfig`. The coordinator decodes from
the Q earliest answers (ties go to the lower server index) and checks the
result against the plaintext product. Server work can run on a thread
pool; the report only depends on the simulated ticks, never on the order
in which workers actually finish.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean
from typing import Sequence

import numpy as np

from . import codec
from .codec import Partition, SchemeParams
from .errors import PreconditionError, TooFewAnswers
from .ffield import FieldMatrix, mat_mul
from .partition import exhaustive_rate_opt, exhaustive_threshold_opt

MODELS = ("none", "fixed_slow_set", "exponential", "deterministic_delays")
BASE_TICKS = 1.0


@dataclass(frozen=True)
class StragglerConfig:
    """Delay model.

    ``fixed_slow_set`` adds ``slow_delay`` (infinite by default, meaning the
    server never answers) to the listed 1-based servers; ``exponential``
    draws i.i.d. delays with the given mean from ``seed``;
    ``deterministic_delays`` takes one delay per server.
    """

    model: str = "none"
    slow_set: tuple[int, ...] = ()
    slow_delay: float = math.inf
    mean: float = 1.0
    seed: int = 0
    delays: tuple[float, ...] = ()

    def __post_init__(self):
        if self.model not in MODELS:
            raise PreconditionError(f"unknown straggler model {self.model!r}")
        object.__setattr__(self, "slow_set", tuple(int(i) for i in self.slow_set))
        object.__setattr__(self, "delays", tuple(float(d) for d in self.delays))
        if self.slow_delay < 0 or self.mean < 0 or any(d < 0 for d in self.delays):
            raise PreconditionError("delays must be nonnegative")

    def validate(self, N: int):
        if any(not 1 <= i <= N for i in self.slow_set):
            raise PreconditionError(f"slow servers {self.slow_set} outside [1, {N}]")
        if self.model == "deterministic_delays" and len(self.delays) != N:
            raise PreconditionError(f"expected {N} delays, got {len(self.delays)}")

    def completion_ticks(self, N: int) -> list[float]:
        self.validate(N)
        if self.model == "none":
            extra = [0.0] * N
        elif self.model == "fixed_slow_set":
            slow = set(self.slow_set)
            extra = [self.slow_delay if i in slow else 0.0 for i in range(1, N + 1)]
        elif self.model == "exponential":
            rng = np.random.Generator(np.random.PCG64(self.seed))
            extra = [float(d) for d in rng.exponential(self.mean, size=N)]
        else:
            extra = list(self.delays)
        return [BASE_TICKS + d for d in extra]

    @classmethod
    def from_mapping(cls, cfg: dict) -> "StragglerConfig":
        def ints(v):
            return tuple(int(s) for s in str(v).replace(",", " ").split()) if v != "" else ()

        def floats(v):
            return tuple(float(s) for s in str(v).replace(",", " ").split()) if v != "" else ()

        kwargs = {}
        for key, raw in cfg.items():
            key = key.strip().lower()
            if key == "model":
                kwargs["model"] = str(raw).strip()
            elif key in ("slow", "slow_set"):
                kwargs["slow_set"] = ints(raw)
            elif key == "slow_delay":
                kwargs["slow_delay"] = float(raw)
            elif key == "mean":
                kwargs["mean"] = float(raw)
            elif key == "seed":
                kwargs["seed"] = int(raw)
            elif key == "delays":
                kwargs["delays"] = floats(raw)
            else:
                raise PreconditionError(f"unknown straggler option {key!r}")
        return cls(**kwargs)

    @classmethod
    def parse(cls, text: str) -> "StragglerConfig":
        """Read ``key=value`` lines; blank lines and ``#`` comments are skipped."""
        cfg = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise PreconditionError(f"line {lineno}: expected key=value")
            key, value = line.split("=", 1)
            cfg[key.strip()] = value.strip()
        return cls.from_mapping(cfg)

    @classmethod
    def from_file(cls, path) -> "StragglerConfig":
        return cls.parse(Path(path).read_text())


@dataclass(frozen=True)
class SimReport:
    N: int
    ell: int
    partition: Partition
    Q: int
    responders_used: tuple[int, ...]
    completion_tick: float
    decoded_ok: bool
    stragglers_tolerated: int
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "N": self.N, "ell": self.ell,
            "partition": {"r_A": self.partition.r_A, "r_B": self.partition.r_B},
            "Q": self.Q, "responders_used": list(self.responders_used),
            "completion_tick": None if math.isinf(self.completion_tick) else self.completion_tick,
            "decoded_ok": self.decoded_ok,
            "stragglers_tolerated": self.stragglers_tolerated,
            "error": self.error,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def run_simulation(A: FieldMatrix, B: FieldMatrix, part: Partition, params: SchemeParams,
                   straggler: StragglerConfig = StragglerConfig(), seed: int = 0,
                   workers: int = 1, pad: bool = False) -> SimReport:
    """Encode, let servers finish on the simulated clock, decode from the first Q.

    Servers with infinite delay never answer. If fewer than Q answer, the
    report has ``decoded_ok=False`` and ``error="TooFewAnswers"``.
    """
    Q = part.Q(params.ell)
    shares = codec.encode(A, B, part, params, seed, pad=pad)
    ticks = straggler.completion_ticks(params.N)
    arrivals = sorted((t, s.server_index) for t, s in zip(ticks, shares) if math.isfinite(t))
    chosen = sorted(i for _, i in arrivals[:Q])
    base = dict(N=params.N, ell=params.ell, partition=part, Q=Q,
                stragglers_tolerated=params.N - Q)
    if len(arrivals) < Q:
        return SimReport(responders_used=tuple(chosen), completion_tick=math.inf,
                         decoded_ok=False, error=TooFewAnswers.__name__, **base)

    todo = [shares[i - 1] for i in chosen]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            answers = list(pool.map(codec.server_compute, todo))
    else:
        answers = [codec.server_compute(s) for s in todo]
    product = codec.decode(answers, part, params, A.rows, B.cols)
    ok = product == mat_mul(A, B)
    return SimReport(responders_used=tuple(chosen), completion_tick=arrivals[Q - 1][0],
                     decoded_ok=ok, error=None if ok else "DecodeMismatch", **base)


@dataclass
class ThresholdSummary:
    N: int
    ell: int
    R_th: str
    rate_optimal: Partition
    threshold_optimal: Partition
    Q_rate_optimal: int
    Q_threshold_optimal: int
    ticks_rate_optimal: list[float] = field(default_factory=list)
    ticks_threshold_optimal: list[float] = field(default_factory=list)
    all_decoded: bool = True

    @property
    def mean_tick_rate_optimal(self) -> float:
        return fmean(self.ticks_rate_optimal)

    @property
    def mean_tick_threshold_optimal(self) -> float:
        return fmean(self.ticks_threshold_optimal)

    def to_dict(self) -> dict:
        return {
            "N": self.N, "ell": self.ell, "R_th": self.R_th,
            "rate_optimal": {"r_A": self.rate_optimal.r_A, "r_B": self.rate_optimal.r_B,
                             "Q": self.Q_rate_optimal,
                             "mean_tick": self.mean_tick_rate_optimal},
            "threshold_optimal": {"r_A": self.threshold_optimal.r_A,
                                  "r_B": self.threshold_optimal.r_B,
                                  "Q": self.Q_threshold_optimal,
                                  "mean_tick": self.mean_tick_threshold_optimal},
            "trials": len(self.ticks_rate_optimal),
            "all_decoded": self.all_decoded,
        }


def threshold_experiment(N: int, ell: int, R_th, straggler: StragglerConfig, trials: int,
                         seed: int = 0, params: SchemeParams | None = None,
                         inner_dim: int = 1) -> ThresholdSummary:
    """Rate-optimal vs threshold-optimal partitions on shared delay draws.

    Each trial draws one delay vector from the straggler model and replays
    it against both partitions, so differences come from Q alone.
    """
    rate_opt = exhaustive_rate_opt(N, ell)
    thr_opt = exhaustive_threshold_opt(N, ell, R_th)
    p_rate = Partition(rate_opt.r_A, rate_opt.r_B)
    p_thr = Partition(thr_opt.r_A, thr_opt.r_B)
    params = params or SchemeParams(N, ell)
    m = math.lcm(p_rate.r_A, p_thr.r_A)
    p = math.lcm(p_rate.r_B, p_thr.r_B)

    summary = ThresholdSummary(N, ell, str(Fraction(R_th)), p_rate, p_thr,
                               rate_opt.Q, thr_opt.Q)
    seeds = np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint64)
    for s in seeds:
        delays = tuple(d - BASE_TICKS for d in
                       _trial_config(straggler, int(s)).completion_ticks(N))
        shared = StragglerConfig("deterministic_delays", delays=delays)
        rng = np.random.default_rng(int(s))
        A = FieldMatrix.random(m, inner_dim, params.prime, rng)
        B = FieldMatrix.random(inner_dim, p, params.prime, rng)
        for part, ticks in ((p_rate, summary.ticks_rate_optimal),
                            (p_thr, summary.ticks_threshold_optimal)):
            rep = run_simulation(A, B, part, params, shared, seed=int(s))
            summary.all_decoded &= rep.decoded_ok
            ticks.append(rep.completion_tick)
    return summary


def _trial_config(cfg: StragglerConfig, seed: int) -> StragglerConfig:
    if cfg.model != "exponential":
        return cfg
    return StragglerConfig("exponential", mean=cfg.mean, seed=seed)
