"""Null-model normalization of polarization scores.

For an observed graph, an ensemble of null graphs is sampled, each one
preprocessed, re-partitioned with the same partitioner, and scored with
the same parameters. A raw score is then reported against the
ensemble:

* denoised      raw - <null>
* standardized  (raw - <null>) / null std

Per-sample failures are excluded from the moments; a score whose
failure fraction exceeds ``max_error_fraction`` yields an errored
ensemble. Sampling is reproducible for a given root seed regardless of
worker count or which scores are requested.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import clone

from .graph import Graph, preprocess
from .nullmodels import NULL_KINDS, randomize
from .scores import SCORE_IDS, ScoreConfig, ScoreResult, score_all
from .validation import check_graph, spawn_seed

__all__ = [
    "NullEnsemble",
    "NormalizedScore",
    "null_ensemble",
    "null_ensembles",
    "denoise",
    "denoise_value",
]


@dataclass(frozen=True)
class NullEnsemble:
    """Moments of one score over a null-model ensemble."""

    score_id: str
    null_kind: str
    n_samples: int  # requested
    values: np.ndarray  # per valid sample
    n_errors: int
    mean: float
    std: float  # population std, sqrt(<v^2> - <v>^2)
    stderr: float
    params: dict = field(default_factory=dict)
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "score_id": self.score_id,
            "null_kind": self.null_kind,
            "n_samples": self.n_samples,
            "n_valid": int(self.values.size),
            "n_errors": self.n_errors,
            "mean": None if self.error else self.mean,
            "std": None if self.error else self.std,
            "stderr": None if self.error else self.stderr,
            "error": self.error,
        }


@dataclass(frozen=True)
class NormalizedScore:
    """Raw score next to its denoised and standardized versions."""

    score_id: str
    raw: float
    denoised: float
    standardized: float | None
    flags: tuple[str, ...] = ()


def _reseed(partitioner, seed: int):
    est = clone(partitioner)
    updates = {
        name: int(seed)
        for name in est.get_params(deep=True)
        if name == "random_state" or name.endswith("__random_state")
    }
    if updates:
        est.set_params(**updates)
    return est


def _one_sample(
    g: Graph,
    partitioner,
    config: ScoreConfig,
    score_ids,
    null_kind: str,
    seed_sample: int,
    seed_partition: int,
) -> list[ScoreResult]:
    try:
        null = preprocess(randomize(g, null_kind, seed_sample))
        labels = _reseed(partitioner, seed_partition).fit(null).labels_
    except Exception as exc:  # noqa: BLE001 - sample failure, not a bug trap
        msg = str(exc)
        return [ScoreResult(sid, None, error=msg) for sid in score_ids]
    return score_all(null, labels, config, score_ids)


def null_ensembles(
    g: Graph,
    partitioner,
    *,
    score_ids=SCORE_IDS,
    config: ScoreConfig | None = None,
    null_kind: str = "d1",
    n_samples: int = 500,
    random_state: int = 0,
    n_jobs: int = 1,
    max_error_fraction: float = 0.1,
    strict: bool = True,
) -> dict[str, NullEnsemble]:
    """Sample the null ensemble once and aggregate every requested score.

    Sample i is driven by seeds derived from ``(random_state, i)``
    alone, so adding or removing scores, or changing ``n_jobs``, never
    changes the sampled graphs or partitions. With ``strict`` (the
    default), a score whose failure fraction exceeds
    ``max_error_fraction`` raises; otherwise its ensemble carries the
    error.
    """
    check_graph(g, min_nodes=2)
    if null_kind not in NULL_KINDS:
        raise ValueError(f"unknown null kind {null_kind!r}; expected one of {NULL_KINDS}")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    cfg = config if config is not None else ScoreConfig()
    seeds = [
        (spawn_seed(random_state, i, 0), spawn_seed(random_state, i, 1))
        for i in range(n_samples)
    ]
    if n_jobs == 1:
        per_sample = [
            _one_sample(g, partitioner, cfg, score_ids, null_kind, s0, s1)
            for s0, s1 in seeds
        ]
    else:
        per_sample = Parallel(n_jobs=n_jobs)(
            delayed(_one_sample)(g, partitioner, cfg, score_ids, null_kind, s0, s1)
            for s0, s1 in seeds
        )

    out: dict[str, NullEnsemble] = {}
    failures = []
    for idx, sid in enumerate(score_ids):
        values = []
        first_error = None
        for results in per_sample:
            res = results[idx]
            if res.error is None and res.value is not None:
                values.append(res.value)
            elif first_error is None:
                first_error = res.error
        n_err = n_samples - len(values)
        arr = np.asarray(values, dtype=np.float64)
        if n_err > max_error_fraction * n_samples:
            out[sid] = NullEnsemble(
                score_id=sid,
                null_kind=null_kind,
                n_samples=n_samples,
                values=arr,
                n_errors=n_err,
                mean=math.nan,
                std=math.nan,
                stderr=math.nan,
                params=asdict(cfg),
                error=(
                    f"{n_err}/{n_samples} null samples failed "
                    f"(first error: {first_error})"
                ),
            )
            failures.append(sid)
            continue
        mean = math.fsum(arr) / arr.size
        second = math.fsum(v * v for v in arr) / arr.size
        var = max(0.0, second - mean * mean)
        std = math.sqrt(var)
        out[sid] = NullEnsemble(
            score_id=sid,
            null_kind=null_kind,
            n_samples=n_samples,
            values=arr,
            n_errors=n_err,
            mean=mean,
            std=std,
            stderr=std / math.sqrt(arr.size),
            params=asdict(cfg),
        )
    if strict and failures:
        raise RuntimeError(
            "null ensemble failed for "
            + ", ".join(failures)
            + f": {out[failures[0]].error}"
        )
    return out


def null_ensemble(
    g: Graph,
    partitioner,
    score_id: str,
    **kwargs,
) -> NullEnsemble:
    """Single-score convenience wrapper over :func:`null_ensembles`."""
    if score_id not in SCORE_IDS:
        raise ValueError(f"unknown score id {score_id!r}")
    return null_ensembles(g, partitioner, score_ids=(score_id,), **kwargs)[score_id]


def denoise_value(raw, ensemble: NullEnsemble) -> NormalizedScore:
    """Normalize a raw score against an already-sampled ensemble."""
    if ensemble.error is not None:
        raise RuntimeError(f"ensemble for {ensemble.score_id} errored: {ensemble.error}")
    if isinstance(raw, ScoreResult):
        if raw.error is not None or raw.value is None:
            raise RuntimeError(f"raw {raw.score_id} errored: {raw.error}")
        raw_value = raw.value
        flags = raw.flags
    else:
        raw_value = float(raw)
        flags = ()
    denoised = raw_value - ensemble.mean
    if ensemble.std == 0.0:
        return NormalizedScore(
            ensemble.score_id,
            raw_value,
            denoised,
            None,
            flags + ("zero_variance_null",),
        )
    return NormalizedScore(
        ensemble.score_id, raw_value, denoised, denoised / ensemble.std, flags
    )


def denoise(
    g: Graph,
    labels,
    ensemble: NullEnsemble,
    config: ScoreConfig | None = None,
) -> NormalizedScore:
    """Score the observed partition and normalize it against a null.

    ``config=None`` reuses the configuration the ensemble was sampled
    with, keeping raw and null scores comparable.
    """
    if config is None:
        config = ScoreConfig(**ensemble.params)
    raw = score_all(g, labels, config, (ensemble.score_id,))[0]
    return denoise_value(raw, ensemble)
