"""Seeded ensemble experiments over random covers and random cubic graphs.

Every sample is reproducible on its own from ``(master_seed, n, sample_index)``.
Runs persist as ``records.jsonl`` (one record per line, written in sample
order), ``summary.csv`` and ``manifest.json``; a rerun with the same config
resumes after the last complete record and produces the same bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from . import bm as bm_model
from .constants import PrecisionPolicy, constant_E, euler_gamma, log_glaisher, zeta_prime_minus1
from .cover import connected_probability, exact_sampling_available, lift_spectrum, sample_hom, sunada_diagnostic
from .determinant import DetParams, log_det
from .errors import DomainError
from .fuchsian import catalog, enumerate_primitives
from .spectrum import count_with_iterates

SCHEMA_VERSION = 1
ETA_PROVENANCE = "assumed: motivated by the asymptotically almost sure uniform spectral gap for random covers; not certified"
MODELS = ("cover", "bm")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "cover"
    base_name: str = "bolza"
    n_grid: tuple[int, ...] = (1, 3, 5)
    L: float = 8.0
    R: float = 40.0
    eta: float = 0.2
    num_samples: int = 30
    master_seed: int = 0
    epsilon: float = 0.05
    alpha: float = 0.5
    C: float = 10.0
    in_band_threshold: float = 0.8  # frozen after the pilot run
    max_attempts_factor: int = 20

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if self.model not in MODELS:
            raise DomainError(f"model must be one of {MODELS}")
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if self.num_samples < 1:
            raise DomainError("num_samples must be >= 1")
        if any(n < 1 for n in self.n_grid):
            raise DomainError("every n must be >= 1")
        if not self.L > 0 or not self.R > 1 or not self.eta > 0:
            raise DomainError("need L > 0, R > 1 and eta > 0")
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")

    def to_json(self) -> dict:
        d = asdict(self)
        d["n_grid"] = list(self.n_grid)
        return d

    @classmethod
    def from_json(cls, d: dict) -> ExperimentConfig:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()


@dataclass(frozen=True)
class ExperimentRecord:
    sample_index: int
    seed: int
    n: int
    connected: bool
    sampler_tag: str
    eta: float
    log_det: float | None = None
    error: float | None = None
    normalized: float | None = None
    normalized_error: float | None = None
    in_band: bool | None = None
    h2_holds: bool | None = None
    n_of_L: int | None = None
    budget: dict | None = None
    warnings: tuple[str, ...] = ()
    status: str = "ok"

    def to_json(self) -> dict:
        d = asdict(self)
        d["warnings"] = list(self.warnings)
        return d

    @classmethod
    def from_json(cls, d: dict) -> ExperimentRecord:
        d = dict(d)
        d["warnings"] = tuple(d.get("warnings", ()))
        return cls(**d)


def sample_seed(master_seed: int, n: int, sample_index: int) -> int:
    return int(np.random.SeedSequence([master_seed, n, sample_index]).generate_state(1)[0])


@lru_cache(maxsize=8)
def _base_spectrum(base_name: str, L: float):
    return enumerate_primitives(catalog(base_name), L)


def in_band(normalized: float, normalized_error: float, E: float, epsilon: float) -> bool:
    return normalized - normalized_error <= E + epsilon and normalized + normalized_error >= E - epsilon


def _constant_E() -> float:
    return constant_E(PrecisionPolicy(1e-10))


def _det_record(config: ExperimentConfig, n: int, index: int, seed: int) -> ExperimentRecord:
    base = catalog(config.base_name)
    hom = sample_hom(base, n, seed)
    if not hom.connected():
        return ExperimentRecord(index, seed, n, False, hom.sampler_tag, config.eta, status="disconnected")
    try:
        s = _base_spectrum(config.base_name, config.L)
        cover = lift_spectrum(s, hom, config.L).spectrum
        V = n * base.volume
        res = log_det(cover, V, DetParams(L=config.L, R=config.R, eta=config.eta))
        norm, nerr = res.value / V, res.error / V
        N = count_with_iterates(cover, config.L)
        return ExperimentRecord(
            index, seed, n, True, hom.sampler_tag, config.eta,
            log_det=res.value, error=res.error, normalized=norm, normalized_error=nerr,
            in_band=in_band(norm, nerr, _constant_E(), config.epsilon),
            h2_holds=N <= config.C * V**config.alpha, n_of_L=N,
            budget=dict(res.budget), warnings=res.warnings,
        )
    except DomainError as exc:
        return ExperimentRecord(index, seed, n, True, hom.sampler_tag, config.eta, status=f"error: {exc}")


def _det_job(args) -> ExperimentRecord:
    config, n, index, seed = args
    return _det_record(config, n, index, seed)


def _connected(config: ExperimentConfig, n: int, seed: int) -> tuple[bool, str]:
    hom = sample_hom(catalog(config.base_name), n, seed)
    return hom.connected(), hom.sampler_tag


def _plan(config: ExperimentConfig, n: int, done: int = 0) -> list[tuple[int, int]]:
    """Sample indices (and seeds) to run for one n: attempts until enough connected covers."""
    plan, connected = [], 0
    for index in range(config.num_samples * config.max_attempts_factor):
        seed = sample_seed(config.master_seed, n, index)
        ok, _ = _connected(config, n, seed)
        plan.append((index, seed))
        connected += ok
        if connected == config.num_samples:
            break
    return plan[done:]


def iter_concentration(config: ExperimentConfig, workers: int = 1, skip: dict | None = None):
    """Records in (n, sample_index) order; ``skip[n]`` records per n already exist."""
    if config.model != "cover":
        raise DomainError("determinant experiments need the cover model")
    skip = skip or {}
    _base_spectrum(config.base_name, config.L)
    for n in config.n_grid:
        jobs = [(config, n, i, s) for i, s in _plan(config, n, skip.get(n, 0))]
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                yield from pool.map(_det_job, jobs)
        else:
            for job in jobs:
                yield _det_job(job)


def run_concentration(config: ExperimentConfig, workers: int = 1) -> list[ExperimentRecord]:
    return list(iter_concentration(config, workers))


def concentration_summary(records, config: ExperimentConfig) -> list[dict]:
    """Per-n rows; a pure function of the record list."""
    E = _constant_E()
    rows = []
    for n in config.n_grid:
        rs = [r for r in records if r.n == n]
        ok = [r for r in rs if r.status == "ok" and r.connected]
        vals = [r.normalized for r in ok]
        med = statistics.median(vals) if vals else math.nan
        rows.append({
            "n": n,
            "attempts": len(rs),
            "connected": sum(r.connected for r in rs),
            "determinants": len(ok),
            "median_normalized": med,
            "distance_to_E": abs(med - E) if vals else math.nan,
            "median_normalized_error": statistics.median(r.normalized_error for r in ok) if ok else math.nan,
            "in_band_fraction": sum(r.in_band for r in ok) / len(ok) if ok else math.nan,
            "h2_frequency": sum(r.h2_holds for r in ok) / len(ok) if ok else math.nan,
        })
    return rows


def median_trend_toward(rows: list[dict], target: float) -> bool:
    """Whether |median - target| is nonincreasing along the n grid."""
    d = [abs(r["median_normalized"] - target) for r in rows]
    return all(b <= a for a, b in zip(d, d[1:]))


# ----------------------------------------------------------------------------
# hypothesis frequencies
# ----------------------------------------------------------------------------


def run_hypothesis_report(config: ExperimentConfig) -> list[dict]:
    """Per n: frequency of the counting hypothesis, plus connectivity data for covers."""
    rows = []
    if not config.n_grid:
        return rows
    if config.model == "cover":
        base = catalog(config.base_name)
        s = _base_spectrum(config.base_name, config.L)
        for n in config.n_grid:
            h2 = conn = 0
            factors, diams = [], []
            tag = ""
            V = n * base.volume
            for i in range(config.num_samples):
                hom = sample_hom(base, n, sample_seed(config.master_seed, n, i))
                tag = hom.sampler_tag
                cover = lift_spectrum(s, hom, config.L).spectrum
                h2 += count_with_iterates(cover, config.L) <= config.C * V**config.alpha
                if hom.connected():
                    conn += 1
                    d = sunada_diagnostic(hom)
                    factors.append(d.factor)
                    diams.append(d.diameter)
            rows.append({
                "n": n,
                "samples": config.num_samples,
                "sampler_tag": tag,
                "h2_frequency": h2 / config.num_samples,
                "connected_frequency": conn / config.num_samples,
                "connected_probability_exact": float(connected_probability(base.genus, n)) if exact_sampling_available(base, n) else None,
                "sunada_factor": factors[0] if factors else None,
                "mean_schreier_diameter": statistics.fmean(diams) if diams else None,
                "eta": config.eta,
                "eta_provenance": ETA_PROVENANCE,
            })
    else:
        for n in config.n_grid:
            h2 = 0
            for i in range(config.num_samples):
                g = bm_model.sample_graph(n, sample_seed(config.master_seed, n, i))
                h2 += bm_model.n_of_L(g, config.L) <= config.C * (2 * math.pi * n) ** config.alpha
            rows.append({"n": n, "samples": config.num_samples, "h2_frequency": h2 / config.num_samples})
    return rows


# ----------------------------------------------------------------------------
# persistence
# ----------------------------------------------------------------------------


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=True)


def manifest(config: ExperimentConfig) -> dict:
    pol = PrecisionPolicy(1e-10)
    return {
        "schema_version": SCHEMA_VERSION,
        "code_version": __version__,
        "config": config.to_json(),
        "config_hash": config.digest(),
        "constants": {
            "E": constant_E(pol),
            "euler_gamma": euler_gamma(pol),
            "zeta_prime_minus1": zeta_prime_minus1(pol),
            "log_A": log_glaisher(pol),
        },
        "in_band_threshold": config.in_band_threshold,
        "eta_provenance": ETA_PROVENANCE,
    }


def _read_records(path: Path) -> list[ExperimentRecord]:
    out = []
    if not path.exists():
        return out
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    lines = text.split("\n")
    complete = lines[:-1] if not text.endswith("\n") else lines
    for line in complete:
        if line:
            out.append(ExperimentRecord.from_json(json.loads(line)))
    if not text.endswith("\n") and text:
        # drop a torn last line left by an interrupted run
        with open(path, "w", encoding="utf-8") as fh:
            fh.writelines(_dumps(r.to_json()) + "\n" for r in out)
    return out


def summary_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def run_experiment(config: ExperimentConfig, out_dir, workers: int = 1) -> list[dict]:
    """Run (or resume) a concentration experiment, writing its three output files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    man_path = out / "manifest.json"
    rec_path = out / "records.jsonl"
    man = manifest(config)
    if man_path.exists():
        old = json.loads(man_path.read_text(encoding="utf-8"))
        if old.get("config_hash") != man["config_hash"]:
            raise DomainError(f"{out} holds a run with a different config")
    man_path.write_text(_dumps(man) + "\n", encoding="utf-8")
    existing = _read_records(rec_path)
    valid = [r for n in config.n_grid for r in existing if r.n == n]
    skip = {n: sum(1 for r in valid if r.n == n) for n in config.n_grid}
    # records must form a prefix in n-grid order to append safely
    order = [r.n for r in valid]
    if order != sorted(order, key=config.n_grid.index) or len(valid) != len(existing):
        raise DomainError(f"{rec_path} does not match this config")
    records = list(valid)
    with open(rec_path, "a", encoding="utf-8") as fh:
        for r in iter_concentration(config, workers, skip):
            fh.write(_dumps(r.to_json()) + "\n")
            fh.flush()
            records.append(r)
    rows = concentration_summary(records, config)
    (out / "summary.csv").write_text(summary_csv(rows), encoding="utf-8")
    return rows


def load_records(out_dir) -> list[ExperimentRecord]:
    return _read_records(Path(out_dir) / "records.jsonl")
