"""Evaluate named bounds over channel grids."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._mc import default_workers
from .channels import ChannelModel, pairwise_error
from .codebook import DistanceSpectrum, LinearCode
from .errors import ConfigError
from .gallager import bhattacharyya_bound, ds2_bound, gallager65_bound, optimize_bound
from .geometric import sphere_bound, tsb_quadrature, union_bound
from .results import BoundCurve, BoundResult
from .union_lower import decaen_ml_bound, ml_lower_bound

UPPER_BOUNDS = ("union", "bhattacharyya", "gallager65", "ds2", "sphere", "sphere-shifted", "tsb")
LOWER_BOUNDS = ("decaen", "cohen-merhav")
GEOMETRIC = ("sphere", "sphere-shifted", "tsb")


def truncation_tail(spectrum: DistanceSpectrum, channel: ChannelModel) -> float | None:
    """Union-bound mass of the weights a truncated spectrum dropped.

    0 for a complete spectrum; the union sum over the extra entries the
    producer kept beyond d_max when available, else the producer's own
    estimate, else None.
    """
    if spectrum.d_max is None or spectrum.d_max >= spectrum.n:
        return 0.0
    tail = spectrum.metadata.get("tail_counts")
    if tail and tail.get("counts"):
        counts = np.asarray(tail["counts"], dtype=np.float64)
        d = tail["first_d"] + np.arange(counts.size)
        keep = counts > 0
        if not np.any(keep):
            return 0.0
        return float(np.sum(counts[keep] * np.asarray(pairwise_error(channel, d[keep]), dtype=np.float64)))
    return spectrum.tail_estimate


def check_bound(name: str, channel: ChannelModel, lower: bool = False) -> None:
    names = LOWER_BOUNDS if lower else UPPER_BOUNDS
    if name not in names:
        raise ConfigError(f"unknown bound {name!r}; choose from {', '.join(names)}")
    if (lower or name in GEOMETRIC) and channel.kind != "biawgn":
        raise ConfigError(f"bound {name!r} is only implemented for the BIAWGN channel")


def evaluate_upper(name: str, spectrum: DistanceSpectrum, channel: ChannelModel, code: LinearCode | None = None,
                   starts: int = 5, seed: int = 0) -> BoundResult:
    """One upper bound at one channel point, with its parameters optimized."""
    check_bound(name, channel)
    if name == "union":
        res = union_bound(spectrum, channel)
    elif name == "bhattacharyya":
        res = bhattacharyya_bound(spectrum, channel)
    elif name == "ds2":
        res = optimize_bound(ds2_bound, spectrum, channel, starts=starts, seed=seed)[1]
    elif name == "gallager65":
        if code is not None and channel.kind == "bsc":
            res = optimize_bound(gallager65_bound, code, channel, family="uniform", starts=starts, seed=seed)[1]
        else:
            res = optimize_bound(gallager65_bound, spectrum, channel, family="uniform", starts=starts, seed=seed,
                                 fixed={"rho": 1.0})[1]
    elif name == "tsb":
        res = tsb_quadrature(spectrum, channel)
    else:
        res = sphere_bound(spectrum, channel, shifted=name == "sphere-shifted")
    res.name = name
    tail = truncation_tail(spectrum, channel)
    res.metadata["truncation_tail"] = tail
    if tail and res.raw > 0:
        res.metadata["truncation_tail_ratio"] = tail / res.raw
    return res


def evaluate_lower(name: str, code: LinearCode, channel: ChannelModel) -> BoundResult:
    check_bound(name, channel, lower=True)
    if name == "decaen":
        return decaen_ml_bound(code, channel)
    return ml_lower_bound(code, channel)


def _map(fn, items, workers):
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def upper_curve(name: str, spectrum: DistanceSpectrum, channels, code: LinearCode | None = None,
                workers: int | None = None, **opts) -> BoundCurve:
    """Bound over a list of channels, evaluated by a worker pool and returned in grid order."""
    channels = list(channels)
    for ch in channels:
        check_bound(name, ch)
    results = _map(lambda ch: evaluate_upper(name, spectrum, ch, code, **opts), channels, workers)
    grid = [ch.ebno_db if ch.kind == "biawgn" else ch.p for ch in channels]
    return BoundCurve.from_results(name, grid, results, dict(spectrum.metadata))


def lower_curve(name: str, code: LinearCode, channels, workers: int | None = None) -> BoundCurve:
    channels = list(channels)
    for ch in channels:
        check_bound(name, ch, lower=True)
    results = _map(lambda ch: evaluate_lower(name, code, ch), channels, workers)
    return BoundCurve.from_results(name, [ch.ebno_db for ch in channels], results)


def ebno_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid start, start + step, ..., stop (rounded to kill float drift)."""
    if not step > 0 or not math.isfinite(step):
        raise ConfigError("grid step must be positive")
    if stop < start:
        raise ConfigError("grid stop must be >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]
