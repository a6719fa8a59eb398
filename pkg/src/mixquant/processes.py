"""Stationary sequence generators with known marginals and mixing profiles.

Three generator families are shipped, chosen because each admits an exact
marginal F and exactly computable (or exactly bounded) mixing coefficients:

  * i.i.d. draws through the inverse CDF (phi identically zero);
  * moving-average blocks, value_i = mean of (m+1) consecutive uniforms,
    whose marginal is the mean-of-(m+1)-uniforms law and whose coefficients
    vanish exactly beyond lag m (lags 1..m use the universal bound phi <= 1);
  * the copula construction over a uniform-stationary finite chain,
    U_i = (S_i + V_i) / K with V_i independent uniforms, so each emitted
    value has exact marginal F while the chain drives geometric mixing.

Reproducibility contract: paths are pure functions of (spec, seed, n). The
generator is numpy's counter-based Philox (4x64-10), keyed through
SeedSequence(seed); derived streams use SeedSequence entropy tuples, so any
parallel schedule sees identical per-replication randomness.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .errors import DataError, SpecError
from .marginals import MarginalModel, bates, marginal_from_config
from .mixing import MixingProfile, as_upper_bound, phi_markov, uniform_bound_profile, zero_profile

__all__ = [
    "SamplePath",
    "ProcessSpec",
    "iid_spec",
    "m_dependent_spec",
    "markov_copula_spec",
    "two_state_transition",
    "gen_iid",
    "gen_m_dependent",
    "gen_markov_copula",
    "generate",
    "derive_seed",
    "make_rng",
    "spec_to_config",
    "spec_from_config",
    "save_spec",
    "load_spec",
    "path_to_csv",
    "path_from_csv",
]


# ---------------------------------------------------------------------------
# RNG plumbing
# ---------------------------------------------------------------------------

def make_rng(seed: int) -> np.random.Generator:
    """Philox (counter-based) generator keyed via SeedSequence(seed)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def derive_seed(master_seed: int, *components: int) -> int:
    """Deterministic 64-bit child seed from a master seed and integer labels."""
    ss = np.random.SeedSequence(entropy=(int(master_seed),) + tuple(int(c) for c in components))
    return int(ss.generate_state(1, np.uint64)[0])


def float_key(x: float) -> int:
    """Stable integer label for a float (its IEEE-754 bit pattern)."""
    return int(np.float64(x).view(np.uint64))


def _open_uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    # random() is uniform on the 2^-53 lattice of [0, 1); the half-step shift
    # keeps the lattice uniform while excluding both endpoints, so inverse
    # CDFs with infinite support never see 0 or 1.
    return rng.random(size) + 2.0 ** -54


# ---------------------------------------------------------------------------
# Sample paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplePath:
    """One simulated realization with its seed lineage."""

    values: np.ndarray = field(compare=False)
    seed: int
    spec_id: str
    n: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.size != self.n:
            raise ValueError(f"values must be 1-d of length n={self.n}, got shape {v.shape}")


# ---------------------------------------------------------------------------
# Process specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProcessSpec:
    """A generator plus its marginal law and mixing profile."""

    kind: str  # "iid" | "m_dependent" | "markov_copula"
    marginal: MarginalModel
    mixing: MixingProfile
    m: int | None = None
    transition: tuple[tuple[float, ...], ...] | None = None
    spec_id: str = ""


def iid_spec(marginal: MarginalModel) -> ProcessSpec:
    return ProcessSpec(
        kind="iid",
        marginal=marginal,
        mixing=zero_profile(),
        spec_id=f"iid-{marginal.name}",
    )


def m_dependent_spec(m: int) -> ProcessSpec:
    """Moving-average blocks of (m+1) uniforms; marginal fixed by the construction."""
    if m < 1:
        raise ValueError("m must be >= 1 (use iid_spec for independence)")
    return ProcessSpec(
        kind="m_dependent",
        marginal=bates(m + 1),
        mixing=uniform_bound_profile(m),
        m=m,
        spec_id=f"mdep{m}-bates{m + 1}",
    )


def markov_copula_spec(transition, marginal: MarginalModel) -> ProcessSpec:
    P = np.asarray(transition, dtype=float)
    latent = phi_markov(P)  # validates the chain as a side effect
    tag = hashlib.sha1(
        json.dumps([[f"{x:.17g}" for x in row] for row in P.tolist()]).encode()
    ).hexdigest()[:8]
    k = P.shape[0]
    if k == 2:
        tag = f"a{P[0][1]:g}"
    return ProcessSpec(
        kind="markov_copula",
        marginal=marginal,
        # values are a fixed function of (chain state, independent uniform), so
        # their sigma-fields are coarser and the latent coefficients dominate
        mixing=as_upper_bound(latent),
        transition=tuple(tuple(float(x) for x in row) for row in P),
        spec_id=f"markov{k}-{tag}-{marginal.name}",
    )


def two_state_transition(a: float) -> list[list[float]]:
    """Symmetric two-state switch matrix; the only uniform-stationary 2-state shape."""
    if not 0.0 < a <= 1.0:
        raise ValueError("switch probability must lie in (0, 1]")
    return [[1.0 - a, a], [a, 1.0 - a]]


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def gen_iid(marginal: MarginalModel, n: int, seed: int) -> SamplePath:
    """Independent draws: inverse CDF applied to independent uniforms."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = make_rng(seed)
    values = marginal.inv_cdf(_open_uniform(rng, n))
    return SamplePath(values=values, seed=seed, spec_id=f"iid-{marginal.name}", n=n)


def gen_m_dependent(m: int, n: int, seed: int) -> SamplePath:
    """Sliding means of (m+1) consecutive uniforms; windows more than m apart
    share no underlying uniforms and are therefore independent."""
    if m < 1:
        raise ValueError("m must be >= 1 (use gen_iid for independence)")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = make_rng(seed)
    u = _open_uniform(rng, n + m)
    values = np.lib.stride_tricks.sliding_window_view(u, m + 1).sum(axis=1) / (m + 1)
    return SamplePath(values=values, seed=seed, spec_id=f"mdep{m}-bates{m + 1}", n=n)


def gen_markov_copula(K: int, transition, marginal: MarginalModel, n: int, seed: int) -> SamplePath:
    """Copula chain: latent uniform-stationary chain S, emitted value
    inv_cdf((S_i + V_i)/K) with V_i independent uniforms."""
    P = np.asarray(transition, dtype=float)
    if P.shape != (K, K):
        raise SpecError(f"transition shape {P.shape} does not match K={K}")
    spec = markov_copula_spec(P, marginal)  # validates
    return _gen_markov(spec, n, seed)


def _gen_markov(spec: ProcessSpec, n: int, seed: int) -> SamplePath:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    P = np.asarray(spec.transition, dtype=float)
    k = P.shape[0]
    rng = make_rng(seed)
    states = _simulate_chain(P, n, rng)
    v = _open_uniform(rng, n)
    u = (states + v) / k
    values = spec.marginal.inv_cdf(u)
    return SamplePath(values=values, seed=seed, spec_id=spec.spec_id, n=n)


def _simulate_chain(P: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Stationary start (exact uniform draw, no burn-in), then n-1 transitions."""
    k = P.shape[0]
    s0 = int(rng.integers(0, k))
    if n == 1:
        return np.array([s0], dtype=np.int64)
    u = rng.random(n - 1)
    if k == 2:
        # uniform-stationary 2-state chains are symmetric, so the switch
        # probability is state-independent and the path is a cumulative parity
        flips = (u < P[0, 1]).astype(np.int64)
        out = np.empty(n, dtype=np.int64)
        out[0] = s0
        np.cumsum(flips, out=out[1:])
        out[1:] = (out[1:] + s0) % 2
        return out
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0  # guard row-sum rounding so searchsorted stays in range
    out = np.empty(n, dtype=np.int64)
    out[0] = s0
    s = s0
    for i in range(1, n):  # K >= 3 chains are used at small n; keep it simple
        s = int(np.searchsorted(cum[s], u[i - 1], side="left"))
        out[i] = s
    return out


def generate(spec: ProcessSpec, n: int, seed: int) -> SamplePath:
    if spec.kind == "iid":
        return gen_iid(spec.marginal, n, seed)
    if spec.kind == "m_dependent":
        return gen_m_dependent(spec.m, n, seed)
    if spec.kind == "markov_copula":
        return _gen_markov(spec, n, seed)
    raise SpecError(f"unknown generator kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# Config round-trips and CSV export
# ---------------------------------------------------------------------------

def spec_to_config(spec: ProcessSpec, seed: int | None = None) -> dict:
    cfg: dict = {"generator": spec.kind, "marginal": spec.marginal.name,
                 "marginal_params": dict(spec.marginal.params)}
    if spec.kind == "m_dependent":
        cfg["m"] = spec.m
        del cfg["marginal_params"]  # marginal is fixed by m
        del cfg["marginal"]
    if spec.kind == "markov_copula":
        cfg["transition"] = [list(row) for row in spec.transition]
    if seed is not None:
        cfg["seed"] = int(seed)
    return cfg


def spec_from_config(cfg: dict) -> ProcessSpec:
    kind = cfg.get("generator")
    if kind == "iid":
        return iid_spec(_marginal_from_cfg(cfg))
    if kind == "m_dependent":
        return m_dependent_spec(int(cfg["m"]))
    if kind == "markov_copula":
        if "transition" in cfg:
            transition = cfg["transition"]
        elif "switch_prob" in cfg:
            transition = two_state_transition(float(cfg["switch_prob"]))
        else:
            raise SpecError("markov_copula config needs 'transition' or 'switch_prob'")
        return markov_copula_spec(transition, _marginal_from_cfg(cfg))
    raise SpecError(f"unknown generator {kind!r} in config")


def _marginal_from_cfg(cfg: dict) -> MarginalModel:
    name = cfg.get("marginal", "uniform")
    return marginal_from_config(name, cfg.get("marginal_params"))


def save_spec(spec: ProcessSpec, path, seed: int | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(spec_to_config(spec, seed), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_spec(path) -> tuple[ProcessSpec, int | None]:
    with open(path) as fh:
        cfg = json.load(fh)
    return spec_from_config(cfg), cfg.get("seed")


def path_to_csv(path_obj: SamplePath, fh: IO[str]) -> None:
    fh.write(f"# spec_id={path_obj.spec_id}\n")
    fh.write(f"# seed={path_obj.seed}\n")
    fh.write(f"# n={path_obj.n}\n")
    fh.write("value\n")
    for v in path_obj.values:
        fh.write(f"{v:.17g}\n")


def path_from_csv(fh: IO[str]) -> SamplePath:
    meta: dict[str, str] = {}
    values: list[float] = []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key.strip()] = val.strip()
        elif line != "value":
            values.append(float(line))
    if not values:
        raise DataError("no values found in CSV")
    arr = np.asarray(values, dtype=float)
    return SamplePath(
        values=arr,
        seed=int(meta.get("seed", 0)),
        spec_id=meta.get("spec_id", "unknown"),
        n=arr.size,
    )
