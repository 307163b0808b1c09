"""QUBO solvers: exhaustive enumeration, simulated annealing, and an HTTP
client for a remote annealer-style sampling service."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np
import requests
from numba import njit
from numpy.typing import NDArray

from .dataset import FeatureMask
from .qubo import QuboProblem, energy, expand_penalized

EXHAUSTIVE_MAX_BITS = 24
_ENUM_CHUNK = 1 << 16
_REJECT_LOG_CUTOFF = 40.0


class RemoteSamplerError(RuntimeError):
    """Base class for remote-sampler failures."""


class RemoteNetworkError(RemoteSamplerError):
    """Endpoint unreachable or the connection dropped."""


class RemoteTimeoutError(RemoteSamplerError):
    """No complete response within the deadline."""


class MalformedResponseError(RemoteSamplerError):
    """Response is not the documented wire shape."""


class EnergyMismatchError(RemoteSamplerError):
    """Remote-reported energies disagree with local recomputation."""


@dataclass(frozen=True)
class Sample:
    mask: FeatureMask
    energy: float
    occurrences: int = 1

    def __post_init__(self) -> None:
        if self.occurrences < 1:
            raise ValueError("occurrences must be positive")


@dataclass(frozen=True)
class SampleSet:
    """Samples in non-decreasing energy order plus read and timing counters."""

    samples: tuple[Sample, ...]
    shots: int
    solve_time_us: float
    wall_time_us: float
    info: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))
        energies = [s.energy for s in self.samples]
        if any(b < a for a, b in zip(energies, energies[1:])):
            raise ValueError("samples must be sorted by non-decreasing energy")


@dataclass(frozen=True)
class AnnealSchedule:
    sweeps: int = 1000
    beta_start: float = 0.1
    beta_end: float = 10.0
    interpolation: str = "geometric"

    def __post_init__(self) -> None:
        if self.sweeps < 1:
            raise ValueError("sweeps must be positive")
        if not 0.0 < self.beta_start < self.beta_end:
            raise ValueError("need 0 < beta_start < beta_end")
        if self.interpolation not in ("geometric", "linear"):
            raise ValueError("interpolation must be geometric or linear")

    def betas(self) -> NDArray[np.float64]:
        if self.sweeps == 1:
            return np.array([self.beta_start])
        if self.interpolation == "geometric":
            return np.geomspace(self.beta_start, self.beta_end, self.sweeps)
        return np.linspace(self.beta_start, self.beta_end, self.sweeps)


def _sorted_samples(samples: list[Sample]) -> tuple[Sample, ...]:
    return tuple(sorted(samples, key=lambda s: (s.energy, s.mask.k, s.mask.bits)))


def exhaustive_solve(problem: QuboProblem) -> SampleSet:
    """Enumerate all 2^M masks; return every global minimizer, with the
    runner-up energy stored under info["runner_up_energy"]."""
    wall0 = time.perf_counter()
    m = problem.size
    if m > EXHAUSTIVE_MAX_BITS:
        raise ValueError(
            f"exhaustive enumeration refused for M={m} > {EXHAUSTIVE_MAX_BITS}"
        )
    qu = problem.q.entries * problem.alpha
    bit_cols = np.arange(m, dtype=np.uint32)
    total = 1 << m

    best_energy = np.inf
    runner_up = np.inf
    best_codes: list[int] = []
    t0 = time.perf_counter()
    for start in range(0, total, _ENUM_CHUNK):
        codes = np.arange(start, min(start + _ENUM_CHUNK, total), dtype=np.uint32)
        bits = ((codes[:, None] >> bit_cols) & 1).astype(np.float64)
        e = np.einsum("ci,ci->c", bits @ qu, bits)
        e += problem.lam * (bits.sum(axis=1) - problem.k) ** 2
        lo = float(e.min())
        if lo < best_energy:
            runner_up = min(runner_up, best_energy)
            best_energy = lo
            best_codes = []
        if lo <= best_energy:
            best_codes.extend(codes[e == best_energy].tolist())
        above = e[e > best_energy]
        if above.size:
            runner_up = min(runner_up, float(above.min()))
    solve_us = (time.perf_counter() - t0) * 1e6

    samples = []
    for code in best_codes:
        bits = tuple(int((code >> j) & 1) for j in range(m))
        samples.append(Sample(FeatureMask(bits), best_energy, 1))
    return SampleSet(
        _sorted_samples(samples),
        shots=total,
        solve_time_us=solve_us,
        wall_time_us=(time.perf_counter() - wall0) * 1e6,
        info={"runner_up_energy": None if np.isinf(runner_up) else runner_up},
    )


# splitmix64 constants; the kernel draws its uniforms from this generator so
# shot streams depend only on the per-shot seed word
_SM64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM64_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM64_M2 = np.uint64(0x94D049BB133111EB)
_U53_INV = 1.0 / float(1 << 53)


@njit(cache=True)
def _anneal_shots(coupling, diag, betas, seeds, out):
    n_shots, m = out.shape
    sweeps = betas.shape[0]
    w = np.empty(m, dtype=np.int8)
    fields = np.empty(m, dtype=np.float32)
    for shot in range(n_shots):
        state = np.uint64(seeds[shot])
        for i in range(m):
            w[i] = 0
            fields[i] = diag[i]
        for i in range(m):
            state += _SM64_GAMMA
            z = state
            z = (z ^ (z >> np.uint64(30))) * _SM64_M1
            z = (z ^ (z >> np.uint64(27))) * _SM64_M2
            z = z ^ (z >> np.uint64(31))
            if z >> np.uint64(63):
                w[i] = 1
                for j in range(m):
                    fields[j] += coupling[i, j]
        for t in range(sweeps):
            beta = betas[t]
            for i in range(m):
                delta = -fields[i] if w[i] else fields[i]
                accept = delta <= 0.0
                if not accept:
                    cost = beta * delta
                    if cost <= _REJECT_LOG_CUTOFF:
                        state += _SM64_GAMMA
                        z = state
                        z = (z ^ (z >> np.uint64(30))) * _SM64_M1
                        z = (z ^ (z >> np.uint64(27))) * _SM64_M2
                        z = z ^ (z >> np.uint64(31))
                        u = float(z >> np.uint64(11)) * _U53_INV
                        accept = u < np.exp(-cost)
                if accept:
                    if w[i]:
                        w[i] = 0
                        for j in range(m):
                            fields[j] -= coupling[i, j]
                    else:
                        w[i] = 1
                        for j in range(m):
                            fields[j] += coupling[i, j]
        out[shot] = w
    return out


def simulated_anneal(
    problem: QuboProblem,
    shots: int,
    schedule: AnnealSchedule | None = None,
    seed: int = 0,
) -> SampleSet:
    """Metropolis single-bit-flip annealing, one independent restart per shot.

    Each shot draws its RNG stream from (seed, shot index), so results do not
    depend on execution order. Coefficients are normalized by the largest
    absolute expanded entry before sweeping; recorded energies are exact
    recomputations on the unnormalized problem.
    """
    wall0 = time.perf_counter()
    if shots < 1:
        raise ValueError("shots must be positive")
    if schedule is None:
        schedule = AnnealSchedule()
    m = problem.size
    expanded, _ = expand_penalized(problem)
    scale = float(np.max(np.abs(expanded.entries)))
    if scale == 0.0:
        scale = 1.0
    qn = expanded.entries / scale
    coupling = (qn + qn.T).astype(np.float32)
    np.fill_diagonal(coupling, 0.0)
    diag = np.ascontiguousarray(np.diag(qn)).astype(np.float32)
    betas = schedule.betas()
    seeds = np.random.SeedSequence(seed).generate_state(shots).astype(np.uint64)
    out = np.empty((shots, m), dtype=np.int8)

    t0 = time.perf_counter()
    _anneal_shots(np.ascontiguousarray(coupling), diag, betas, seeds, out)
    solve_us = (time.perf_counter() - t0) * 1e6

    uniq, counts = np.unique(out, axis=0, return_counts=True)
    bits_f = uniq.astype(np.float64)
    exact = np.einsum("ci,ci->c", bits_f @ (problem.alpha * problem.q.entries), bits_f)
    exact += problem.lam * (bits_f.sum(axis=1) - problem.k) ** 2
    samples = [
        Sample(FeatureMask(tuple(int(b) for b in row)), float(e), int(c))
        for row, e, c in zip(uniq, exact, counts)
    ]
    return SampleSet(
        _sorted_samples(samples),
        shots=shots,
        solve_time_us=solve_us,
        wall_time_us=(time.perf_counter() - wall0) * 1e6,
    )


def _wire_request(problem: QuboProblem, shots: int) -> dict:
    expanded, offset = expand_penalized(problem)
    q = expanded.entries
    m = problem.size
    linear = {str(i): float(q[i, i]) for i in range(m)}
    quadratic = {
        f"{i},{j}": float(q[i, j]) for i in range(m) for j in range(i + 1, m)
    }
    return {
        "linear": linear,
        "quadratic": quadratic,
        "num_reads": shots,
        "offset": offset,
    }


def _parse_wire_response(payload, m: int):
    if not isinstance(payload, dict):
        raise MalformedResponseError("response body is not a JSON object")
    for key in ("samples", "energies", "num_occurrences", "timing"):
        if key not in payload:
            raise MalformedResponseError(f"response missing field {key!r}")
    samples = payload["samples"]
    energies = payload["energies"]
    occurrences = payload["num_occurrences"]
    timing = payload["timing"]
    if not isinstance(timing, dict) or "qpu_access_time_us" not in timing:
        raise MalformedResponseError("response timing lacks qpu_access_time_us")
    if not (len(samples) == len(energies) == len(occurrences)) or not samples:
        raise MalformedResponseError("samples/energies/num_occurrences disagree")
    masks = []
    for row in samples:
        if len(row) != m or any(b not in (0, 1) for b in row):
            raise MalformedResponseError(f"sample row is not a length-{m} bit vector")
        masks.append(FeatureMask(tuple(int(b) for b in row)))
    occ = []
    for v in occurrences:
        if int(v) != v or int(v) < 1:
            raise MalformedResponseError("num_occurrences entries must be positive")
        occ.append(int(v))
    return masks, [float(e) for e in energies], occ, float(timing["qpu_access_time_us"])


def remote_sample(
    problem: QuboProblem,
    endpoint: str,
    shots: int,
    timeout_ms: int = 10_000,
) -> SampleSet:
    """POST the expanded problem to an annealer-style JSON service.

    Reported energies are never trusted: every one is recomputed locally and
    the whole response is rejected on relative disagreement above 1e-6.
    """
    wall0 = time.perf_counter()
    if shots < 1:
        raise ValueError("shots must be positive")
    if timeout_ms < 1:
        raise ValueError("timeout_ms must be positive")
    request = _wire_request(problem, shots)
    try:
        resp = requests.post(
            endpoint,
            json=request,
            timeout=timeout_ms / 1000.0,
            headers={"content-type": "application/json"},
        )
    except requests.exceptions.Timeout as exc:
        raise RemoteTimeoutError(f"no response within {timeout_ms} ms") from exc
    except requests.exceptions.RequestException as exc:
        raise RemoteNetworkError(f"cannot reach {endpoint}: {exc}") from exc
    if resp.status_code != 200:
        raise MalformedResponseError(f"endpoint returned HTTP {resp.status_code}")
    try:
        payload = resp.json()
    except (json.JSONDecodeError, ValueError) as exc:
        raise MalformedResponseError(f"response is not JSON: {exc}") from exc
    masks, energies, occurrences, qpu_us = _parse_wire_response(payload, problem.size)

    samples = []
    for mask, reported, occ in zip(masks, energies, occurrences):
        local = energy(problem, mask)
        if abs(reported - local) > 1e-6 * max(1.0, abs(local)):
            raise EnergyMismatchError(
                f"reported energy {reported} vs local {local} for mask {mask.bits}"
            )
        samples.append(Sample(mask, local, occ))
    return SampleSet(
        _sorted_samples(samples),
        shots=sum(occurrences),
        solve_time_us=qpu_us,
        wall_time_us=(time.perf_counter() - wall0) * 1e6,
    )


def best_mask(sample_set: SampleSet) -> FeatureMask:
    """Lowest energy wins; ties prefer smaller k then lexicographically
    smaller bits; an all-zero mask never beats a tied nonzero one."""
    if not sample_set.samples:
        raise ValueError("cannot pick a mask from an empty sample set")
    lowest = sample_set.samples[0].energy
    pool = [s.mask for s in sample_set.samples if s.energy == lowest]
    nonzero = [mk for mk in pool if mk.k > 0]
    if nonzero:
        pool = nonzero
    return min(pool, key=lambda mk: (mk.k, mk.bits))
