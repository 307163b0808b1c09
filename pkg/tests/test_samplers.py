import itertools

import numpy as np
import pytest

from qubofs import (
    EXHAUSTIVE_MAX_BITS,
    AnnealSchedule,
    EnergyMismatchError,
    FeatureMask,
    MalformedResponseError,
    QuboMatrix,
    QuboProblem,
    RemoteNetworkError,
    RemoteTimeoutError,
    Sample,
    SampleSet,
    best_mask,
    energy,
    exhaustive_solve,
    remote_sample,
    simulated_anneal,
)
from qubofs.samplers import _parse_wire_response, _wire_request
from qubofs.stub_server import StubServer

WORKED_Q = np.array([[-0.8, 0.3], [0.0, -0.5]])


def _worked_problem():
    return QuboProblem(QuboMatrix(WORKED_Q), alpha=1.0, lam=10.0, k=1)


def _random_problem(rng, m):
    q = np.triu(rng.random((m, m)), k=1)
    q[np.arange(m), np.arange(m)] = -rng.random(m)
    return QuboProblem(
        QuboMatrix(q),
        alpha=float(rng.choice([1.0, 1000.0])),
        lam=float(rng.choice([0.0, 10.0])),
        k=int(rng.integers(1, m + 1)),
    )


def _brute_energies(problem):
    """Independent scalar evaluation of every mask."""
    m = problem.size
    q = problem.q.entries
    table = {}
    for bits in itertools.product((0, 1), repeat=m):
        s = 0.0
        for i in range(m):
            for j in range(i, m):
                s += bits[i] * bits[j] * q[i, j]
        table[bits] = problem.alpha * s + problem.lam * (sum(bits) - problem.k) ** 2
    return table


class TestSampleTypes:
    def test_occurrences_validated(self):
        with pytest.raises(ValueError):
            Sample(FeatureMask((1, 0)), 0.0, occurrences=0)

    def test_sample_set_requires_sorted_energies(self):
        a = Sample(FeatureMask((1, 0)), 1.0)
        b = Sample(FeatureMask((0, 1)), 0.5)
        with pytest.raises(ValueError):
            SampleSet((a, b), shots=2, solve_time_us=0.0, wall_time_us=0.0)

    def test_sample_set_normalizes_to_tuple(self):
        a = Sample(FeatureMask((1, 0)), 1.0)
        ss = SampleSet([a], shots=1, solve_time_us=0.0, wall_time_us=0.0)
        assert isinstance(ss.samples, tuple)


class TestAnnealSchedule:
    def test_defaults(self):
        s = AnnealSchedule()
        assert s.sweeps == 1000
        assert s.interpolation == "geometric"

    def test_validation(self):
        with pytest.raises(ValueError):
            AnnealSchedule(sweeps=0)
        with pytest.raises(ValueError):
            AnnealSchedule(beta_start=0.0)
        with pytest.raises(ValueError):
            AnnealSchedule(beta_start=5.0, beta_end=1.0)
        with pytest.raises(ValueError):
            AnnealSchedule(interpolation="cubic")

    def test_betas_endpoints(self):
        for interp in ("geometric", "linear"):
            b = AnnealSchedule(sweeps=50, interpolation=interp).betas()
            assert b.shape == (50,)
            assert abs(b[0] - 0.1) < 1e-12
            assert abs(b[-1] - 10.0) < 1e-12
            assert np.all(np.diff(b) > 0)

    def test_single_sweep(self):
        b = AnnealSchedule(sweeps=1).betas()
        assert b.shape == (1,)
        assert b[0] == 0.1


class TestExhaustiveSolve:
    def test_worked_example(self):
        ss = exhaustive_solve(_worked_problem())
        assert ss.samples[0].mask.bits == (1, 0)
        assert abs(ss.samples[0].energy + 0.8) < 1e-12
        assert abs(ss.info["runner_up_energy"] + 0.5) < 1e-12
        assert ss.shots == 4

    def test_matches_brute_force(self):
        rng = np.random.default_rng(71)
        for _ in range(8):
            m = int(rng.integers(2, 11))
            prob = _random_problem(rng, m)
            table = _brute_energies(prob)
            lowest = min(table.values())
            winners = {bits for bits, e in table.items() if e == lowest}
            runner = min(e for e in table.values() if e > lowest)
            ss = exhaustive_solve(prob)
            assert abs(ss.samples[0].energy - lowest) < 1e-9
            assert {s.mask.bits for s in ss.samples} == winners
            assert abs(ss.info["runner_up_energy"] - runner) < 1e-9

    def test_degenerate_ties_all_returned(self):
        prob = QuboProblem(QuboMatrix(np.zeros((3, 3))), alpha=1.0, lam=0.0, k=1)
        ss = exhaustive_solve(prob)
        assert len(ss.samples) == 8
        assert all(s.energy == 0.0 for s in ss.samples)
        assert best_mask(ss).bits == (0, 0, 1)

    def test_size_refusal(self):
        m = EXHAUSTIVE_MAX_BITS + 1
        prob = QuboProblem(QuboMatrix(np.zeros((m, m))), k=1)
        with pytest.raises(ValueError, match="refused"):
            exhaustive_solve(prob)


class TestSimulatedAnneal:
    def test_attains_exhaustive_minimum(self):
        rng = np.random.default_rng(61)
        for t in range(6):
            m = int(rng.integers(8, 17))
            prob = _random_problem(rng, m)
            ex = exhaustive_solve(prob)
            sa = simulated_anneal(prob, shots=500, seed=100 + t)
            assert abs(sa.samples[0].energy - ex.samples[0].energy) < 1e-9

    def test_deterministic(self):
        rng = np.random.default_rng(62)
        prob = _random_problem(rng, 12)
        a = simulated_anneal(prob, shots=200, seed=5)
        b = simulated_anneal(prob, shots=200, seed=5)
        assert a.samples == b.samples
        assert a.shots == b.shots

    def test_seed_changes_draws(self):
        rng = np.random.default_rng(63)
        prob = _random_problem(rng, 12)
        a = simulated_anneal(prob, shots=100, seed=1)
        b = simulated_anneal(prob, shots=100, seed=2)
        occ_a = {s.mask.bits: s.occurrences for s in a.samples}
        occ_b = {s.mask.bits: s.occurrences for s in b.samples}
        assert occ_a != occ_b

    def test_more_shots_never_worse(self):
        rng = np.random.default_rng(64)
        prob = _random_problem(rng, 14)
        best = np.inf
        for shots in (50, 100, 200):
            e = simulated_anneal(prob, shots=shots, seed=9).samples[0].energy
            assert e <= best + 1e-12
            best = min(best, e)

    def test_occurrences_sum_to_shots(self):
        rng = np.random.default_rng(65)
        prob = _random_problem(rng, 10)
        ss = simulated_anneal(prob, shots=137, seed=3)
        assert sum(s.occurrences for s in ss.samples) == 137
        assert ss.shots == 137

    def test_energies_recomputed_exactly(self):
        rng = np.random.default_rng(66)
        prob = _random_problem(rng, 9)
        for s in simulated_anneal(prob, shots=64, seed=4).samples:
            assert np.isclose(s.energy, energy(prob, s.mask), rtol=1e-9, atol=1e-9)

    def test_zero_matrix_problem(self):
        prob = QuboProblem(QuboMatrix(np.zeros((4, 4))), alpha=1.0, lam=0.0, k=2)
        ss = simulated_anneal(prob, shots=32, seed=0)
        assert all(s.energy == 0.0 for s in ss.samples)

    def test_shots_validated(self):
        with pytest.raises(ValueError):
            simulated_anneal(_worked_problem(), shots=0)


class TestBestMask:
    def _set(self, rows):
        samples = [Sample(FeatureMask(b), e, o) for b, e, o in rows]
        return SampleSet(tuple(samples), shots=1, solve_time_us=0.0, wall_time_us=0.0)

    def test_empty_rejected(self):
        ss = SampleSet((), shots=0, solve_time_us=0.0, wall_time_us=0.0)
        with pytest.raises(ValueError):
            best_mask(ss)

    def test_lowest_energy_wins(self):
        ss = self._set([((0, 1), -2.0, 1), ((1, 1), -1.0, 5)])
        assert best_mask(ss).bits == (0, 1)

    def test_tie_prefers_smaller_k(self):
        ss = self._set([((1, 0), -1.0, 1), ((1, 1), -1.0, 1)])
        assert best_mask(ss).bits == (1, 0)

    def test_tie_prefers_lexicographic_bits(self):
        ss = self._set([((0, 1), -1.0, 1), ((1, 0), -1.0, 1)])
        assert best_mask(ss).bits == (0, 1)

    def test_all_zero_loses_ties(self):
        ss = self._set([((0, 0), -1.0, 1), ((1, 1), -1.0, 1)])
        assert best_mask(ss).bits == (1, 1)

    def test_all_zero_wins_alone(self):
        ss = self._set([((0, 0), -5.0, 1), ((1, 1), -1.0, 1)])
        assert best_mask(ss).bits == (0, 0)


class TestWireProtocol:
    def test_request_shape(self):
        req = _wire_request(_worked_problem(), shots=64)
        assert req["linear"] == {"0": -10.8, "1": -10.5}
        assert req["quadratic"] == {"0,1": pytest.approx(20.3)}
        assert req["num_reads"] == 64
        assert req["offset"] == pytest.approx(10.0)

    def test_parse_round_trip(self):
        payload = {
            "samples": [[1, 0]],
            "energies": [-10.8],
            "num_occurrences": [64],
            "timing": {"qpu_access_time_us": 2000.0},
        }
        masks, energies, occ, qpu = _parse_wire_response(payload, 2)
        assert masks[0].bits == (1, 0)
        assert energies == [-10.8]
        assert occ == [64]
        assert qpu == 2000.0

    def test_parse_rejects_non_object(self):
        with pytest.raises(MalformedResponseError):
            _parse_wire_response([1, 2], 2)

    def test_parse_rejects_missing_fields(self):
        base = {
            "samples": [[1, 0]],
            "energies": [0.0],
            "num_occurrences": [1],
            "timing": {"qpu_access_time_us": 1.0},
        }
        for key in base:
            broken = {k: v for k, v in base.items() if k != key}
            with pytest.raises(MalformedResponseError):
                _parse_wire_response(broken, 2)

    def test_parse_rejects_bad_timing(self):
        payload = {
            "samples": [[1, 0]],
            "energies": [0.0],
            "num_occurrences": [1],
            "timing": {},
        }
        with pytest.raises(MalformedResponseError):
            _parse_wire_response(payload, 2)

    def test_parse_rejects_length_disagreement(self):
        payload = {
            "samples": [[1, 0]],
            "energies": [0.0, 1.0],
            "num_occurrences": [1],
            "timing": {"qpu_access_time_us": 1.0},
        }
        with pytest.raises(MalformedResponseError):
            _parse_wire_response(payload, 2)

    def test_parse_rejects_empty_samples(self):
        payload = {
            "samples": [],
            "energies": [],
            "num_occurrences": [],
            "timing": {"qpu_access_time_us": 1.0},
        }
        with pytest.raises(MalformedResponseError):
            _parse_wire_response(payload, 2)

    def test_parse_rejects_bad_bits(self):
        payload = {
            "samples": [[1, 2]],
            "energies": [0.0],
            "num_occurrences": [1],
            "timing": {"qpu_access_time_us": 1.0},
        }
        with pytest.raises(MalformedResponseError):
            _parse_wire_response(payload, 2)

    def test_parse_rejects_bad_occurrences(self):
        payload = {
            "samples": [[1, 0]],
            "energies": [0.0],
            "num_occurrences": [0],
            "timing": {"qpu_access_time_us": 1.0},
        }
        with pytest.raises(MalformedResponseError):
            _parse_wire_response(payload, 2)


class TestRemoteSample:
    def test_round_trip_worked_example(self):
        with StubServer() as srv:
            ss = remote_sample(_worked_problem(), srv.endpoint, shots=64)
        assert len(ss.samples) == 1
        assert ss.samples[0].mask.bits == (1, 0)
        assert abs(ss.samples[0].energy + 0.8) < 1e-9
        assert ss.samples[0].occurrences == 64
        assert ss.shots == 64
        assert ss.solve_time_us == 2000.0

    def test_reads_distributed_over_ties(self):
        prob = QuboProblem(QuboMatrix(np.zeros((2, 2))), alpha=1.0, lam=0.0, k=1)
        with StubServer() as srv:
            ss = remote_sample(prob, srv.endpoint, shots=10)
        assert len(ss.samples) == 4
        assert sorted(s.occurrences for s in ss.samples) == [2, 2, 3, 3]
        assert ss.shots == 10

    def test_energy_mismatch_detected(self):
        with StubServer(corrupt_energy=True) as srv:
            with pytest.raises(EnergyMismatchError):
                remote_sample(_worked_problem(), srv.endpoint, shots=8)

    def test_missing_field_detected(self):
        with StubServer(drop_field="timing") as srv:
            with pytest.raises(MalformedResponseError):
                remote_sample(_worked_problem(), srv.endpoint, shots=8)

    def test_timeout_surfaced(self):
        with StubServer(delay_s=1.0) as srv:
            with pytest.raises(RemoteTimeoutError):
                remote_sample(_worked_problem(), srv.endpoint, shots=8,
                              timeout_ms=200)

    def test_unreachable_endpoint(self):
        with pytest.raises(RemoteNetworkError):
            remote_sample(_worked_problem(), "http://127.0.0.1:1/", shots=8)

    def test_http_error_status(self):
        m = 17  # stub refuses problems wider than 16 bits with HTTP 400
        prob = QuboProblem(QuboMatrix(np.zeros((m, m))), k=1)
        with StubServer() as srv:
            with pytest.raises(MalformedResponseError, match="HTTP 400"):
                remote_sample(prob, srv.endpoint, shots=8)

    def test_shots_validated(self):
        with pytest.raises(ValueError):
            remote_sample(_worked_problem(), "http://127.0.0.1:1/", shots=0)

    def test_timeout_validated(self):
        with pytest.raises(ValueError):
            remote_sample(_worked_problem(), "http://127.0.0.1:1/", shots=1,
                          timeout_ms=0)
