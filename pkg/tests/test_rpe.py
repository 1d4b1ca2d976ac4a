import math
from dataclasses import replace

import numpy as np
import pytest

from broomsim.analysis import grubbs_filter
from broomsim.broombridge import InitialStateAnsatz, LadderToken, read_document
from broomsim.errors import ArgumentError, CapacityError, MultipleSolutions, NoSolution
from broomsim.exactdiag import dense_sector_spectrum, sector_basis
from broomsim.hamiltonian import build_fermion_hamiltonian, jordan_wigner
from broomsim.rpe import (
    RpeConfig,
    _projective_spectrum,
    _setup,
    cluster_energies,
    dealias_energy,
    default_window,
    estimate_phase,
    estimates_to_csv,
    repeat_and_summarize,
    repetition_seeds,
    wrap_phase,
)
from broomsim.simulator import prepare_ansatz

from helpers import LIH_FILE, diagonal_problem

A = lambda i: LadderToken(i, "alpha", "raise")  # noqa: E731
B = lambda i: LadderToken(i, "beta", "raise")  # noqa: E731


# ---------------------------------------------------------------------------
# phase bookkeeping


def test_error_target():
    assert RpeConfig(bits=10, step_size=0.5).error_target == 0.5 / 2**9
    assert round(RpeConfig().error_target, 5) == 0.00098
    assert RpeConfig(bits=1, step_size=0.3).error_target == 0.3


@pytest.mark.parametrize("x", [0.0, 1.0, -3.0, 3.2, 7.0, -math.pi, math.pi, 100.0])
def test_wrap_phase_range(x):
    y = wrap_phase(x)
    assert -math.pi < y <= math.pi
    assert math.isclose(math.cos(y), math.cos(x), abs_tol=1e-12)
    assert math.isclose(math.sin(y), math.sin(x), abs_tol=1e-9)


def test_dealias_trivial():
    assert dealias_energy(0.0, 1.0, (-0.4, 0.4)) == 0.0


def test_dealias_table_energy_round_trip():
    e, t = -5.38436, 0.5
    phase = math.fmod(-e * t, 2 * math.pi)
    assert dealias_energy(phase, t, (-6.0, -4.0)) == pytest.approx(e, abs=1e-12)
    assert dealias_energy(wrap_phase(-e * t), t, (-6.0, -4.0)) == pytest.approx(e, abs=1e-12)


def test_dealias_errors():
    with pytest.raises(MultipleSolutions):
        dealias_energy(0.1, 0.5, (-10.0, 10.0))
    with pytest.raises(NoSolution):
        # phase 0 means E in 4 pi Z; none of those lie in [1, 2]
        dealias_energy(0.0, 0.5, (1.0, 2.0))


def test_default_window_prefers_fci_bounds():
    p, e = diagonal_problem(0, 2, 2, window=1.0)
    assert default_window(p, 0.5, center=99.0) == (e - 1.0, e + 1.0)
    wide, _ = diagonal_problem(0, 2, 2, window=50.0)
    lo, hi = default_window(wide, 0.5, center=3.0)
    assert lo < 3.0 < hi and hi - lo < 2 * math.pi / 0.5


def test_config_validation():
    for kwargs in ({"bits": 0}, {"step_size": 0}, {"shots_per_round": 0}, {"mode": "magic"}):
        with pytest.raises(ArgumentError):
            RpeConfig(**kwargs)


# ---------------------------------------------------------------------------
# estimation on eigenstates


@pytest.mark.parametrize("mode", ["circuit", "projective"])
def test_eigenstate_single_orbital(mode):
    p, e = diagonal_problem(1, 1, 1)
    ok = 0
    for seed in range(30):
        est = estimate_phase(p, "|G>", RpeConfig(seed=seed, mode=mode))
        ok += abs(est.energy - e) <= 0.00098
    assert ok >= 28


def test_eigenstate_success_rate_100_trials():
    p, e = diagonal_problem(2, 2, 2)
    errors = [estimate_phase(p, "|G>", RpeConfig(seed=s)).energy - e for s in range(100)]
    assert sum(abs(x) <= 0.5 / 2**9 for x in errors) >= 95


def test_one_bit_still_in_window():
    p, e = diagonal_problem(3, 2, 2, window=1.0)
    est = estimate_phase(p, "|G>", RpeConfig(bits=1, step_size=0.5))
    assert e - 1.0 <= est.energy <= e + 1.0
    assert abs(est.energy - e) <= 0.5


def test_rms_error_decreases_with_bits():
    p, e = diagonal_problem(4, 2, 2)
    rms = []
    for bits in (2, 4, 6, 8):
        errs = [estimate_phase(p, "|G>", RpeConfig(bits=bits, seed=s)).energy - e for s in range(20)]
        rms.append(math.sqrt(np.mean(np.square(errs))))
    assert all(a > b for a, b in zip(rms, rms[1:])), rms


def test_estimates_are_reproducible():
    p, _ = diagonal_problem(5, 2, 2)
    cfg = RpeConfig(seed=42, bits=6)
    assert estimate_phase(p, "|G>", cfg) == estimate_phase(p, "|G>", cfg)


def test_capacity_limit():
    p, _ = diagonal_problem(0, 3, 2)
    with pytest.raises(CapacityError):
        estimate_phase(p, "|G>", RpeConfig(max_qubits=6))
    # projective mode needs no ancilla
    estimate_phase(p, "|G>", RpeConfig(max_qubits=6, mode="projective"))


# ---------------------------------------------------------------------------
# superpositions


def _two_level(seed=0):
    """Diagonal 2-orbital problem with an equal superposition of two determinants."""
    p, _ = diagonal_problem(seed, 2, 1)
    mix = InitialStateAnsatz("mix", ((1.0, (A(0),)), (1.0, (A(1),))))
    p = replace(p, initial_state_suggestions=(mix,))
    e0 = p.coulomb_repulsion + p.one_electron[(0, 0)]
    e1 = p.coulomb_repulsion + p.one_electron[(1, 1)]
    return p, e0, e1


def test_superposition_born_frequencies():
    p, e0, e1 = _two_level()
    assert abs(e0 - e1) > 0.05
    # 400 trials on spawned streams; the +-0.05 band is about two binomial sigmas
    summary = repeat_and_summarize(p, "mix", RpeConfig(seed=0, mode="projective"), 400)
    hits = 0
    for est in summary.estimates:
        assert min(abs(est.energy - e0), abs(est.energy - e1)) <= 0.00098
        hits += abs(est.energy - e0) < abs(est.energy - e1)
    assert abs(hits / 400 - 0.5) <= 0.05


def test_circuit_and_projective_selection_agree_on_two_qubits():
    # one spatial orbital (two qubits): vacuum versus the doubly occupied level
    p, _ = diagonal_problem(7, 1, 2)
    mix = InitialStateAnsatz("mix", ((1.0, ()), (0.8, (B(0), A(0)))))
    p = replace(p, initial_state_suggestions=(mix,))
    e_vac = p.coulomb_repulsion
    n = 120
    freq = {}
    for mode in ("circuit", "projective"):
        low = 0
        for seed in range(n):
            est = estimate_phase(p, "mix", RpeConfig(seed=seed, mode=mode, bits=4, shots_per_round=20))
            low += abs(est.energy - e_vac) < 0.1
        freq[mode] = low / n
    expected = 1 / (1 + 0.8**2)
    for f in freq.values():
        assert abs(f - expected) <= 3 * math.sqrt(expected * (1 - expected) / n)
    pooled = (freq["circuit"] + freq["projective"]) / 2
    assert abs(freq["circuit"] - freq["projective"]) <= 3 * math.sqrt(pooled * (1 - pooled) * 2 / n)


def test_projective_probabilities_are_overlaps():
    # twelve qubits: the projective weights come from the trial state's Krylov space
    p = read_document(LIH_FILE).problems[0]
    cfg = RpeConfig(mode="projective", step_size=0.05)
    probs, phase_of = _projective_spectrum(_setup(p, "E1", cfg), cfg)
    b = sector_basis(12, 4)
    evals, evecs = dense_sector_spectrum(build_fermion_hamiltonian(p), b)
    psi = b.restrict(prepare_ansatz(p, "E1").state.amplitudes)
    overlaps = np.abs(evecs.T @ psi) ** 2
    assert np.sum(probs) == pytest.approx(1.0, abs=1e-12)
    # the heaviest Ritz pair carries the weight of its exact eigenvalue
    j = int(np.argmax(probs))
    level = int(np.argmax(overlaps))
    same = np.abs(evals - evals[level]) < 1e-8
    assert probs[j] == pytest.approx(np.sum(overlaps[same]), abs=1e-8)
    # its step phase is -(E - c) t up to Trotter error
    c = jordan_wigner(build_fermion_hamiltonian(p)).identity_coefficient
    assert abs(phase_of(j) + (evals[level] - c) * 0.05) < 0.01


def test_projective_large_register_energy():
    # twelve-qubit eigenstate of a commuting Hamiltonian through the Krylov path
    p, e = diagonal_problem(12, 6, 4)
    est = estimate_phase(p, "|G>", RpeConfig(mode="projective", seed=5))
    assert abs(est.energy - e) <= RpeConfig().error_target


# ---------------------------------------------------------------------------
# repetitions


def test_two_repetitions_agree():
    p, _ = diagonal_problem(8, 2, 2)
    s = repeat_and_summarize(p, "|G>", RpeConfig(seed=3), 2)
    a, b = (e.energy for e in s.estimates)
    assert abs(a - b) <= 2 * RpeConfig().error_target
    assert s.std is not None and len(s.clusters) == 1


def test_single_repetition_std_absent():
    p, _ = diagonal_problem(8, 2, 2)
    s = repeat_and_summarize(p, "|G>", RpeConfig(seed=3, bits=4), 1)
    assert s.std is None
    assert s.clusters[0].std is None


def test_150_repetitions_feed_grubbs():
    p, e = diagonal_problem(9, 2, 2)
    s = repeat_and_summarize(p, "|G>", RpeConfig(mode="projective"), 150)
    kept, removed = grubbs_filter([x.energy for x in s.estimates])
    assert len(kept) + len(removed) == 150
    assert abs(np.mean(kept) - e) < RpeConfig().error_target


def test_threads_do_not_change_results():
    p, _ = diagonal_problem(10, 2, 2)
    cfg = RpeConfig(bits=5, seed=1)
    serial = repeat_and_summarize(p, "|G>", cfg, 4, threads=1)
    pooled = repeat_and_summarize(p, "|G>", cfg, 4, threads=2)
    assert estimates_to_csv(serial.estimates) == estimates_to_csv(pooled.estimates)


def test_repetition_seeds_distinct_and_stable():
    seeds = repetition_seeds(0, 10)
    assert len(set(seeds)) == 10
    assert seeds == repetition_seeds(0, 10)


def test_cluster_energies():
    assert cluster_energies([0.0, 0.001, 1.0, 1.0005, -3.0], gap=0.01) == [1, 1, 2, 2, 0]


def test_superposition_repetitions_cluster_by_level():
    p, e0, e1 = _two_level(1)
    s = repeat_and_summarize(p, "mix", RpeConfig(mode="projective", seed=2), 40)
    assert len(s.clusters) == 2
    means = sorted(c.mean for c in s.clusters)
    np.testing.assert_allclose(means, sorted([e0, e1]), atol=0.00098)


def test_csv_columns():
    p, _ = diagonal_problem(11, 1, 1)
    s = repeat_and_summarize(p, "|G>", RpeConfig(bits=3), 2)
    lines = estimates_to_csv(s.estimates).splitlines()
    assert lines[0] == "seed,t,bits,phase,energy,std_error,cluster_id"
    assert len(lines) == 3
    assert "np." not in "".join(lines)
