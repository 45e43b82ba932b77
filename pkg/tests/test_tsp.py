import numpy as np
import pytest

from solab.dynamics import energy, relax
from solab.errors import ConfigurationError, DimensionMismatchError
from solab.rng import make_rng
from solab.tsp import (
    DecodeFailure,
    TspInstance,
    brute_force_tour,
    decode_tour,
    encode_tour,
    random_tsp_instance,
    tour_length,
    tsp_energy_offset,
    tsp_penalty_energy,
    tsp_weights,
)


def square_instance(**coef) -> TspInstance:
    # four cities on the unit square, perimeter tour length 4
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    return TspInstance(distances=d, **coef)


def test_reference_four_city_state_decodes_to_bdac():
    # rows A..D, columns positions 1..4; the annotated reference matrix
    v = np.array([0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0], dtype=float)
    state = v * 2.0 - 1.0
    tour = decode_tour(state, 4)
    assert tour == [1, 3, 0, 2]  # B -> D -> A -> C


def test_decode_all_off_reports_every_row():
    failure = decode_tour(-np.ones(16), 4)
    assert isinstance(failure, DecodeFailure)
    assert failure.bad_rows == {0: 0, 1: 0, 2: 0, 3: 0}
    assert failure.bad_cols == {0: 0, 1: 0, 2: 0, 3: 0}
    assert "city 0" in str(failure)


def test_decode_reports_specific_violations():
    v = np.zeros((3, 3))
    v[0, 0] = 1
    v[0, 1] = 1  # row 0 doubled, row 1/2 empty, col 2 empty
    v[1, 2] = 0
    v[2, 2] = 0
    state = v.reshape(-1) * 2.0 - 1.0
    failure = decode_tour(state, 3)
    assert failure.bad_rows == {0: 2, 1: 0, 2: 0}
    assert failure.bad_cols == {2: 0}


def test_decode_wrong_length():
    with pytest.raises(DimensionMismatchError):
        decode_tour(np.ones(10), 4)


def test_encode_decode_round_trip():
    rng = make_rng(0)
    for _ in range(20):
        tour = list(rng.permutation(5))
        assert decode_tour(encode_tour(tour, 5), 5) == tour


def test_second_on_unit_in_a_row_costs_more():
    # zero distances isolate the validity terms (no distance contribution)
    inst = TspInstance(distances=np.zeros((4, 4)))
    rng = make_rng(4)
    for _ in range(10):
        tour = list(rng.permutation(4))
        v = ((encode_tour(tour, 4) + 1.0) / 2.0).reshape(4, 4)
        doubled = v.copy()
        row = int(rng.integers(0, 4))
        off_cols = np.flatnonzero(doubled[row] == 0.0)
        doubled[row, rng.choice(off_cols)] = 1.0
        assert tsp_penalty_energy(inst, doubled) > tsp_penalty_energy(inst, v)


def test_valid_tour_energy_is_distance_term_only():
    # on a valid tour the three validity terms vanish: E = D * tour length
    inst = square_instance()
    rng = make_rng(1)
    for _ in range(10):
        tour = list(rng.permutation(4))
        v = (encode_tour(tour, 4) + 1.0) / 2.0
        expected = inst.d * tour_length(tour, inst.distances)
        assert tsp_penalty_energy(inst, v) == pytest.approx(expected, rel=1e-12)


def test_network_energy_reproduces_penalty_energy():
    # bipolar network energy equals the direct evaluator up to the constant
    rng = make_rng(2)
    for n in (2, 3, 4, 5):
        inst = random_tsp_instance(n, rng)
        w, bias = tsp_weights(inst)
        offset = tsp_energy_offset(inst)
        assert np.array_equal(w, w.T)
        assert np.all(np.diag(w) == 0.0)
        for _ in range(100):
            v = rng.integers(0, 2, size=n * n).astype(float)
            s = v * 2.0 - 1.0
            direct = tsp_penalty_energy(inst, v)
            via_network = energy(s, w, bias) + offset
            assert via_network == pytest.approx(direct, abs=1e-9)


def test_tour_length_two_city():
    d = np.array([[0.0, 3.5], [3.5, 0.0]])
    assert tour_length([0, 1], d) == 7.0


def test_tour_length_unit_square_perimeter():
    inst = square_instance()
    assert tour_length([0, 1, 2, 3], inst.distances) == pytest.approx(4.0)


def test_tour_length_rejects_non_permutation():
    with pytest.raises(ConfigurationError):
        tour_length([0, 0, 1], np.zeros((3, 3)))


def test_instance_validation():
    with pytest.raises(ConfigurationError):
        TspInstance(distances=np.array([[0.0]]))
    bad = np.array([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(ConfigurationError):
        TspInstance(distances=bad)


def test_relaxed_decodes_never_beat_brute_force():
    rng = make_rng(3)
    inst = random_tsp_instance(8, rng)
    w, bias = tsp_weights(inst)
    _, best_len = brute_force_tour(inst.distances)
    found = []
    for _ in range(20):
        s0 = rng.integers(0, 2, size=64) * 2.0 - 1.0
        res = relax(s0, w, bias, steps=3000, rng=rng)
        tour = decode_tour(res.state, 8)
        if not isinstance(tour, DecodeFailure):
            found.append(tour_length(tour, inst.distances))
    assert all(length >= best_len - 1e-9 for length in found)
