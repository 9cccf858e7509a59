import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarsar3d.checks import adjoint_defect, forward_equivalence_error, random_maps, random_ongrid_instance
from polarsar3d.errors import InvalidInputError, OutOfBandError, SizeCapError
from polarsar3d.forward import (
    Scatterer,
    Scene,
    ThreeMaps,
    apply_adjoint,
    apply_forward,
    classical_ms_hologram,
    dense_matrix,
    simulate_hologram,
)
from polarsar3d.geometry import SPEED_OF_LIGHT, Acquisition, expand_sweep
from polarsar3d.kgrid import KGrid, on_grid_acquisition
from polarsar3d.polarimetry import ScatteringMatrix


def point(pos, xx=0.0, yy=0.0, xy=0.0):
    return Scatterer(pos, ScatteringMatrix(xx, yy, xy))


def test_simulate_origin_unit():
    acq = expand_sweep("0", "0", "1e9", "HH")
    holo = simulate_hologram(Scene([point((0, 0, 0), xx=1)]), acq)
    np.testing.assert_allclose(holo.values, [1.0], atol=1e-15)


def test_simulate_phase_sign():
    z0 = 0.13
    f = 2.4e9
    acq = expand_sweep("0", "0", f"{f}", "HH")
    k = 2 * math.pi * f / SPEED_OF_LIGHT
    holo = simulate_hologram(Scene([point((0, 0, z0), xx=1)]), acq)
    assert holo.values[0] == pytest.approx(np.exp(2j * k * z0), rel=1e-13)


def test_simulate_empty_scene():
    acq = expand_sweep("0:5:10", "0:90:270", "1e9:1e9:3e9", "VV")
    assert not simulate_hologram(Scene(), acq).values.any()


def test_classical_examples():
    acq = expand_sweep("0:5:10", "0:90:270", "1e9:1e9:3e9", "HH")
    np.testing.assert_allclose(classical_ms_hologram([((0, 0, 0), 1.0)], acq).values, 1.0, atol=1e-15)
    z = 0.21
    axial = expand_sweep("0", "0", "1e9:2.5e8:3e9", "HH")
    k = axial.wavenumber
    two = classical_ms_hologram([((0, 0, z), 1.0), ((0, 0, -z), 1.0)], axial).values
    np.testing.assert_allclose(two, 2 * np.cos(2 * k * z), atol=1e-12)


@pytest.mark.parametrize("mode", ["HH", "VV"])
def test_isotropic_reduces_to_classical(rng, mode):
    acq = Acquisition(
        np.radians(rng.uniform(0, 60, 200)), np.radians(rng.uniform(0, 360, 200)), rng.uniform(1e9, 1e10, 200), mode
    )
    amps = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    pos = rng.uniform(-0.5, 0.5, (5, 3))
    ext = simulate_hologram(Scene([Scatterer(p, ScatteringMatrix.isotropic(a)) for p, a in zip(pos, amps)]), acq)
    cls = classical_ms_hologram(list(zip(pos, amps)), acq)
    assert np.linalg.norm(ext.values - cls.values) <= 1e-12 * np.linalg.norm(cls.values)


def test_noise_statistics():
    acq = expand_sweep("0:1:9", "0:1:99", "1e9:1e8:1.9e9", "HH")
    assert len(acq) >= 10_000
    sigma = 0.3
    noise = simulate_hologram(Scene(), acq, noise_sigma=sigma, seed=11).values
    assert abs(np.mean(np.abs(noise) ** 2) / sigma**2 - 1) < 0.1
    assert abs(np.var(noise.real) / np.var(noise.imag) - 1) < 0.1


def test_noise_deterministic():
    acq = expand_sweep("0:5:10", "0:30:330", "1e9:1e8:2e9", "HH")
    a = simulate_hologram(Scene([point((0, 0, 0.1), xx=1)]), acq, noise_sigma=0.1, seed=3)
    b = simulate_hologram(Scene([point((0, 0, 0.1), xx=1)]), acq, noise_sigma=0.1, seed=3)
    c = simulate_hologram(Scene([point((0, 0, 0.1), xx=1)]), acq, noise_sigma=0.1, seed=4)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.values.tobytes() != c.values.tobytes()


def test_negative_noise_rejected():
    with pytest.raises(InvalidInputError):
        simulate_hologram(Scene(), expand_sweep("0", "0", "1e9", "HH"), noise_sigma=-1)


def test_scene_json_roundtrip():
    sc = Scene([point((0.1, -0.2, 0.3), xx=1 + 2j, yy=-0.5, xy=0.25j)])
    back = Scene.from_json_dict(sc.to_json_dict())
    assert back.scatterers == sc.scatterers


def test_forward_zero_maps(small_grid, rng):
    acq = on_grid_acquisition(small_grid, [[1, 2, 3], [4, 1, 6]])
    assert not apply_forward(ThreeMaps.zeros(small_grid), acq, small_grid).any()
    assert not apply_adjoint(np.zeros(2), acq, small_grid).vec().any()


def test_forward_impulse_matches_point_scatterer():
    g = KGrid((4, 4, 6), [6.0, 6.0, 6.0], [0.0, 0.0, 420.0])
    nodes = [[2, 2, z] for z in range(6)]
    acq = on_grid_acquisition(g, nodes, mode="HH")
    assert np.all(acq.theta == 0) and np.all(acq.phi == 0)
    maps = ThreeMaps.zeros(g)
    maps.xx[tuple(g.half)] = 1.0  # voxel at r = 0
    fwd = apply_forward(maps, acq, g)
    # a map value v is a point scatterer of amplitude v / sqrt(N)
    sim = simulate_hologram(Scene([point((0, 0, 0), xx=1 / math.sqrt(g.size))]), acq).values
    np.testing.assert_allclose(fwd, sim, rtol=1e-10)
    np.testing.assert_allclose(fwd, fwd[0], rtol=1e-12)


def test_forward_off_center_impulse(rng):
    acq, g = random_ongrid_instance(rng, dims=(5, 4, 6), m=40)
    vox = (1, 3, 2)
    maps = ThreeMaps.zeros(g)
    maps.xy[vox] = 2.0 - 1j
    pos = g.origin + np.array(vox) * g.voxel_pitch
    sim = simulate_hologram(Scene([point(pos, xy=(2.0 - 1j) / math.sqrt(g.size))]), acq).values
    np.testing.assert_allclose(apply_forward(maps, acq, g), sim, rtol=1e-10, atol=1e-12)


def test_dense_matrix_origin_column():
    g = KGrid((2, 2, 2), [5.0, 5.0, 5.0], [0.0, 0.0, 300.0])
    acq_hh = on_grid_acquisition(g, [[1, 1, 1]], mode="HH", phi_on_axis=0.0)
    acq_hv = on_grid_acquisition(g, [[1, 1, 1]], mode="HV", phi_on_axis=0.0)
    col = 1 + 2 + 4  # voxel (1,1,1), x-fastest
    n = g.size
    row = dense_matrix(acq_hh, g)[0, [col, n + col, 2 * n + col]]
    np.testing.assert_allclose(row * math.sqrt(n), [1, 0, 0], atol=1e-15)
    row = dense_matrix(acq_hv, g)[0, [col, n + col, 2 * n + col]]
    np.testing.assert_allclose(row * math.sqrt(n), [0, 0, -1], atol=1e-15)


def test_dense_cap(small_grid):
    acq = on_grid_acquisition(small_grid, [[1, 2, 3], [4, 1, 6]])
    with pytest.raises(SizeCapError):
        dense_matrix(acq, small_grid, cap=100)


def test_forward_out_of_band(small_grid):
    acq = expand_sweep("0", "0", "3e10", "HH")
    with pytest.raises(OutOfBandError):
        apply_forward(ThreeMaps.zeros(small_grid), acq, small_grid)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["nearest", "linear"]))
def test_adjoint_property(seed, interp):
    rng = np.random.default_rng(seed)
    acq, g = random_ongrid_instance(rng, interp=interp)
    assert adjoint_defect(rng, acq, g) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dense_equivalence_property(seed):
    rng = np.random.default_rng(seed)
    acq, g = random_ongrid_instance(rng)
    assert forward_equivalence_error(rng, acq, g) < 1e-10


def test_adjoint_matches_dense_conjugate_transpose(ongrid, rng):
    acq, g = ongrid
    y = rng.standard_normal(len(acq)) + 1j * rng.standard_normal(len(acq))
    dense = dense_matrix(acq, g).conj().T @ y
    np.testing.assert_allclose(apply_adjoint(y, acq, g).vec(), dense, atol=1e-11)


def test_three_maps_vec_roundtrip(small_grid, rng):
    m = random_maps(rng, small_grid)
    back = ThreeMaps.from_vec(m.vec(), small_grid)
    for label in ("xx", "yy", "xy"):
        np.testing.assert_array_equal(back[label], m[label])
    assert m.vec()[1] == m.xx[1, 0, 0]
