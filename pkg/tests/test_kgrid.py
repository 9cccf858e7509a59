import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarsar3d.errors import CannotSuggestError, InfeasibleError, InvalidInputError, OutOfBandError
from polarsar3d.geometry import SPEED_OF_LIGHT, Acquisition, expand_sweep
from polarsar3d.kgrid import (
    KGrid,
    extract,
    on_grid_acquisition,
    regrid,
    sample_location,
    sample_locations,
    splat,
    stencil,
    suggest_grid,
    to_image,
    to_kspace,
)


def test_sample_location_zero_angles():
    f = 2e9
    k = 2 * math.pi * f / SPEED_OF_LIGHT
    np.testing.assert_allclose(sample_location((0.0, 0.0, f)), [0, 0, 2 * k], rtol=1e-15)


def test_sample_locations_vectorized_matches_scalar():
    acq = expand_sweep("0:7:21", "0:40:320", "1e9:5e8:3e9", "HH")
    q = sample_locations(acq)
    for i in (0, 7, len(acq) - 1):
        np.testing.assert_allclose(q[i], sample_location(acq[i]), rtol=1e-14, atol=1e-12)


def test_grid_geometry(small_grid):
    g = small_grid
    assert g.size == 6 * 5 * 7
    np.testing.assert_allclose(g.voxel_pitch, 2 * np.pi / (np.array(g.dims) * g.delta_k))
    c = g.voxel_centers()
    assert c.shape == (g.size, 3)
    # the voxel at index N//2 sits at the origin; x varies fastest
    np.testing.assert_allclose(c[0], g.origin)
    np.testing.assert_allclose(c[1] - c[0], [g.voxel_pitch[0], 0, 0])
    assert KGrid.from_json_dict(g.to_json_dict()) == g


@pytest.mark.parametrize("dims", [(1, 4, 4), (4, 4)])
def test_grid_rejects_bad_dims(dims):
    with pytest.raises(InvalidInputError):
        KGrid(dims, [1.0, 1.0, 1.0], [0, 0, 0])


def test_kspace_roundtrip_is_unitary(small_grid, rng):
    x = rng.standard_normal(small_grid.dims) + 1j * rng.standard_normal(small_grid.dims)
    X = to_kspace(x, small_grid)
    assert np.linalg.norm(X) == pytest.approx(np.linalg.norm(x), rel=1e-12)
    np.testing.assert_allclose(to_image(X, small_grid), x, atol=1e-12)


def test_to_kspace_matches_direct_sum(small_grid, rng):
    g = small_grid
    x = rng.standard_normal(g.dims) + 1j * rng.standard_normal(g.dims)
    X = to_kspace(x, g)
    r = g.voxel_centers()
    xv = x.ravel(order="F")
    for node in [(0, 0, 0), (3, 2, 4), (5, 4, 6)]:
        q = g.node_coords(np.array([node]))[0]
        direct = np.sum(xv * np.exp(1j * r @ q)) / math.sqrt(g.size)
        assert X[node] == pytest.approx(direct, rel=1e-11)


def _one(theta, phi, freq, mode="HH"):
    return Acquisition([theta], [phi], [freq], [mode])


def test_regrid_single_on_node(small_grid):
    acq = on_grid_acquisition(small_grid, [[2, 3, 4]])
    spec = regrid([2 + 1j], [0.5], acq, small_grid, "nearest")
    assert spec.values[2, 3, 4] == pytest.approx(1 + 0.5j)
    assert spec.hit_weight[2, 3, 4] == 1.0
    assert np.count_nonzero(spec.values) == 1


def test_regrid_coincident_values_are_averaged(small_grid):
    acq = on_grid_acquisition(small_grid, [[1, 1, 5], [1, 1, 5]], allow_duplicates=True)
    spec = regrid([1.0, 3.0j], None, acq, small_grid)
    assert spec.values[1, 1, 5] == pytest.approx((1 + 3j) / 2)
    assert spec.hit_weight[1, 1, 5] == 2.0


def test_linear_midpoint_splits_evenly(small_grid):
    g = small_grid
    q = g.node_coords(np.array([[2, 2, 3]]))[0] + [0.5 * g.delta_k[0], 0, 0]
    k = np.linalg.norm(q) / 2
    theta = math.acos(q[2] / (2 * k))
    phi = math.atan2(q[1], q[0]) % (2 * math.pi)
    acq = _one(theta, phi, k * SPEED_OF_LIGHT / (2 * math.pi))
    _, wt = stencil(acq, g, "linear")
    assert sorted(np.round(wt[0], 12))[-2:] == [0.5, 0.5]
    spec = regrid([1.0], None, acq, g, "linear")
    assert spec.values[2, 2, 3] == pytest.approx(1.0)
    assert spec.values[3, 2, 3] == pytest.approx(1.0)
    assert spec.hit_weight[2, 2, 3] == pytest.approx(0.5)


def test_out_of_band(small_grid):
    acq = _one(0.0, 0.0, 30e9)
    with pytest.raises(OutOfBandError, match="#0"):
        stencil(acq, small_grid, "nearest")
    with pytest.raises(OutOfBandError):
        stencil(acq, small_grid, "linear")


def test_regrid_rejects_nan(small_grid):
    acq = on_grid_acquisition(small_grid, [[0, 0, 0]])
    with pytest.raises(InvalidInputError):
        regrid([np.nan], None, acq, small_grid)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["nearest", "linear"]))
def test_splat_is_adjoint_of_extract(seed, interp):
    rng = np.random.default_rng(seed)
    g = KGrid((5, 6, 4), rng.uniform(4, 8, 3), [0.0, 0.0, 400.0], interp)
    m = 40
    u = rng.uniform(0.5, np.array(g.dims) - 1.5, size=(m, 3))
    q = g.center + (u - g.half) * g.delta_k
    k = np.linalg.norm(q, axis=1) / 2
    acq = Acquisition(
        np.arccos(q[:, 2] / (2 * k)), np.mod(np.arctan2(q[:, 1], q[:, 0]), 2 * np.pi), k * SPEED_OF_LIGHT / (2 * np.pi), 0
    )
    y = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    X = rng.standard_normal(g.dims) + 1j * rng.standard_normal(g.dims)
    lhs = np.vdot(y, extract(X, acq, g))
    rhs = np.vdot(splat(y, acq, g), X)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs) + 1e-12


def test_on_grid_acquisition_hits_nodes(small_grid, rng):
    g = small_grid
    nodes = np.stack(np.unravel_index(rng.choice(g.size, 30, replace=False), g.dims), axis=-1)
    acq = on_grid_acquisition(g, nodes, mode="VV")
    np.testing.assert_allclose(sample_locations(acq), g.node_coords(nodes), atol=1e-9)


def test_on_grid_axis_node():
    g = KGrid((4, 4, 4), [5.0, 5.0, 5.0], [0.0, 0.0, 300.0])
    acq = on_grid_acquisition(g, [[2, 2, 2]], phi_on_axis=0.7)
    assert acq.theta[0] == 0.0 and acq.phi[0] == pytest.approx(0.7)
    assert acq.freq[0] == pytest.approx(SPEED_OF_LIGHT * 300.0 / (4 * math.pi))


def test_on_grid_infeasible_and_empty():
    g = KGrid((4, 4, 4), [5.0, 5.0, 5.0], [0.0, 0.0, 0.0])
    with pytest.raises(InfeasibleError):
        on_grid_acquisition(g, [[2, 2, 0]])
    assert len(on_grid_acquisition(g, np.zeros((0, 3), int))) == 0


def test_suggest_grid_covers_band():
    acq = expand_sweep("0:5:20", "0:30:330", "1e9:1e8:3e9", "HH")
    g = suggest_grid(acq, image_extent_m=2.0)
    kmin = 2 * math.pi * 1e9 / SPEED_OF_LIGHT
    kmax = 2 * math.pi * 3e9 / SPEED_OF_LIGHT
    lo = g.center[2] - g.half[2] * g.delta_k[2]
    hi = lo + (g.dims[2] - 1) * g.delta_k[2]
    assert lo <= 2 * kmin * math.cos(math.radians(20)) and hi >= 2 * kmax
    assert g.dims[2] * g.delta_k[2] >= 2 * kmax - 2 * kmin * math.cos(math.radians(20))
    stencil(acq, g)  # nothing out of band
    stencil(acq, g.with_interp("linear"))


def test_suggest_grid_explicit_dims():
    acq = expand_sweep("0:4:20", "0:10:350", "9e9:1e8:11e9", "HH")
    g = suggest_grid(acq, (1.0, 1.0, 2.0), dims=(16, 16, 32), interp="linear")
    assert g.dims == (16, 16, 32)
    stencil(acq, g)


def test_suggest_grid_degenerate():
    with pytest.raises(CannotSuggestError):
        suggest_grid(Acquisition.empty(), 1.0)
    with pytest.raises(CannotSuggestError):
        suggest_grid(_one(0.1, 0.2, 1e9), 1.0)
