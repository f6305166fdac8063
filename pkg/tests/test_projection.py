"""Radiograph synthesis and the 2D<->3D mask transforms.

The rendering contract: pixel = floor(255 * clamp((mean - lo)/(hi - lo), 0, 1) + 0.5)
with the mean taken along the anterior-posterior axis. Half-counts round
away from zero, not to even.
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lungcover.grid import GridGeometry, Mask2D, Mask3D, VoxelVolume
from lungcover.projection import (
    DEFAULT_WINDOW,
    WindowSpec,
    extrude_mask,
    project_mask,
    render_drr,
)


def volume_from(values: np.ndarray, sx=1.0, sy=1.0, sz=1.0) -> VoxelVolume:
    nz, ny, nx = values.shape
    g = GridGeometry(nx=nx, ny=ny, nz=nz, sx=sx, sy=sy, sz=sz)
    return VoxelVolume(g, values.astype(np.int16))


def geometries(max_side=10):
    return st.tuples(st.integers(1, max_side), st.integers(1, max_side),
                     st.integers(1, max_side))


def mask3d_strategy(max_side=10):
    return st.builds(
        lambda dims, seed: _random_mask3d(dims, seed),
        geometries(max_side), st.integers(0, 2**31),
    )


def _random_mask3d(dims, seed) -> Mask3D:
    nx, ny, nz = dims
    g = GridGeometry(nx=nx, ny=ny, nz=nz, sx=1.0, sy=1.0, sz=1.0)
    bits = np.random.default_rng(seed).random(g.shape_zyx) < 0.35
    return Mask3D(g, bits, "right")


def _random_mask2d(dims, seed) -> Mask2D:
    nx, nz = dims
    bits = np.random.default_rng(seed).random((nz, nx)) < 0.35
    return Mask2D(nx=nx, nz=nz, sx=1.0, sz=1.0, bits=bits, label="left")


class TestRenderDrr:
    def test_window_endpoints_map_to_black_and_white(self):
        values = np.array([[[-1000, 200, -400]]], dtype=np.int16)
        img = render_drr(volume_from(values))
        assert img.pixels.tolist() == [[0, 255, 128]]

    def test_clamps_outside_window(self):
        values = np.array([[[-1024, 3071]]], dtype=np.int16)
        img = render_drr(volume_from(values))
        assert img.pixels.tolist() == [[0, 255]]

    def test_mean_along_anterior_posterior(self):
        # two voxels deep: (-1000 + 200) / 2 = -400 -> exact mid-gray
        values = np.zeros((1, 2, 1), dtype=np.int16)
        values[0, 0, 0] = -1000
        values[0, 1, 0] = 200
        img = render_drr(volume_from(values))
        assert img.pixels.tolist() == [[128]]

    def test_half_counts_round_away_from_zero(self):
        # 253/510 maps to 255*f + 0.5 = 127.0 after the +0.5 shift only if
        # f = 126.5/255, i.e. floor(...) = 127 while round-to-even gives 126.
        values = np.array([[[253]]], dtype=np.int16)
        img = render_drr(volume_from(values), WindowSpec(0.0, 510.0))
        assert img.pixels.tolist() == [[127]]

    def test_custom_window(self):
        values = np.array([[[50]]], dtype=np.int16)
        img = render_drr(volume_from(values), WindowSpec(0.0, 100.0))
        assert img.pixels.tolist() == [[128]]

    def test_dims_follow_volume(self):
        values = np.zeros((3, 4, 5), dtype=np.int16)
        img = render_drr(volume_from(values))
        assert (img.nx, img.nz) == (5, 3)
        assert img.pixels.shape == (3, 5)

    def test_rejects_inverted_window(self):
        with pytest.raises(ValueError):
            WindowSpec(200.0, -1000.0)

    @given(dims=geometries(8), seed=st.integers(0, 2**31))
    def test_formula_matches_reference_expression(self, dims, seed):
        nx, ny, nz = dims
        rng = np.random.default_rng(seed)
        values = rng.integers(-1024, 3072, size=(nz, ny, nx)).astype(np.int16)
        img = render_drr(volume_from(values))
        lo, hi = DEFAULT_WINDOW.lo, DEFAULT_WINDOW.hi
        frac = np.clip((values.mean(axis=1, dtype=np.float64) - lo) / (hi - lo), 0, 1)
        expected = np.floor(255.0 * frac + 0.5).astype(np.uint8)
        np.testing.assert_array_equal(img.pixels, expected)

    @given(dims=geometries(8), seed=st.integers(0, 2**31))
    def test_invariant_under_shuffle_within_y_columns(self, dims, seed):
        nx, ny, nz = dims
        rng = np.random.default_rng(seed)
        values = rng.integers(-1024, 3072, size=(nz, ny, nx)).astype(np.int16)
        shuffled = values.copy()
        for z in range(nz):
            for x in range(nx):
                rng.shuffle(shuffled[z, :, x])
        a = render_drr(volume_from(values))
        b = render_drr(volume_from(shuffled))
        np.testing.assert_array_equal(a.pixels, b.pixels)


class TestExtrudeProject:
    def test_extrude_replicates_along_y(self):
        bits = np.array([[True, False], [False, True], [True, True]])
        m = Mask2D(nx=2, nz=3, sx=1.5, sz=2.0, bits=bits, label="right")
        m3 = extrude_mask(m, ny=4, sy=0.5)
        assert m3.geometry == GridGeometry(nx=2, ny=4, nz=3, sx=1.5, sy=0.5, sz=2.0)
        assert m3.label == "right"
        for y in range(4):
            np.testing.assert_array_equal(m3.bits[:, y, :], bits)

    def test_project_is_silhouette(self):
        g = GridGeometry(nx=2, ny=3, nz=2, sx=1.0, sy=1.0, sz=1.0)
        bits = np.zeros(g.shape_zyx, dtype=bool)
        bits[0, 1, 0] = True  # only one y-slice set
        m2 = project_mask(Mask3D(g, bits, "left"))
        assert m2.bits.tolist() == [[True, False], [False, False]]
        assert (m2.nx, m2.nz, m2.sx, m2.sz) == (2, 2, 1.0, 1.0)
        assert m2.label == "left"

    @given(dims=st.tuples(st.integers(1, 10), st.integers(1, 10)),
           seed=st.integers(0, 2**31), ny=st.sampled_from([1, 3, 17]))
    def test_project_after_extrude_is_identity(self, dims, seed, ny):
        m = _random_mask2d(dims, seed)
        back = project_mask(extrude_mask(m, ny=ny, sy=1.0))
        np.testing.assert_array_equal(back.bits, m.bits)
        assert (back.nx, back.nz, back.sx, back.sz) == (m.nx, m.nz, m.sx, m.sz)
        assert back.label == m.label

    @given(mask=mask3d_strategy())
    def test_extrude_after_project_covers_original(self, mask):
        prism = extrude_mask(project_mask(mask), ny=mask.geometry.ny,
                             sy=mask.geometry.sy)
        assert not np.any(mask.bits & ~prism.bits)

    def test_empty_mask_round_trip(self):
        m = Mask2D(nx=3, nz=2, sx=1.0, sz=1.0,
                   bits=np.zeros((2, 3), dtype=bool), label="both")
        back = project_mask(extrude_mask(m, ny=5, sy=2.0))
        assert back.pixel_count == 0
