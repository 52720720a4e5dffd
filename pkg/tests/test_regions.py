import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from copymove.errors import EmptyBand, NotEnoughRegions
from copymove.raster import BinaryMask
from copymove.regions import (
    Region,
    RegionPair,
    boundary_band,
    closing,
    connected_components,
    morphology,
    select_pair,
)

from conftest import square_mask
from oracles import flood_fill_components, naive_dilate, naive_erode


def blob_mask(seed, shape=(48, 48), p=0.08, grow=2):
    rng = np.random.default_rng(seed)
    seeds = rng.random(shape) < p
    return morphology(seeds, "dilate", grow) if grow else seeds


def test_empty_mask():
    assert connected_components(BinaryMask(np.zeros((8, 8), bool))) == []


def test_two_squares():
    regions = connected_components(square_mask((60, 60), [(5, 5, 10), (40, 30, 10)]), min_area=1)
    assert [r.area for r in regions] == [100, 100]
    assert regions[0].bbox == (5, 5, 14, 14)  # raster-first wins the tie
    assert [r.label for r in regions] == [1, 2]


def test_area_ordering_and_filter():
    m = square_mask((80, 80), [(0, 0, 5), (20, 20, 12), (50, 50, 15)])
    regions = connected_components(m)  # 25 px square is below the 64 px floor
    assert [r.area for r in regions] == [225, 144]


def test_diagonal_touch_is_one_component():
    bits = np.zeros((10, 10), bool)
    bits[2, 2] = bits[3, 3] = True
    assert len(connected_components(BinaryMask(bits), min_area=1)) == 1


@pytest.mark.parametrize("seed", range(8))
def test_components_match_flood_fill(seed):
    bits = np.random.default_rng(seed).random((30, 30)) < 0.35
    ours = connected_components(BinaryMask(bits), min_area=1)
    theirs = flood_fill_components(bits.tolist())
    assert sorted(map(frozenset, (r.pixels() for r in ours)), key=sorted) == \
        sorted(map(frozenset, theirs), key=sorted)
    # partition: every true pixel in exactly one component
    cover = sum(r.mask.astype(int) for r in ours)
    assert np.array_equal(cover, bits.astype(int))


def test_select_pair():
    bits = np.zeros((100, 100), bool)
    bits[0:20, 0:25] = True      # 500
    bits[40:64, 40:60] = True    # 480
    bits[80:87, 80:90] = True    # 70
    pair = select_pair(connected_components(BinaryMask(bits)))
    assert (pair.a.area, pair.b.area) == (500, 480)
    with pytest.raises(NotEnoughRegions):
        select_pair(connected_components(square_mask((30, 30), [(0, 0, 10)])))


def test_select_pair_tie_rule():
    # equal areas: the component whose first pixel comes first in raster order is A
    m = square_mask((60, 60), [(40, 5, 10), (5, 6, 10)])
    pair = select_pair(connected_components(m))
    assert pair.a.first_pixel == (5, 40)
    m2 = square_mask((60, 60), [(40, 7, 10), (5, 6, 10)])
    assert select_pair(connected_components(m2)).a.first_pixel == (6, 5)


def test_pair_rejects_overlap():
    a = np.zeros((5, 5), bool)
    a[1, 1] = True
    with pytest.raises(ValueError):
        RegionPair(Region(1, a), Region(2, a))


def test_dilate_single_pixel():
    bits = np.zeros((7, 7), bool)
    bits[3, 3] = True
    assert morphology(bits, "dilate", 1).sum() == 9
    corner = np.zeros((7, 7), bool)
    corner[0, 0] = True
    assert morphology(corner, "dilate", 1).sum() == 4


def test_erode_block():
    bits = np.zeros((7, 7), bool)
    bits[2:5, 2:5] = True
    out = morphology(bits, "erode", 1)
    assert out.sum() == 1 and out[3, 3]


def test_erode_treats_outside_as_background():
    out = morphology(np.ones((3, 3), bool), "erode", 1)
    assert out.sum() == 1 and out[1, 1]
    assert not morphology(np.ones((2, 5), bool), "erode", 1).any()


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("it", [1, 2, 3])
def test_morphology_matches_naive(seed, it):
    bits = np.random.default_rng(seed).random((20, 24)) < 0.5
    assert morphology(bits, "dilate", it).tolist() == naive_dilate(bits.tolist(), it)
    assert morphology(bits, "erode", it).tolist() == naive_erode(bits.tolist(), it)


@pytest.mark.parametrize("seed", range(6))
def test_closing_contains_region(seed):
    bits = blob_mask(seed)
    interior = np.zeros_like(bits)
    interior[3:-3, 3:-3] = True
    bits &= interior  # keep clear of the border, where erosion sees background
    closed = closing(bits, 1)
    assert np.all(closed[bits])
    assert closed.tolist() == naive_erode(naive_dilate(bits.tolist(), 1), 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_erosion_subset_dilation(seed, it):
    bits = blob_mask(seed, (32, 32), p=0.05, grow=1)
    assert np.all(morphology(bits, "erode", it) <= bits)
    assert np.all(bits <= morphology(bits, "dilate", it))


def test_band_of_square_w1():
    m = square_mask((30, 30), [(10, 10, 10)])
    region = connected_components(m)[0]
    band = boundary_band(region, m, 1)
    # set arithmetic: 12x12 dilation minus 8x8 erosion = 44 outside + 36 inside
    assert band.area == 80
    inside = (band.mask & region.mask).sum()
    assert inside == 36 and band.area - inside == 44


def test_band_of_single_pixel():
    bits = np.zeros((9, 9), bool)
    bits[4, 4] = True
    region = Region(1, bits)
    band = boundary_band(region, bits, 1)
    assert band.area == 9  # erosion is empty, band = full 3x3 dilation


def test_band_zero_width_rejected():
    region = Region(1, np.ones((3, 3), bool))
    with pytest.raises(ValueError):
        boundary_band(region, region.mask, 0)


def test_band_clips_border():
    m = square_mask((40, 40), [(0, 0, 12)])
    region = connected_components(m)[0]
    band = boundary_band(region, m, 4, clip_margin=3)
    vs, us = np.nonzero(band.mask)
    assert us.min() >= 3 and vs.min() >= 3


def test_band_fully_clipped_is_empty():
    bits = np.zeros((20, 20), bool)
    bits[0:2, 0:2] = True
    with pytest.raises(EmptyBand):
        boundary_band(Region(1, bits), bits, 1, clip_margin=4)


def test_band_within_chebyshev_distance_of_contour():
    bits = blob_mask(3, (60, 60), p=0.01, grow=5)
    region = connected_components(BinaryMask(bits))[0]
    w = 3
    band = boundary_band(region, bits, w)
    contour = region.mask & ~morphology(region, "erode", 1)
    near = morphology(contour, "dilate", w)
    assert np.all(near[band.mask])


def test_band_excludes_other_and_swap_symmetry():
    m = square_mask((60, 60), [(5, 5, 20), (27, 10, 20)])  # 2 px apart
    pair = select_pair(connected_components(m))
    ba = boundary_band(pair.a, m, 4, 4, pair.b)
    bb = boundary_band(pair.b, m, 4, 4, pair.a)
    assert not (ba.mask & pair.b.mask).any()
    assert not (bb.mask & pair.a.mask).any()
    sw = pair.swapped()
    assert np.array_equal(boundary_band(sw.b, m, 4, 4, sw.a).mask, ba.mask)
    assert np.array_equal(boundary_band(sw.a, m, 4, 4, sw.b).mask, bb.mask)
