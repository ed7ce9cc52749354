import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hybridsat.covering import (
    BinarySpace, ChoiceSpace, CoverError, block_sizes, build_binary_cover, build_choice_cover,
    covering_radius_binary, dump_cover, entropy2, greedy_binary_cover, parse_cover, verify_cover,
)


def ball_volume(b, r):
    return sum(math.comb(b, i) for i in range(r + 1))


def test_n3_radius1_cover():
    cover = build_binary_cover(3, Fraction(1, 3), 1, use_cache=False)
    assert sorted(cover.centers) == [(0, 0, 0), (1, 1, 1)]
    assert cover.radius == 1


def test_float_rho_is_read_as_fraction():
    assert build_binary_cover(3, 1 / 3, 1, use_cache=False).radius == 1


def test_radius_zero_gives_all_points():
    cover = build_binary_cover(4, 0, 1, use_cache=False)
    assert len(cover) == 16
    assert len(set(cover.centers)) == 16


def test_n8_two_blocks():
    cover = build_binary_cover(8, Fraction(1, 4), 2, use_cache=False)
    assert cover.block_sizes == (4, 4)
    assert cover.block_radii == (1, 1)
    assert cover.block_covers == [[0, 7, 8, 15], [0, 7, 8, 15]]
    assert len(cover) == 16
    assert verify_cover(cover.centers, cover.radius, BinarySpace(8))


def test_product_radius_is_sum_of_block_radii():
    cover = build_binary_cover(10, Fraction(1, 3), 3, use_cache=False)
    assert cover.block_sizes == (4, 4, 2)
    assert cover.radius == sum(cover.block_radii) == 2
    assert covering_radius_binary(cover.centers, 10) <= cover.radius


def test_block_sizes_remainder():
    assert block_sizes(10, 3) == [4, 4, 2]
    assert block_sizes(9, 3) == [3, 3, 3]
    with pytest.raises(CoverError):
        block_sizes(5, 0)


def test_rejects_bad_parameters():
    with pytest.raises(CoverError):
        build_binary_cover(4, Fraction(1, 2), use_cache=False)
    with pytest.raises(CoverError):
        greedy_binary_cover(25, 3)


@pytest.mark.parametrize("k, t, size", [(3, 1, 3), (3, 2, 9), (3, 3, 6), (3, 4, 9), (3, 5, 31), (3, 6, 22), (2, 2, 2)])
def test_choice_code_sizes(k, t, size):
    code = build_choice_cover(k, t)
    assert code.radius == t // k
    assert len(code) == size
    assert verify_cover(code.words, code.radius, ChoiceSpace(k, t))


def test_choice_code_k3_t3_respects_sphere_bound():
    # ball of radius 1 in {1,2,3}^3 has 1 + 3*2 = 7 points
    assert len(build_choice_cover(3, 3)) >= math.ceil(27 / 7)


def test_choice_code_k2_t2_is_minimum():
    code = build_choice_cover(2, 2)
    assert code.words == [(1, 1), (1, 2)]
    words = list(itertools.product((1, 2), repeat=2))
    assert not any(verify_cover([w], 1, ChoiceSpace(2, 2)) for w in words)


def test_verify_cover_examples():
    assert verify_cover([(0, 0, 0), (1, 1, 1)], 1, BinarySpace(3))
    assert not verify_cover([(0, 0, 0)], 1, BinarySpace(3))
    assert verify_cover(list(range(8)), 0, BinarySpace(3))
    assert verify_cover(list(itertools.product((1, 2, 3), repeat=2)), 0, ChoiceSpace(3, 2))
    with pytest.raises(CoverError):
        verify_cover([0], 1, BinarySpace(30))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 14), st.sampled_from([Fraction(1, 5), Fraction(1, 4), Fraction(1, 3), Fraction(2, 5)]),
       st.integers(1, 4))
def test_every_cover_is_valid(n, rho, d):
    cover = build_binary_cover(n, rho, min(d, n), use_cache=False)
    assert verify_cover(cover.centers, cover.radius, BinarySpace(n))
    assert cover.radius <= math.floor(rho * n)


@pytest.mark.parametrize("n", [9, 12, 15])
def test_cover_size_between_sphere_bound_and_greedy_guarantee(n):
    cover = build_binary_cover(n, Fraction(1, 3), 3, use_cache=False)
    lower = upper = 1.0
    for b, r in zip(cover.block_sizes, cover.block_radii):
        v = ball_volume(b, r)
        lower *= math.ceil(2**b / v)
        upper *= 2**b / v * (1 + math.log(v))
    assert lower <= len(cover) <= upper
    assert [len(build_binary_cover(m, Fraction(1, 3), 3, use_cache=False)) for m in (9, 12, 15)] == [8, 64, 512]


@pytest.mark.parametrize("n", [9, 12, 15])
def test_asymptotic_rate_is_out_of_reach_with_small_blocks(n):
    # With three blocks of n/3 bits the sphere-covering bound alone keeps log2|C|/n
    # more than 0.1 above 1 - h(1/3), so no cover of this shape can get closer.
    b = n // 3
    sphere = 3 * math.log2(math.ceil(2**b / ball_volume(b, b // 3))) / n
    assert sphere > (1 - entropy2(1 / 3)) + 0.1


def test_dump_parse_round_trip():
    cover = build_binary_cover(6, Fraction(1, 3), 2, use_cache=False)
    back = parse_cover(dump_cover(cover, Fraction(1, 3)))
    assert back.centers == cover.centers
    assert (back.radius, back.block_param, back.block_sizes, back.block_radii) == (
        cover.radius, cover.block_param, cover.block_sizes, cover.block_radii)


def test_parse_cover_rejects_garbage():
    with pytest.raises(CoverError):
        parse_cover("# cover n=2 radius=0 d=1\n0x\n")
    with pytest.raises(CoverError):
        parse_cover("# cover n=3 radius=0 d=1\n01\n")


def test_cache_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("HYBRIDSAT_CACHE", str(tmp_path))
    first = build_binary_cover(7, Fraction(1, 3), 1)
    files = list(tmp_path.iterdir())
    assert [p.name for p in files] == ["cover_n7_rho1-3_d1.txt"]
    again = build_binary_cover(7, Fraction(1, 3), 1)
    assert again.centers == first.centers
    files[0].write_text("garbage")
    assert build_binary_cover(7, Fraction(1, 3), 1).centers == first.centers
