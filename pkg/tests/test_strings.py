import pytest
from hypothesis import given, strategies as st

from gwcantor.strings import (
    MAX_ENUM_DEPTH,
    all_trees,
    boundary,
    canonical,
    decode_string,
    down_closure,
    dumps_set,
    encode_set,
    enumerate_level,
    extendible_shapes,
    is_prefix_closed,
    is_prefix_free,
    loads_set,
    minimal_prefix_free,
    neighbor,
    node_index,
    omega,
    parse_set,
    truncate_to_tree,
)

bits = st.text(alphabet="01", max_size=5)
string_sets = st.frozensets(bits, max_size=20)


def test_enumerate_level_examples():
    assert enumerate_level(0) == [""]
    assert enumerate_level(2) == ["00", "01", "10", "11"]
    lvl3 = enumerate_level(3)
    assert len(lvl3) == 8 and lvl3[0] == "000" and lvl3[-1] == "111"


def test_enumerate_level_rejects_depth_over_ceiling():
    with pytest.raises(ValueError):
        enumerate_level(5, ceiling=4)
    with pytest.raises(ValueError):
        enumerate_level(-1)


@pytest.mark.parametrize("n", range(0, 8))
def test_omega_size_and_uniqueness(n):
    w = omega(n)
    assert len(w) == 2**n - 1 == len(set(w))
    assert all(len(s) < n for s in w)
    assert w == canonical(w)


def test_node_index_is_shortlex_position():
    assert [node_index(s) for s in omega(4)] == list(range(15))


def test_truncate_to_tree_examples():
    assert truncate_to_tree({"", "0", "1", "01"}, 3) == {"", "0", "1", "01"}
    assert truncate_to_tree({"0", "01"}, 3) == frozenset()
    assert truncate_to_tree({"", "1", "01"}, 3) == {"", "1"}


def test_minimal_prefix_free_examples():
    assert minimal_prefix_free({"0", "00", "01", "1"}) == {"0", "1"}
    assert minimal_prefix_free(set()) == frozenset()
    assert minimal_prefix_free({"00", "01", "1", "110"}) == {"00", "01", "1"}


def test_boundary_examples():
    assert boundary(set(), 2) == {""}
    assert boundary({"", "0"}, 2) == {"1"}
    assert boundary({"", "0", "1"}, 3) == {"00", "01", "10", "11"}


def test_neighbor():
    assert neighbor("0") == "1" and neighbor("010") == "011"
    with pytest.raises(ValueError):
        neighbor("")


def test_tree_counts():
    assert [len(all_trees(n)) for n in range(5)] == [1, 2, 5, 26, 677]
    assert [len(extendible_shapes(n)) for n in range(1, 5)] == [1, 3, 15, 255]


@pytest.mark.parametrize("n", range(0, 4))
def test_tree_enumeration_matches_brute_force(n):
    universe = omega(n)
    brute = set()
    for mask in range(1 << len(universe)):
        S = frozenset(universe[i] for i in range(len(universe)) if mask >> i & 1)
        if is_prefix_closed(S):
            brute.add(S)
    assert brute == set(all_trees(n))


def test_enumeration_ceiling():
    with pytest.raises(ValueError):
        all_trees(MAX_ENUM_DEPTH + 1)


@given(string_sets, st.integers(0, 6))
def test_truncate_output_is_prefix_closed_subset(S, n):
    T = truncate_to_tree(S, n)
    assert is_prefix_closed(T)
    assert T <= S
    assert all(len(s) < n for s in T)


@given(string_sets)
def test_minimal_prefix_free_idempotent_antichain(U):
    M = minimal_prefix_free(U)
    assert is_prefix_free(M)
    assert minimal_prefix_free(M) == M
    assert all(any(u.startswith(m) for m in M) for u in U)


@given(string_sets, st.integers(1, 5))
def test_boundary_pins_the_tree(S, n):
    T = truncate_to_tree(S, n)
    B = boundary(T, n)
    assert not (T & B)
    for s in omega(n):
        if s not in T:
            assert any(s[:k] in B for k in range(len(s) + 1))


@given(string_sets)
def test_serialization_round_trip(S):
    assert loads_set(dumps_set(S)) == S
    assert parse_set(",".join(encode_set(S))) == S


def test_serialization_format():
    assert encode_set({"1", "", "0", "00"}) == ["e", "0", "1", "00"]
    assert dumps_set({"", "0"}) == '["e", "0"]'
    assert parse_set("e,0,01") == {"", "0", "01"}
    with pytest.raises(ValueError):
        decode_string("012")


@given(string_sets)
def test_down_closure_is_prefix_closed(S):
    D = down_closure(S)
    assert is_prefix_closed(D) and S <= D
