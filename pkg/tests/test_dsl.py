from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from crnhopf import library
from crnhopf.dsl import DSLError, NetworkSource, format_network, load_network, parse_network

from conftest import networks


@given(networks())
def test_round_trip_identity(net):
    assert parse_network(format_network(net)) == net


@given(networks(), st.randoms())
def test_reaction_order_irrelevant_after_canonicalisation(net, rnd):
    lines = format_network(net).splitlines()
    body = lines[1:]
    rnd.shuffle(body)
    shuffled = parse_network("\n".join([lines[0]] + body))
    assert shuffled.canonical() == net.canonical()


@pytest.mark.parametrize("net", [library.lotka(), library.net5(2), library.net6(3), library.net8()])
def test_library_networks_round_trip(net):
    text = format_network(net)
    again = parse_network(text)
    assert again == net
    assert format_network(again) == text


def test_reversible_sugar_expands_to_two_edges():
    net = parse_network("species X, Y\nX <-> Y ; k=2,1/3\n")
    assert [(r.reactant, r.product, r.rate) for r in net.reactions] == [
        ((1, 0), (0, 1), Fraction(2)),
        ((0, 1), (1, 0), Fraction(1, 3)),
    ]


def test_comments_and_zero_complex():
    net = parse_network("# header\nspecies X\n0 -> X ; k=1  # inflow\nX -> 0 ; k=3/2\n")
    assert net.reactions[0].reactant == (0,)
    assert net.reactions[1].rate == Fraction(3, 2)


@pytest.mark.parametrize(
    "text, line",
    [
        ("species X\n-1X -> X ; k=1\n", 2),
        ("species X\n1.5X -> 0 ; k=1\n", 2),
        ("species X\nX -> 2X ; k=0\n", 2),
        ("species X\nX -> 2X ; k=-1\n", 2),
        ("species X, X\nX -> 0 ; k=1\n", 1),
        ("species X\nY -> X ; k=1\n", 2),
        ("X -> 0 ; k=1\n", 1),
        ("species X\n", None),
        ("species X\nX -> X ; k=1\n", 2),
        ("species X\nX -> 0 ; k=1\nX -> 0 ; k=2\n", 3),
    ],
)
def test_rejections_carry_position(text, line):
    with pytest.raises(DSLError) as err:
        parse_network(text)
    if line is not None:
        assert err.value.line == line


@given(st.integers(-5, -1), st.sampled_from(["X", "Y"]))
def test_negative_coefficients_rejected(c, name):
    with pytest.raises(DSLError):
        parse_network(f"species X, Y\n{c}{name} -> X ; k=1\n")


def test_constructor_invariants():
    with pytest.raises(ValueError):
        NetworkSource(("X",), ())
    with pytest.raises(ValueError):
        NetworkSource.from_reactions(("X",), [((1,), (0,), 0)])


def test_bundled_files_load(tmp_path):
    from importlib import resources

    files = [p for p in resources.files("crnhopf").joinpath("data").iterdir() if p.name.endswith(".crn")]
    assert len(files) >= 10
    for p in files:
        net = parse_network(p.read_text())
        out = tmp_path / p.name
        out.write_text(format_network(net))
        assert load_network(out) == net
