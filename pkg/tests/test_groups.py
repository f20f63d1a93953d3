import itertools
import math

import numpy as np
import pytest

from walkbounds.groups import (
    CyclicGroup,
    DirectProduct,
    FreeAbelianGroup,
    FreeGroup,
    FreeProduct,
    ball_census,
    exact_growth_rate,
    group_from_config,
    growth_estimate,
)

LOG3 = math.log(3)


def test_free_inverse_cancels(f2):
    assert f2.compose(f2.element("a"), f2.element("a^-1")) == f2.identity()


def test_cyclic_order_relation():
    c3 = CyclicGroup(3, "b")
    assert c3.compose(c3.element("b"), c3.element("b^2")) == c3.identity()


def test_free_product_reduction(modular):
    x = modular.element("a b")
    y = modular.element("b^2 a")
    assert modular.compose(x, y) == modular.identity()


def test_identity_and_inverse(f2):
    e = f2.identity()
    assert f2.invert(e) == e
    assert f2.format(f2.invert(f2.element("a b^-1 a"))) == "a^-1 b a^-1"


def test_abelian_inverse():
    z2 = FreeAbelianGroup(2)
    assert z2.invert((3, -1)) == (-3, 1)


def test_word_lengths(f2):
    assert f2.word_length(f2.element("a b a b^-1")) == 4
    fw = FreeGroup(2, ["a", "b"], {"b": 0.5})
    assert fw.word_length(fw.element("a b")) == pytest.approx(1.5)
    c3 = CyclicGroup(3, "b")
    assert c3.word_length(c3.element("b^2")) == 1


def test_brute_force_multiplication_table(modular):
    """Products of short words agree with letter-by-letter composition."""
    letters = ["a", "b", "b^2"]
    words = [" ".join(w) for n in range(4) for w in itertools.product(letters, repeat=n)]
    for u in words[:40]:
        for v in words[:40]:
            x = modular.element(u) if u else modular.identity()
            y = modular.element(v) if v else modular.identity()
            z = modular.identity()
            for t in (u + " " + v).split():
                z = modular.compose(z, modular.element(t))
            assert modular.compose(x, y) == z


def test_free_group_census():
    c = ball_census(FreeGroup(2), 2)
    assert c.sphere_sizes == [1, 4, 12]
    assert c.ball_sizes[-1] == 17


def test_z_census():
    c = ball_census(FreeAbelianGroup(1), 3)
    assert c.sphere_sizes == [1, 2, 2, 2]
    assert c.ball_sizes[-1] == 7


def test_modular_census(modular):
    assert ball_census(modular, 3).sphere_sizes == [1, 3, 4, 6]
    # spheres double every two steps, so v = (1/2) log 2
    s = ball_census(modular, 14).sphere_sizes
    assert all(s[n] == 2 * s[n - 2] for n in range(3, 15))
    est = growth_estimate(ball_census(modular, 30))
    assert est.v_ratio == pytest.approx(0.5 * math.log(2), abs=0.01)


def test_free_growth_rate_from_census():
    est = growth_estimate(ball_census(FreeGroup(2), 10))
    assert abs(est.v_ratio - LOG3) < 1e-12
    assert not est.subexponential


def test_abelian_growth_is_subexponential():
    est = growth_estimate(ball_census(FreeAbelianGroup(2), 20))
    assert est.v_ratio <= 0.2
    assert est.subexponential


@pytest.mark.parametrize("group, v", [
    (FreeGroup(2), math.log(3)),
    (FreeGroup(3), math.log(5)),
    (FreeProduct([CyclicGroup(2, "a"), CyclicGroup(3, "b")]), 0.5 * math.log(2)),
    (FreeProduct([CyclicGroup(2, "a"), CyclicGroup(2, "b"), CyclicGroup(2, "c")]), math.log(2)),
    (FreeAbelianGroup(3), 0.0),
    (FreeGroup(1), 0.0),
])
def test_exact_growth_rate(group, v):
    assert exact_growth_rate(group) == pytest.approx(v, abs=1e-12)


def test_exact_growth_matches_census_for_z3_z4():
    g = FreeProduct([CyclicGroup(3, "a"), CyclicGroup(4, "b")])
    est = growth_estimate(ball_census(g, 16))
    assert exact_growth_rate(g) == pytest.approx(est.v_ratio, abs=1e-3)


def test_weighted_free_growth_rate():
    # 1/f = 2 (1 - z)/(1 + z) + 2 (1 - z^0.5)/(1 + z^0.5) - 3 = 0 at z = exp(-v)
    v = exact_growth_rate(FreeGroup(2, ["a", "b"], {"b": 0.5}))
    z = math.exp(-v)
    resid = (1 - z) / (1 + z) + (1 - z**0.5) / (1 + z**0.5) - 1
    assert abs(resid) < 1e-12
    assert v == pytest.approx(1.5126152, abs=1e-6)


def test_direct_product_lengths():
    g = DirectProduct([FreeAbelianGroup(1, ["a"]), FreeGroup(1, ["a"])])
    x = g.element("a^2 | a^-3")
    assert g.word_length(x) == 5


def test_config_round_trip():
    for cfg in [
        {"type": "free", "rank": 2, "labels": ["a", "b"], "weights": {"b": 0.5}},
        {"type": "free_product", "factors": [{"label": "a", "order": 2}, {"label": "b", "order": 3}]},
        {"type": "free_abelian", "rank": 2},
    ]:
        g = group_from_config(cfg)
        assert group_from_config(g.to_config()).to_config() == g.to_config()


@pytest.mark.parametrize("bad", [
    {"type": "free", "rank": 0},
    {"type": "cyclic", "order": 1},
    {"type": "free", "rank": 2, "labels": ["a", "b"], "weights": {"b": 0.0}},
    {"type": "nope"},
])
def test_invalid_groups(bad):
    with pytest.raises(ValueError):
        group_from_config(bad)


def test_unknown_symbol(f2):
    with pytest.raises(ValueError):
        f2.element("c")


def test_codec_round_trip(modular):
    codec = modular.codec()
    elems = [modular.element(w) for w in ["a", "a b", "b^2 a b", "a b a b^2 a"]] + [modular.identity()]
    codes = codec.encode(elems)
    assert codec.decode(codes) == elems
    np.testing.assert_array_equal(codec.lengths(codes), [modular.word_length(x) for x in elems])
