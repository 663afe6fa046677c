import numpy as np
import pytest

from lago import LinkStream
from lago.exceptions import SelfLoop, UnknownVariant
from lago.validation import (check_expectation, check_link_stream, check_omega, check_seed,
                             check_variant)


def test_check_link_stream():
    s = LinkStream([("a", "b", 0)])
    assert check_link_stream(s) is s
    built = check_link_stream([(10, "a", "b"), (30, "b", "c", "extra")])
    assert built.tick_duration == 20 and built.m == 2
    with pytest.raises(ValueError):
        check_link_stream([(0, "a")])
    with pytest.raises(ValueError):
        check_link_stream(np.zeros(3))
    with pytest.raises(TypeError):
        check_link_stream("0 a b")
    with pytest.raises(SelfLoop):
        check_link_stream([(0, "a", "a")])


def test_scalar_checks():
    assert check_expectation("jm") == "JM"
    assert check_omega(15) == 15.0
    assert check_variant("LV×E⋆") == "LVxE*"
    for bad in (-0.1, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            check_omega(bad)
    with pytest.raises(TypeError):
        check_omega("1")
    with pytest.raises(TypeError):
        check_omega(True)
    with pytest.raises(ValueError):
        check_expectation("xx")
    with pytest.raises(UnknownVariant):
        check_variant("LVX")


def test_check_seed():
    assert check_seed(7) == 7
    assert check_seed(np.int64(7)) == 7
    assert 0 <= check_seed(None) < 2**63
    assert check_seed(np.random.default_rng(1)) == check_seed(np.random.default_rng(1))
    assert check_seed(np.random.RandomState(1)) == check_seed(np.random.RandomState(1))
    with pytest.raises(ValueError):
        check_seed(-3)
