import pytest
import xdoctest as xdoc  # type: ignore

from sms_sim import settings, transcript


@pytest.mark.parametrize("module", [settings, transcript])
def test_sms_sim_doctests(module):
    return_code = xdoc.doctest_module(module.__file__, command="all", verbose=1)
    assert not return_code["failed"]
