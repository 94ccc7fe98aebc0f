import logging

import pytest

from fdmac.channel import PowerConfig

logging.getLogger("fdmac").setLevel(logging.ERROR)


@pytest.fixture
def power_cfg():
    return PowerConfig()
