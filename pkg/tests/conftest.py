import numpy as np
import pytest

from spivc.qr import qr_encode
from spivc.scenes import text_bitmap
from spivc.vc_opaque import fit_secret

QR_TEXT = "Nanophotonics Research Center"


@pytest.fixture(scope="session")
def v4h_symbol():
    return qr_encode(QR_TEXT, 4, "H")


@pytest.fixture(scope="session")
def ok_secret_33(v4h_symbol):
    return fit_secret(v4h_symbol, text_bitmap("OK", 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
