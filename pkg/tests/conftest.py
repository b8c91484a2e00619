import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def backend_names():
    from qperc import kernels

    return kernels.available_backends()
