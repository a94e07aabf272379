import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gprotor.townes import a_star, default_profile  # noqa: E402


@pytest.fixture(scope="session")
def profile():
    return default_profile()


@pytest.fixture(scope="session")
def ast(profile):
    return a_star(profile)
