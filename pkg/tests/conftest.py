import pytest

from tabulo import TableRegistry


@pytest.fixture
def reg() -> TableRegistry:
    return TableRegistry()
