import pytest

from hierarchy_utils import make_hierarchy


@pytest.fixture
def h1():
    """Two-subtree fixture: root -> {Ethos -> {Slogans, Smears}, Pathos -> {Loaded Language}}."""
    return make_hierarchy(
        "persuasion",
        [
            ["persuasion", "Ethos"],
            ["persuasion", "Pathos"],
            ["Ethos", "Slogans"],
            ["Ethos", "Smears"],
            ["Pathos", "Loaded Language"],
        ],
        ["Slogans", "Smears", "Loaded Language"],
    )


@pytest.fixture
def flat3():
    """Three leaves hanging directly off the root."""
    return make_hierarchy(
        "root",
        [["root", "X"], ["root", "Y"], ["root", "Z"]],
        ["X", "Y", "Z"],
    )
