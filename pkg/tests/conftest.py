import numpy as np
import pytest

from mbpre import (
    EnvironmentLetter,
    IidEnvironment,
    ModelSpec,
    OffspringLaw,
    build_carpet_model,
    write_model,
)

# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("models")
    for name, p in (("carpet_p1", 1.0), ("carpet_p04", 0.4), ("carpet_p015", 0.15)):
        (d / f"{name}.json").write_text(write_model(build_carpet_model(p).model))
    return d


@pytest.fixture(scope="session")
def carpet_p1_file(model_dir):
    return str(model_dir / "carpet_p1.json")


@pytest.fixture(scope="session")
def carpet_p04_file(model_dir):
    return str(model_dir / "carpet_p04.json")


@pytest.fixture(scope="session")
def carpet_p015_file(model_dir):
    return str(model_dir / "carpet_p015.json")


def make_decoupled_model(p_zero=0.25):
    """Two independent single-type lines: each type bears 0 or 2 of itself."""
    law0 = OffspringLaw.from_pairs([((0, 0), p_zero), ((2, 0), 1.0 - p_zero)])
    law1 = OffspringLaw.from_pairs([((0, 0), p_zero), ((0, 2), 1.0 - p_zero)])
    letter = EnvironmentLetter("only", (law0, law1))
    return ModelSpec(2, (letter,), IidEnvironment(np.array([1.0])))


@pytest.fixture(scope="session")
def decoupled_supercritical():
    return make_decoupled_model(0.25)


@pytest.fixture(scope="session")
def decoupled_subcritical():
    return make_decoupled_model(0.75)


def make_point_mass_model(vector_by_type):
    """Every law a point mass; deterministic generation recursion."""
    n = len(vector_by_type)
    laws = tuple(OffspringLaw.from_pairs([(tuple(v), 1.0)]) for v in vector_by_type)
    return ModelSpec(n, (EnvironmentLetter("only", laws),), IidEnvironment(np.array([1.0])))


@pytest.fixture(scope="session")
def die_out_model():
    return make_point_mass_model([(0, 0), (0, 0)])


@pytest.fixture(scope="session")
def deterministic_line_model():
    return make_point_mass_model([(1, 0), (0, 1)])
