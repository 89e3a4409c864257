import os

import pytest

DATA = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture
def desk_csv():
    return os.path.join(DATA, "convergence_desk.csv")


@pytest.fixture
def trajectory_csvs():
    return tuple(os.path.join(DATA, f"path_{j:04d}.csv") for j in range(5))


@pytest.fixture
def slope_one_csv(tmp_path):
    """Synthetic convergence file lying exactly on a slope-1 line."""
    path = tmp_path / "exact.csv"
    lines = ["step_exponent,delta,error"]
    for l in range(4, 9):
        lines.append(f"{l},{2.0 ** -l!r},{8.0 * 2.0 ** -l!r}")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def constant_path_csv(tmp_path):
    path = tmp_path / "flat.csv"
    rows = ["t,y,I,truncated"] + [f"{t},,42.0,0" for t in range(11)]
    path.write_text("\n".join(rows) + "\n")
    return str(path)
