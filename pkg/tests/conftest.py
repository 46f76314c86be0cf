import numpy as np
import pytest


@pytest.fixture
def write_csv(tmp_path):
    """Write rows to a temporary CSV file and return its path."""

    def _write(rows, name="panel.csv", header=None, delimiter=","):
        path = tmp_path / name
        lines = []
        if header is not None:
            lines.append(delimiter.join(header))
        for row in rows:
            lines.append(delimiter.join(repr(float(v)) for v in row))
        path.write_text("\n".join(lines) + "\n")
        return str(path)

    return _write


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
