import numpy as np
import pytest


def write_profiles_csv(path, groups, labels=None):
    """Write ``groups`` (list of r_i x n arrays) in the treatment/replicate layout."""
    labels = labels or [f"t{i}" for i in range(len(groups))]
    n = np.asarray(groups[0]).shape[1]
    lines = ["treatment,replicate," + ",".join(f"x{k + 1}" for k in range(n))]
    for label, g in zip(labels, groups):
        for j, row in enumerate(np.asarray(g, dtype=float)):
            lines.append(f"{label},{j + 1}," + ",".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture
def null_groups(rng):
    return [rng.standard_normal((4, 32)) for _ in range(3)]

from hypothesis import settings

settings.register_profile("wfa", deadline=None, max_examples=100)
settings.load_profile("wfa")
