import numpy as np
import pytest

import starkit as sk


@pytest.fixture(scope="session")
def height():
    return sk.height()


@pytest.fixture(scope="session")
def multiplicative():
    return sk.multiplicative()


@pytest.fixture(scope="session")
def union_jack():
    return sk.union_jack()


@pytest.fixture(scope="session")
def irrational_cusp():
    return sk.irrational_cusp()


@pytest.fixture(scope="session")
def registered_bodies(height, multiplicative, union_jack, irrational_cusp):
    return {
        "height": height,
        "multiplicative": multiplicative,
        "union_jack": union_jack,
        "irrational_cusp": irrational_cusp,
    }


def brute_membership(f, x, q, eps, window=None, extra_reach=8):
    """Dumb reference oracle: enumerate every p in a wide window around
    round(q*x) and minimize F(qx - p) directly."""
    y = q * np.asarray(x, dtype=float)
    if window is None:
        window = int(np.ceil(q / 2)) + extra_reach
    p0 = np.round(y)
    span = np.arange(-window, window + 1)
    gx, gy = np.meshgrid(p0[0] + span, p0[1] + span, indexing="ij")
    ps = np.column_stack([gx.ravel(), gy.ravel()])
    z1, z2 = y[0] - ps[:, 0], y[1] - ps[:, 1]
    vals = f.eval_xy(z1, z2)
    # tie-break: nearest z, then lexicographic p (the documented rule)
    zinf = np.maximum(np.abs(z1), np.abs(z2))
    i = int(np.lexsort((ps[:, 1], ps[:, 0], zinf, vals))[0])
    best_val, best_p = float(vals[i]), (int(ps[i, 0]), int(ps[i, 1]))
    hit = best_val < q * eps
    return hit, best_val, best_p
