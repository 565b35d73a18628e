from __future__ import annotations

import numpy as np
import pytest

from factorcount.rmt.tracy_widom import tw_table


@pytest.fixture(scope="session")
def tw1():
    return tw_table(1)


@pytest.fixture(scope="session")
def tw2():
    return tw_table(2)


def write_prices(path, values, assets=None, start=1_600_000_000, step=86_400):
    values = np.asarray(values, dtype=float)
    assets = assets or [f"A{i}" for i in range(values.shape[1])]
    lines = ["timestamp," + ",".join(assets)]
    for i, row in enumerate(values):
        lines.append(",".join([str(start + i * step), *(repr(float(v)) for v in row)]))
    path.write_text("\n".join(lines) + "\n")
    return path
