"""Shared fixtures.

The 4-dim mixture CMTM run is the one genuinely expensive fixture (about two
seconds); it is session-scoped and reused by the kernel, diagnostics, and
acceptance tests that check selection/acceptance tables against reference
windows.
"""

import pytest

from acmtm import ExperimentSpec, RegionSpec, SamplerSettings, run_experiment


@pytest.fixture(scope="session")
def mixture4d_cmtm_result():
    """One 10^4-iteration CMTM run on the 4-dim mixture, generic m=20 grid,
    with the X_2 >= 8 region split tabulated."""
    spec = ExperimentSpec(
        target={"kind": "mixture_4d"},
        sampler=SamplerSettings(kind="cmtm", m=20),
        iterations=10_000,
        burn_in=5_000,
        base_seed=2026,
        label="fixture_cmtm_4d",
        region=RegionSpec(coordinate=2, threshold=8.0),
    )
    return run_experiment(spec, 0)
