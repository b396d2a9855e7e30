import json

import pytest

from fixevent.errors import DomainError
from fixevent.simstudy import METHODS, SimConfig, replication_seed, run_simstudy


@pytest.fixture(scope="module")
def tiny():
    return run_simstudy(SimConfig(replications=3, settings=((120, 8),), rho_values=(0.5, 0.9), master_seed=1))


def test_cells_complete(tiny):
    assert len(tiny.cells) == 2 * len(METHODS)
    assert {c.method for c in tiny.cells} == set(METHODS)
    for c in tiny.cells:
        assert len(c.replication_means) == 3
        assert c.mc_se > 0 and 0 <= c.coverage <= 1


def test_mc_se_definition(tiny):
    import numpy as np

    c = tiny.cell(120, 8, 0.5, "gauss")
    assert c.mc_se == pytest.approx(np.std(c.replication_means, ddof=1) / np.sqrt(3), rel=1e-12)
    assert c.mean_interval_score == pytest.approx(np.mean(c.replication_means), rel=1e-12)


def test_deterministic(tiny):
    again = run_simstudy(tiny.config)
    assert json.dumps(again.to_dict()) == json.dumps(tiny.to_dict())


def test_seed_changes_results(tiny):
    other = run_simstudy(SimConfig(replications=3, settings=((120, 8),), rho_values=(0.5, 0.9), master_seed=2))
    assert other.cells[0].mean_interval_score != tiny.cells[0].mean_interval_score


def test_common_random_numbers_across_rho():
    assert replication_seed(7, 1, 3) == [7, 1, 3]


def test_config_validation():
    with pytest.raises(DomainError):
        SimConfig(replications=0)
    with pytest.raises(DomainError):
        SimConfig(settings=())
