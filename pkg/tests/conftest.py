"""Shared builders for the reference (default) setup used across tests."""

import numpy as np
import pytest

from arisbh.benchmarks import SystemParams
from arisbh.geometry import RisGeometry, SourceArray
from arisbh.scenario import ScenarioConfig
from arisbh.units import db_to_lin, dbm_to_watt


def make_system(h_ris=180.0, n_elements=300, alpha_max_sq_db=40.0, **kwargs) -> SystemParams:
    defaults = dict(
        source=SourceArray(
            m_antennas=16, spacing_wavelengths=0.5,
            gain=float(db_to_lin(8.0)), p_max=float(dbm_to_watt(20.0)),
        ),
        ris=RisGeometry(
            n_elements=n_elements, spacing_wavelengths=0.1,
            altitude=h_ris, wavelength=0.0857,
        ),
        beta0=float(db_to_lin(-43.3)),
        bandwidth_b=50e6,
        sigma_sq=float(dbm_to_watt(-80.0)),
        sigma_a_sq=float(dbm_to_watt(-80.0)),
        p_element=float(dbm_to_watt(-3.8)),
        alpha_max=float(np.sqrt(db_to_lin(alpha_max_sq_db))),
        p_max=float(dbm_to_watt(20.0)),
        p_max_a=float(dbm_to_watt(20.0)),
    )
    defaults.update(kwargs)
    return SystemParams(**defaults)


def make_scenario_config(d_g=1000.0, **kwargs) -> ScenarioConfig:
    defaults = dict(region_center=np.array([d_g, 0.0]))
    defaults.update(kwargs)
    return ScenarioConfig(**defaults)


@pytest.fixture(scope="session")
def table1_system() -> SystemParams:
    return make_system()
