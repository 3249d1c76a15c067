import numpy as np
import pytest

from opgeom.fieldlang import ChartBox, MatrixField2, parse_scalar_expr
from opgeom.geometry import STANDARD_BASIS
from opgeom.harness import PRESETS, config_from_dict, preset_config


def basis_fields():
    return tuple(MatrixField2.constant(m) for m in STANDARD_BASIS)


def scaled_fields(fields, text):
    factor = parse_scalar_expr(text)
    return tuple(f.scale(factor) for f in fields)


@pytest.fixture(scope="session")
def preset_ops():
    """Operators of the six catalog presets, built once per session."""
    return {name: config_from_dict(preset_config(name)).op for name in PRESETS}


@pytest.fixture
def box():
    return ChartBox(sample_count=25, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, whenever that module ran."""
    import sys

    module = next((m for k, m in sys.modules.items() if k.endswith("test_acceptance")), None)
    if module is None:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in module.CRITERIA.items():
        ok, detail = module.RESULTS.get(n, (False, "not run"))
        terminalreporter.write_line(f"criterion {n:2d}  {'PASS' if ok else 'FAIL'}  {title}: {detail}")
