"""The exported criterion configs must stay in sync with the suite."""

from pathlib import Path

import yaml

from lesionsim import parse_config
from lesionsim.acceptance import CRITERION_CONFIGS

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs" / "acceptance"


def test_exported_configs_match_suite():
    for name, tree in CRITERION_CONFIGS.items():
        path = CONFIG_DIR / f"{name}.yaml"
        assert path.exists(), f"missing exported config {path}"
        on_disk = yaml.safe_load(path.read_text())
        assert parse_config(on_disk).canonical_json() == parse_config(tree).canonical_json(), name


def test_exported_configs_validate():
    for path in CONFIG_DIR.glob("*.yaml"):
        parse_config(yaml.safe_load(path.read_text()))
