"""Bundled example inputs: reference transitions and a synthetic fidelity table."""

from importlib import resources
from pathlib import Path

FIXTURES = ("so2_to_so2plus", "so2minus_to_so2", "identity")


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled parameter file (or the fidelity table)."""
    filename = name if "." in name else f"{name}.yaml"
    path = resources.files(__package__).joinpath(filename)
    with resources.as_file(path) as concrete:
        return Path(concrete)
