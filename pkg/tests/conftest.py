"""
Pytest configuration and fixtures for TDM toolchain tests.
"""

from collections.abc import Callable
from pathlib import Path

import pytest

from tdm.checker import ResolvedModel, check
from tdm.config import setup_logging
from tdm.frontend import parse_model
from tdm.model import Model

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture(autouse=True)
def quiet_logging():
    """Route structlog through the project setup at a level tests don't see."""
    setup_logging("ERROR")
    yield


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN


@pytest.fixture
def set_source() -> str:
    """Source text of the canonical Set corpus."""
    return (CORPUS / "set.tdm").read_text(encoding="utf-8")


@pytest.fixture
def buffer_source() -> str:
    return (CORPUS / "buffer.tdm").read_text(encoding="utf-8")


@pytest.fixture
def set_model(set_source: str) -> Model:
    return parse_model(set_source, "corpus/set.tdm")


@pytest.fixture
def set_resolved(set_model: Model) -> ResolvedModel:
    return check(set_model)


@pytest.fixture
def buffer_resolved(buffer_source: str) -> ResolvedModel:
    return check(parse_model(buffer_source, "corpus/buffer.tdm"))


def with_control(source: str, *rules: str) -> str:
    """Insert a control block holding ``rules`` into a model without one."""
    block = "  control {\n" + "".join(f"    {rule}\n" for rule in rules) + "  }\n"
    marker = "  configuration "
    index = source.index(marker)
    return source[:index] + block + source[index:]


@pytest.fixture
def build() -> Callable[..., ResolvedModel]:
    """Parse and check Set corpus variants: ``build(source, *control_rules)``."""

    def _build(source: str, *rules: str) -> ResolvedModel:
        text = with_control(source, *rules) if rules else source
        return check(parse_model(text, "variant.tdm"))

    return _build


def with_spec(source: str, body: str, name: str = "Extra") -> str:
    """Append a configuration named ``name`` to the Set corpus meta-model."""
    block = f"\n  configuration {name} {{\n    {body}\n  }}\n}}\n\nproduct"
    return source.replace("\n}\n\nproduct", block, 1)


# Two interfaces, each with its own private inherent feature ``L``.
TWIN_SOURCE = """\
features Twins {
  types {
    feature A = { x }
  }
  configuration C {
    require A.x
  }
}

product P {
  interface I features (A) inherent {
    feature L = { on, off }
  } {
    attr n : int when L.on
  }
  interface J inherent {
    feature L = { on, off }
  } {
    method m() when L.off
  }
  implementation IOn realizes I when L.on {
  }
  implementation IOff realizes I when L.off {
  }
  implementation JOn realizes J when L.on {
  }
  implementation JOff realizes J when L.off {
  }
}
"""


@pytest.fixture
def twin_resolved() -> ResolvedModel:
    return check(parse_model(TWIN_SOURCE, "twins.tdm"))
