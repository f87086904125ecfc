"""The shipped proof corpus: scripts under ``corpus/`` checked by name."""
from __future__ import annotations

from pathlib import Path

from .checker import Proof
from .script import load_script

CORPUS_DIR = Path(__file__).with_name("corpus")


def corpus_names() -> list:
    return sorted(p.stem for p in CORPUS_DIR.glob("*.prf"))


def corpus_path(name: str) -> Path:
    return CORPUS_DIR / f"{name}.prf"


def derive_corpus(name: str) -> Proof:
    path = corpus_path(name)
    if not path.exists():
        raise KeyError(f"unknown corpus proof {name!r}; have {', '.join(corpus_names())}")
    return load_script(path)
