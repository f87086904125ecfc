"""Proof objects, the checker, and the shipped corpus."""
from .checker import (  # noqa: F401
    BOUNDED, REJECTED, VERIFIED, Axiom, Deduction, Hyp, Node, Proof, Rule, System, Verdict,
    check_proof,
)
from .corpus import corpus_names, derive_corpus  # noqa: F401
from .schemas import SCHEMAS, check_axiom_instance  # noqa: F401
from .script import format_script, load_script, parse_script  # noqa: F401
