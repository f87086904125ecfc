"""Regenerate the proof scripts under src/causalsum/proofs/corpus/."""
import argparse

from causalsum.proofs.builder import CORPUS, Builder  # noqa: F401
from causalsum.proofs.corpus import CORPUS_DIR
from causalsum.proofs.script import format_script


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--only", nargs="*", help="names to rebuild")
    args = ap.parse_args()
    CORPUS_DIR.mkdir(exist_ok=True)
    for name, build in CORPUS.items():
        if args.only and name not in args.only:
            continue
        proof = build()
        (CORPUS_DIR / f"{name}.prf").write_text(format_script(proof))
        print(f"wrote {name}.prf ({len(proof.nodes)} nodes)")


if __name__ == "__main__":
    main()
