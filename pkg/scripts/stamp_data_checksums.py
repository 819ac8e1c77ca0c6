#!/usr/bin/env python3
"""Recompute the ``# sha256:`` header of bundled data files.

The checksum covers the non-comment, non-blank body lines joined by
newlines, matching what the loaders verify at read time. Run after editing
any file under ``src/pgfs/data/``.
"""

import hashlib
import sys
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "pgfs" / "data"


def stamp(path: Path) -> bool:
    lines = path.read_text("utf-8").splitlines()
    body = [
        ln for ln in lines if ln.strip() and not ln.startswith("#")
    ]
    digest = hashlib.sha256("\n".join(body).encode("utf-8")).hexdigest()
    out = []
    replaced = False
    for ln in lines:
        if ln.startswith("# sha256:"):
            out.append(f"# sha256: {digest}")
            replaced = True
        else:
            out.append(ln)
    if not replaced:
        raise SystemExit(f"{path}: no '# sha256:' header line to stamp")
    new_text = "\n".join(out) + "\n"
    changed = new_text != path.read_text("utf-8")
    if changed:
        path.write_text(new_text, "utf-8")
    return changed


def main() -> None:
    targets = [Path(p) for p in sys.argv[1:]] or sorted(DATA_DIR.iterdir())
    for path in targets:
        if path.suffix in (".tsv", ".txt", ".smi") and path.is_file():
            state = "stamped" if stamp(path) else "unchanged"
            print(f"{state}: {path.name}")


if __name__ == "__main__":
    main()
