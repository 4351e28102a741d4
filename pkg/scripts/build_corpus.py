"""Rebuild the pinned reference corpus from CPython standard-library docstrings.

The output is committed as ``src/collabcrypt/data/corpus.txt``; this script only
documents how it was produced. Regenerating under a different interpreter
version yields a different (but equally usable) file.
"""
import ast
import sys
import sysconfig
from pathlib import Path

TARGET_CHARS = 700_000


def paragraphs(doc):
    for block in doc.split("\n\n"):
        lines = [ln.strip() for ln in block.splitlines()]
        text = " ".join(ln for ln in lines if ln)
        if len(text) < 60 or ">>>" in text:
            continue
        if not all(" " <= ch <= "~" for ch in text):
            continue
        letters = sum(ch.isalpha() or ch == " " for ch in text)
        if letters < 0.85 * len(text):
            continue
        yield text


def main(out):
    stdlib = Path(sysconfig.get_paths()["stdlib"])
    seen = set()
    parts = []
    total = 0
    for path in sorted(stdlib.glob("*.py")):
        try:
            tree = ast.parse(path.read_text(encoding="utf-8"))
        except (SyntaxError, UnicodeDecodeError):
            continue
        nodes = [tree] + [n for n in ast.walk(tree)
                          if isinstance(n, (ast.ClassDef, ast.FunctionDef, ast.AsyncFunctionDef))]
        for node in nodes:
            doc = ast.get_docstring(node)
            if not doc:
                continue
            for para in paragraphs(doc):
                if para in seen:
                    continue
                seen.add(para)
                parts.append(para)
                total += len(para) + 1
        if total >= TARGET_CHARS:
            break
    Path(out).write_text("\n".join(parts) + "\n", encoding="ascii")
    print(f"wrote {total} chars from {len(parts)} paragraphs", file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/collabcrypt/data/corpus.txt")
