#!/usr/bin/env python3
# Copyright 2026 The twist Authors
# SPDX-License-Identifier: Apache-2.0
"""Build a deterministic English-ish character corpus from locally installed docs.

Collects POD documentation from the system Perl library (sorted by path), keeps
printable ASCII, and truncates at --bytes. Falls back to Python stdlib
docstrings when no Perl tree is present.
"""

import argparse
import ast
import pathlib
import re
import sys

PERL_ROOTS = ["/usr/share/perl/5.34.0", "/usr/share/perl5", "/usr/share/perl"]
_printable = re.compile(r"[^\x20-\x7e\n]")


def clean(text):
    text = _printable.sub("", text.replace("\t", "    "))
    return re.sub(r"\n{3,}", "\n\n", text)


def pod_blocks(text):
    out, inside = [], False
    for line in text.splitlines():
        if line.startswith("=cut"):
            inside = False
            continue
        if re.match(r"^=[a-zA-Z]", line):
            inside = True
        if inside:
            out.append(line)
    return "\n".join(out) + "\n"


def perl_source():
    for root in PERL_ROOTS:
        p = pathlib.Path(root)
        if not p.is_dir():
            continue
        files = sorted(f for f in p.rglob("*") if f.suffix in (".pod", ".pm") and f.is_file())
        if files:
            for f in files:
                text = f.read_text(encoding="latin-1")
                yield text if f.suffix == ".pod" else pod_blocks(text)
            return


def python_source():
    root = pathlib.Path(ast.__file__).parent
    for f in sorted(root.glob("*.py")):
        try:
            tree = ast.parse(f.read_text(encoding="utf-8"))
        except (SyntaxError, UnicodeDecodeError):
            continue
        for node in ast.walk(tree):
            if isinstance(node, (ast.Module, ast.ClassDef, ast.FunctionDef, ast.AsyncFunctionDef)):
                doc = ast.get_docstring(node)
                if doc:
                    yield doc + "\n\n"


def build(limit):
    parts, total = [], 0
    for src in (perl_source, python_source):
        for chunk in src():
            chunk = clean(chunk)
            parts.append(chunk)
            total += len(chunk)
            if total >= limit:
                return "".join(parts)[:limit]
        if total:
            break
    return "".join(parts)[:limit]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out")
    ap.add_argument("--bytes", type=int, default=1_150_000)
    args = ap.parse_args()
    text = build(args.bytes)
    if len(text) < 1_000_000 <= args.bytes:
        print(f"warning: corpus only {len(text)} bytes", file=sys.stderr)
    pathlib.Path(args.out).write_text(text, encoding="ascii")


if __name__ == "__main__":
    main()
