"""Collects one result line per acceptance criterion for the terminal summary."""

LINES = []


def report(tag: str, ok: bool, detail: str) -> None:
    line = f"{tag} {'PASS' if ok else 'FAIL'}: {detail}"
    LINES.append(line)
    print(line)
