"""Per-criterion verdict lines collected during the acceptance run."""

LINES = []


def verdict(label: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
    LINES.append(line)
    print(line)
    assert ok, f"{label}: {detail}"
