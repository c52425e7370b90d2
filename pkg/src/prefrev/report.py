"""Plain-text verification reports with stable, line-oriented rendering."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True, slots=True)
class CheckLine:
    ok: bool
    text: str

    def render(self) -> str:
        return f"[{'ok' if self.ok else 'FAIL'}] {self.text}"


@dataclass
class Report:
    title: str
    lines: list[CheckLine] = field(default_factory=list)

    def add(self, ok: bool, text: str) -> bool:
        self.lines.append(CheckLine(ok, text))
        return ok

    def extend(self, other: "Report") -> None:
        self.lines.extend(other.lines)

    @property
    def ok(self) -> bool:
        return all(line.ok for line in self.lines)

    @property
    def failures(self) -> list[CheckLine]:
        return [line for line in self.lines if not line.ok]

    def render(self) -> str:
        body = "\n".join(line.render() for line in self.lines)
        verdict = "PASS" if self.ok else "FAIL"
        return f"== {self.title} ==\n{body}\nresult: {verdict}\n"
