"""Line-item reports with a deterministic exit status."""
from __future__ import annotations

from dataclasses import dataclass, field

PASS, FAIL, UNDECIDED, INFO = "pass", "fail", "undecided", "info"

EXIT_PASS, EXIT_FAIL, EXIT_UNDECIDED, EXIT_INPUT = 0, 1, 2, 3


@dataclass(frozen=True)
class CheckItem:
    name: str
    status: str
    value: str = "-"
    precision: str = "exact"
    witness: str = "-"


@dataclass
class Report:
    command: str
    items: list = field(default_factory=list)

    def add(self, name, status, value="-", precision="exact", witness="-"):
        self.items.append(CheckItem(name, status, str(value), str(precision), str(witness)))

    @property
    def exit_code(self) -> int:
        statuses = {i.status for i in self.items}
        if FAIL in statuses:
            return EXIT_FAIL
        if UNDECIDED in statuses:
            return EXIT_UNDECIDED
        return EXIT_PASS

    def render(self, machine: bool = False) -> str:
        overall = {EXIT_PASS: PASS, EXIT_FAIL: FAIL, EXIT_UNDECIDED: UNDECIDED}[self.exit_code]
        if machine:
            lines = [f"item={i.name} status={i.status} value={_token(i.value)} "
                     f"precision={_token(i.precision)} witness={_token(i.witness)}" for i in self.items]
            lines.append(f"item=overall status={overall} value={self.exit_code} precision=- witness=-")
            return "\n".join(lines) + "\n"
        width = max([len(i.name) for i in self.items] + [8])
        lines = [f"# {self.command}"]
        for i in self.items:
            line = f"{i.name:<{width}}  {i.status:<9}  {i.value}"
            if i.precision != "exact":
                line += f"  [precision {i.precision}]"
            if i.witness != "-":
                line += f"\n{'':<{width}}  witness: {i.witness}"
            lines.append(line)
        lines.append(f"overall: {overall}")
        return "\n".join(lines) + "\n"


def _token(s: str) -> str:
    """Machine records are whitespace separated, so spaces inside values become underscores."""
    return "_".join(str(s).split()) or "-"
