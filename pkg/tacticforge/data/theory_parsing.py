"""
Theory files.

One declaration per line, fields separated by tabs, `#` starts a comment
line:

    type    <name>  <arity>
    const   <name>  <type>
    def     <name>  <body term>
    axiom   <name>  <term>
    thm     <name>  <statement term>    <script>

Types and terms are canonical S-expressions. A script is a list of steps
separated by ` ; `, each step a tactic name followed by the names of the
theorems it takes as arguments.
"""
import logging

from enum import Enum
from pathlib import Path

from pydantic import BaseModel

from tacticforge.errors import TheoryFormatError


logger = logging.getLogger(__name__)


STEP_SEPARATOR = ";"


class DeclarationKind(str, Enum):
    type = "type"
    const = "const"
    definition = "def"
    axiom = "axiom"
    theorem = "thm"


class ScriptStep(BaseModel):
    tactic: str
    args: list[str] = []

    def __str__(self):
        return " ".join([self.tactic] + self.args)


class Declaration(BaseModel):
    kind: DeclarationKind
    name: str
    arity: int | None = None
    text: str | None = None
    script: list[ScriptStep] = []
    line: int = 0


class TheoryFile(BaseModel):
    declarations: list[Declaration] = []
    source: str = "<string>"

    def theorems(self) -> list[Declaration]:
        return [d for d in self.declarations if d.kind == DeclarationKind.theorem]

    def count(self, kind: DeclarationKind) -> int:
        return sum(1 for d in self.declarations if d.kind == kind)


_FIELD_COUNTS = {
    DeclarationKind.type: 3,
    DeclarationKind.const: 3,
    DeclarationKind.definition: 3,
    DeclarationKind.axiom: 3,
    DeclarationKind.theorem: 4,
}


def parse_script(text: str) -> list[ScriptStep]:
    steps = []
    for chunk in text.split(STEP_SEPARATOR):
        words = chunk.split()
        if words:
            steps.append(ScriptStep(tactic=words[0], args=words[1:]))
    return steps


def format_script(steps: list[ScriptStep]) -> str:
    return f" {STEP_SEPARATOR} ".join(str(step) for step in steps)


def parse_theory(text: str, source: str = "<string>") -> TheoryFile:
    """
    Raises:
        TheoryFormatError: unknown declaration kind, wrong field count, bad arity or empty script
    """

    declarations = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.rstrip("\n").split("\t")
        try:
            kind = DeclarationKind(fields[0].strip())
        except ValueError:
            raise TheoryFormatError(f"{source}:{lineno}: unknown declaration {fields[0]!r}")
        if len(fields) != _FIELD_COUNTS[kind]:
            raise TheoryFormatError(
                f"{source}:{lineno}: {kind.value} takes {_FIELD_COUNTS[kind]} fields, got {len(fields)}"
            )

        name = fields[1].strip()
        if kind == DeclarationKind.type:
            try:
                arity = int(fields[2])
            except ValueError:
                raise TheoryFormatError(f"{source}:{lineno}: bad arity {fields[2]!r}")
            declarations.append(Declaration(kind=kind, name=name, arity=arity, line=lineno))
        elif kind == DeclarationKind.theorem:
            script = parse_script(fields[3])
            if not script:
                raise TheoryFormatError(f"{source}:{lineno}: theorem {name} has an empty proof script")
            declarations.append(Declaration(
                kind=kind, name=name, text=fields[2].strip(), script=script, line=lineno
            ))
        else:
            declarations.append(Declaration(kind=kind, name=name, text=fields[2].strip(), line=lineno))

    return TheoryFile(declarations=declarations, source=source)


def read_theory(path: Path) -> TheoryFile:
    theory = parse_theory(Path(path).read_text(encoding="utf-8"), str(path))
    logger.info(f"Read {len(theory.declarations)} declarations from {path}")
    return theory


def format_theory(theory: TheoryFile) -> str:
    lines = []
    for d in theory.declarations:
        if d.kind == DeclarationKind.type:
            lines.append(f"{d.kind.value}\t{d.name}\t{d.arity}")
        elif d.kind == DeclarationKind.theorem:
            lines.append(f"{d.kind.value}\t{d.name}\t{d.text}\t{format_script(d.script)}")
        else:
            lines.append(f"{d.kind.value}\t{d.name}\t{d.text}")
    return "".join(line + "\n" for line in lines)


def write_theory(theory: TheoryFile, path: Path) -> Path:
    path.parent.mkdir(exist_ok=True, parents=True)
    path.write_text(format_theory(theory), encoding="utf-8")
    logger.info(f"Wrote {len(theory.declarations)} declarations to {path}")
    return path
