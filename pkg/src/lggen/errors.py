"""Exception hierarchy shared across the package."""


class LggError(Exception):
    """Base class for all errors raised by this package."""


class GrammarParseError(LggError):
    """Syntax or structural error in a .lgg / .lex source file."""

    def __init__(self, message: str, *, file: str = "<string>", line: int = 0, column: int = 0):
        self.file = file
        self.line = line
        self.column = column
        loc = file
        if line:
            loc += f":{line}"
            if column:
                loc += f":{column}"
        super().__init__(f"{loc}: {message}")


class ResourceError(LggError):
    """Cross-file resource problem: unresolved names, call recursion, aggregated parse failures."""


class CompileError(LggError):
    """A grammar that cannot be compiled into an acyclic, epsilon-free transducer."""


class GenerationError(LggError):
    """Dataset generation cannot satisfy the requested configuration."""


class ExportError(LggError):
    """Dataset serialization failure (empty input, bad label, I/O)."""
