"""Exception hierarchy shared by every ffgraph module."""


class FFGraphError(Exception):
    """Base class for all library errors."""


class BackwardEdge(FFGraphError, ValueError):
    def __init__(self, src, dst):
        self.src, self.dst = int(src), int(dst)
        super().__init__(f"backward edge ({self.src}, {self.dst}): feedforward graphs need src <= dst")


class OutOfRange(FFGraphError, IndexError):
    pass


class ParseError(FFGraphError, ValueError):
    """Malformed graph file or configuration.

    ``line`` is the 1-based line of a graph file, ``key`` the offending
    configuration key path; either may be None.
    """

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ZeroOutDegree(FFGraphError, ValueError):
    pass


class ZeroInDegree(FFGraphError, ValueError):
    pass


class SizeLimit(FFGraphError, ValueError):
    pass


class InvalidDegree(FFGraphError, ValueError):
    pass


class PreconditionFailed(FFGraphError, ValueError):
    pass


class InsufficientData(FFGraphError, ValueError):
    pass
