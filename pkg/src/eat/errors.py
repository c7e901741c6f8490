"""Exception hierarchy shared across the package."""


class EatError(Exception):
    pass


class BioError(EatError, ValueError):
    """Malformed BIO2 tag sequence."""

    def __init__(self, message, index):
        super().__init__(f"{message} (token {index})")
        self.index = index


class OverlapError(EatError, ValueError):
    pass


class DataFormatError(EatError, ValueError):
    """Bad dataset content; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


class AlignmentError(EatError, ValueError):
    def __init__(self, message, sentence_id):
        super().__init__(f"sentence {sentence_id}: {message}")
        self.sentence_id = sentence_id


class UnboundPlaceholderError(EatError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unbound placeholder {{{self.name}}}"


class BackendError(EatError):
    pass


class TransportError(BackendError):
    """Wire failure after the retry budget is spent."""

    retryable = True

    def __init__(self, message, attempts):
        super().__init__(f"{message} (after {attempts} attempt(s))")
        self.attempts = attempts


class ReplayMissError(BackendError):
    def __init__(self, digest):
        super().__init__(f"no recorded reply for digest {digest}")
        self.digest = digest


class EmptyReplyError(BackendError):
    pass


class StageError(EatError):
    """A pipeline stage failed; ``round`` is 1-based, or the filter call."""

    def __init__(self, stage, round, cause):
        super().__init__(f"{stage} round {round}: {cause}")
        self.stage = stage
        self.round = round
        self.cause = cause


class ExtractionError(EatError):
    def __init__(self, message, raw):
        super().__init__(f"{message}: {raw!r}")
        self.raw = raw


class FetchError(EatError):
    def __init__(self, message, attempts):
        super().__init__(f"{message} (after {attempts} attempt(s))")
        self.attempts = attempts
