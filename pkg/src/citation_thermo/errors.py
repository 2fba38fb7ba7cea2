class ThermoError(Exception):
    """Base class for every error raised by citation_thermo."""


class ValidationError(ThermoError, ValueError):
    """
    Input data violates a structural invariant (duplicate ids, dangling edges,
    pioneer count, ...).
    """

    def __init__(self, message, record=None):
        # type: (str, object) -> None

        """
        :param message: Human-readable description of the problem.
        :param record: Optional locator of the offending record (line number, list
            index or node id), included in the string form of the error.
        """
        self.record = record
        self.message = message
        if record is not None:
            message = '{} (record {})'.format(message, record)
        super(ValidationError, self).__init__(message)


class EmptySnapshot(ValidationError):
    pass


class SnapshotOrderError(ValidationError):
    pass


class NodeNotFound(ThermoError, KeyError):
    def __str__(self):
        # KeyError quotes its argument; we don't want that
        return str(self.args[0]) if self.args else ''


class NumericalError(ThermoError, ArithmeticError):
    pass


class EntropyStagnant(NumericalError):
    pass


class DegenerateTopic(NumericalError):
    pass


class AllColdTopic(NumericalError):
    pass


class NoHistory(ThermoError, LookupError):
    pass


class TopicError(ThermoError):
    """Wraps a failure with the topic (and year, when known) it happened in."""

    def __init__(self, topic, cause, year=None):
        # type: (str, BaseException, int) -> None
        self.topic = topic
        self.year = year
        self.cause = cause
        where = topic if year is None else '{}@{}'.format(topic, year)
        super(TopicError, self).__init__('{}: {}'.format(where, cause))


def exit_code_for(error):
    # type: (BaseException) -> int

    """Map an error to the CLI exit code: 1 for validation, 2 for numerical failures."""
    if isinstance(error, TopicError):
        error = error.cause
    if isinstance(error, ValidationError):
        return 1
    if isinstance(error, NumericalError):
        return 2
    return 1
