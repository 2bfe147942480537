# -*- coding: utf-8 -*-
"""
Defines profile exceptions.
"""


class ProfileError(ValueError):
    """
    A profile, scenario or table file cannot be used.
    """
    pass


class ProfileParseError(ProfileError):
    """
    A file is not well-formed or does not conform to its schema.
    """

    def __init__(self, path, message, line=None, column=None, field=None):
        """
        Initialises the ProfileParseError.

        Args:
            path: The file which failed to parse.
            message: The reason.
            line: Optional. The line number of a syntax error.
            column: Optional. The column number of a syntax error.
            field: Optional. The dotted path of the offending field.
        """
        location = str(path)
        if line is not None:
            location += ':{0}:{1}'.format(line, column or 0)
        if field is not None:
            location += ' [{0}]'.format(field)
        super(ProfileParseError, self).__init__(
            '{0}: {1}'.format(location, message))
        self.path = path
        self.line = line
        self.column = column
        self.field = field


class ProfileValidationError(ProfileError):
    """
    A profile violates one of its invariants.
    """

    def __init__(self, message, point_index=None):
        super(ProfileValidationError, self).__init__(message)
        self.point_index = point_index
