"""Exception hierarchy shared across the package."""


class DeltaRecourseError(Exception):
    """Base class for all package errors."""


class MissingColumn(DeltaRecourseError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"column not found in input file: {name!r}")


class ParseError(DeltaRecourseError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column!r}: cannot parse {value!r} as numeric")


class UnknownLabel(DeltaRecourseError):
    def __init__(self, row, value):
        self.row = row
        super().__init__(f"row {row}: target value {value!r} is not one of the two configured labels")


class InvalidFraction(DeltaRecourseError):
    def __init__(self, fraction):
        super().__init__(f"train fraction must lie strictly in (0,1), got {fraction}")


class SchemaMismatch(DeltaRecourseError):
    pass


class EmptyDataset(DeltaRecourseError):
    pass


class CellOutOfRange(DeltaRecourseError):
    def __init__(self, variable, cell, n_cells):
        self.variable = variable
        self.cell = cell
        super().__init__(f"cell index {cell} out of range for variable {variable!r} ({n_cells} cells)")


class DuplicateVariable(DeltaRecourseError):
    pass


class DuplicateId(DeltaRecourseError):
    pass


class FingerprintMismatch(DeltaRecourseError):
    pass


class FormatError(DeltaRecourseError):
    pass


class InfeasibleConstraints(DeltaRecourseError):
    pass


class UnknownRowId(DeltaRecourseError):
    def __init__(self, row_id):
        self.row_id = row_id
        super().__init__(f"no knowledge-base row with id {row_id!r}")


class TooFewRows(DeltaRecourseError):
    pass


class LengthMismatch(DeltaRecourseError):
    pass
