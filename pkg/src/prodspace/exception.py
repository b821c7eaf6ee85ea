import typing as t


class ProdSpaceException(Exception):
    pass


class ModelException(ProdSpaceException):
    """
    An error raised while constructing a coordinate model.
    """


class ShapeException(ProdSpaceException):
    """
    Grid values or coefficients do not match the product grid.
    """


class BandOverflowException(ProdSpaceException):
    """
    A requested eigenmode lies outside the retained band.
    """


class PreconditionException(ProdSpaceException):
    def __init__(self, message: str, check_name: t.Optional[str] = None):
        msg = f"[{check_name}] {message}" if check_name else message
        super().__init__(msg)
        self.check_name = check_name


class RunConfigException(Exception):
    """
    An error raised by a run config.
    """
