"""Exception types raised across the package."""


class GibbsVarError(Exception):
    pass


class ValidationError(GibbsVarError, ValueError):
    """Input failed a precondition (shape, range, Hermiticity, ...)."""


class DomainError(GibbsVarError, ValueError):
    """A scalar function was applied outside its domain."""


class ResourceError(GibbsVarError):
    """Requested problem size exceeds what dense simulation supports."""


class InfeasibleParametersError(ValidationError):
    pass


class ConfigurationError(GibbsVarError):
    pass


class CertificateError(GibbsVarError):
    """A series failed its a-posteriori error certificate.

    The failing certificate is kept on ``.certificate`` so callers can still
    report it.
    """

    def __init__(self, message, certificate, series=None):
        super().__init__(message)
        self.certificate = certificate
        self.series = series


class SpectrumWarning(UserWarning):
    """Density-matrix spectrum lies outside the certified series domain."""


class PerformanceWarning(UserWarning):
    pass
