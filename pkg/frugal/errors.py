class FrugalError(ValueError):
    """Base class for every error raised by the pipeline."""


class ConfigError(FrugalError):
    """Invalid LDA / DE / experiment configuration."""


class DatasetError(FrugalError):
    """Problems with raw input data (CSV shape, duplicate ids, empty corpora)."""


class DegenerateDataError(FrugalError):
    """Training data a learner cannot use, e.g. a single-class fold."""


class ShapeError(FrugalError):
    """A feature row does not match the width the model was trained on."""
