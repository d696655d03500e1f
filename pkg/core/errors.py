"""Exception hierarchy shared by every pipeline stage"""


class PipelineError(Exception):
    """Base error. `code` is the stable machine-readable name printed by the CLI."""

    code = "pipeline_error"


class ShapeMismatchError(PipelineError):
    code = "shape_mismatch"


class NonFiniteError(PipelineError):
    code = "non_finite"


class NonDeterministicError(PipelineError):
    code = "non_deterministic"


class UnknownVocabError(PipelineError):
    code = "unknown_vocab"


class IndexOutOfRangeError(PipelineError):
    code = "index_out_of_range"


class TemplateLargerThanRegionError(PipelineError):
    code = "template_larger_than_region"


class UnmappedPositionError(PipelineError):
    code = "unmapped_position"


class EmptySplitError(PipelineError):
    code = "empty_split"


class DivergedLossError(PipelineError):
    code = "diverged_loss"


class EmptySetError(PipelineError):
    code = "empty_set"


class PipelineIOError(PipelineError):
    code = "io_error"


class ConfigMismatchError(PipelineError):
    code = "config_mismatch"


class CheckpointFormatError(PipelineError):
    code = "checkpoint_format"
