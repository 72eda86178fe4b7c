from oneshot_ent.models.bipartition import Bipartition
from oneshot_ent.models.bracketed_value import BracketedValue, Provenance
from oneshot_ent.models.channel import Branch, MeasurePrepareChannel
from oneshot_ent.models.density_matrix import DensityMatrix
from oneshot_ent.models.effect import Effect
from oneshot_ent.models.protocol_outcome import ProtocolOutcome
from oneshot_ent.models.regularization_series import RegularizationSeries, SeriesEntry
from oneshot_ent.models.run_config import NumericSettings, RunConfig
from oneshot_ent.models.sdp_block import BlockKind, SdpBlock
from oneshot_ent.models.sdp_solution import SdpSolution, SdpSolverError, SdpStatus
from oneshot_ent.models.sep_opt_result import SepOptResult
from oneshot_ent.models.sepp_report import SeppReport
from oneshot_ent.models.theorem_record import MonotonicityRecord, RecordStatus, TheoremRecord

__all__ = [
    "Bipartition",
    "BlockKind",
    "BracketedValue",
    "Branch",
    "DensityMatrix",
    "Effect",
    "MeasurePrepareChannel",
    "MonotonicityRecord",
    "NumericSettings",
    "ProtocolOutcome",
    "Provenance",
    "RecordStatus",
    "RegularizationSeries",
    "RunConfig",
    "SdpBlock",
    "SdpSolution",
    "SdpSolverError",
    "SdpStatus",
    "SepOptResult",
    "SeppReport",
    "SeriesEntry",
    "TheoremRecord",
]
