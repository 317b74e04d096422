"""Multi-scale trend statistics for minute bid/ask currency series."""

__version__ = "0.1.0"

from .ingest import (  # noqa: E402
    CarryForward,
    FormatDescriptor,
    PriceSeries,
    Strict,
    TickRecord,
    parse_ticks,
    read_series_csv,
    resample,
    resample_with_report,
)
from .schedule import ScaleSchedule, make_schedule, parse_schedule  # noqa: E402
from .shifts import ShiftSeries, shift_at, shift_series  # noqa: E402
from .stats import (  # noqa: E402
    AlignedSample,
    CollectiveCurve,
    MatchingProfile,
    SimilarityHistogram,
    TupleGroups,
    align,
    build_tuple_index,
    collective_response,
    default_eps_grid,
    matching_average,
    matching_profile,
    similarity_histogram,
    similarity_histogram_naive,
    subsample,
)
from .synth import GeneratorSpec, generate  # noqa: E402
from .trends import (  # noqa: E402
    TrendMatrix,
    TrendTuple,
    counter,
    homogeneity,
    trend_at,
    trend_matrix,
)
