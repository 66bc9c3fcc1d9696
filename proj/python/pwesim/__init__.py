"""Graph-driven programmable wireless environment toolkit."""

from ._core import (  # noqa: F401
    Configuration,
    PathRecord,
    PowerDelayProfile,
    PweGraph,
    Scenario,
    TimeSample,
    TimeSeries,
    Vec3,
    __version__,
    compute_pdp,
    configure_kpaths,
    doppler_spread,
    handle_pdp_request,
    load_scenario,
    load_scenario_text,
    merge_bias,
    pdp_to_csv,
    rms_delay_spread,
    rms_delay_spread_of,
    run_scenario,
    run_scenario_mode,
    serialize_scenario,
    timeseries_to_csv,
)
