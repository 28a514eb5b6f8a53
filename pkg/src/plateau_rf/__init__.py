"""Design and analysis of sub-resonant linewidth-plateau Purcell filters."""
from .network import (
    Netlist,
    SeriesCapacitor,
    SeriesImpedance,
    SeriesInductor,
    ShuntAdmittance,
    ShuntCapacitor,
    ShuntInductor,
    TransmissionLine,
    TwoPort,
    cascade,
    element_abcd,
    input_admittance,
    nodal_oracle,
    re_admittance_lossless,
)
from .synthesis import (
    ModeLCR,
    QubitMode,
    cpw_halfwave_mode,
    effective_capacitance,
    find_resonance,
    indirect_re_admittance,
    linewidth,
    qubit_t1_limit,
)
from .design import (
    LadderFilter,
    PlateauSpec,
    QubitCouplingSpec,
    denominator_poly,
    filter_poles,
    filter_re_admittance,
    linewidth_sweep,
    low_freq_slope,
    optimize_plateau,
    plateau_metrics,
    qubit_re_admittance,
    table1_filters,
)
from .fitting import (
    ComplexTrace,
    InterferenceParams,
    ResonanceFit,
    canonicalize,
    fit_trace,
    interference_fit,
    lsq_resonance_fit,
    remove_cable_delay,
    synth_trace,
    taubin_fit,
    windowed_fit,
)

__version__ = "0.1.0"
