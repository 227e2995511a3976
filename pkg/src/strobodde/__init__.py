"""High-order stroboscopic averaging of periodically forced constant-delay equations."""

from .averaging import (
    AveragedDDE,
    Word,
    WordBasisEvaluator,
    averaged_order1,
    averaged_order2,
    averaged_order2_segmented,
    integrate_averaged,
    word_basis,
)
from .core import (
    History,
    Mode,
    ModeSet,
    ODEMode,
    ODEModeSet,
    OscillatoryDDE,
    StroboscopicGrid,
    constant_history,
    stroboscopic_grid,
    validate_problem,
)
from .integrators import DenseSolution, Tolerances, integrate_dde, integrate_ode, sample
from .segmentation import SegmentedODE, integrate_segmented, patch, segment
from .toggle import (
    ToggleParams,
    preset,
    toggle_averaged2,
    toggle_averaged3,
    toggle_oscillatory,
)

__version__ = "0.1.0"

__all__ = [
    "AveragedDDE",
    "Word",
    "WordBasisEvaluator",
    "averaged_order1",
    "averaged_order2",
    "averaged_order2_segmented",
    "integrate_averaged",
    "word_basis",
    "History",
    "Mode",
    "ModeSet",
    "ODEMode",
    "ODEModeSet",
    "OscillatoryDDE",
    "StroboscopicGrid",
    "constant_history",
    "stroboscopic_grid",
    "validate_problem",
    "ToggleParams",
    "preset",
    "toggle_averaged2",
    "toggle_averaged3",
    "toggle_oscillatory",
    "DenseSolution",
    "Tolerances",
    "integrate_dde",
    "integrate_ode",
    "sample",
    "SegmentedODE",
    "integrate_segmented",
    "patch",
    "segment",
]
