"""Chirplet transform with second- and third-order synchrosqueezing."""

__version__ = "0.1.0"

from .core import (ChirpGrid, FreqGrid, Grids, InvalidArgument, InvalidData, Signal, TFCVolume,
                   TFPlane, TimeGrid, make_grids, project_volume, read_signal_csv, read_volume,
                   write_plane_csv, write_signal_csv, write_volume)
from .windows import PAIRS, WindowBank, gaussian_bank, half_length
from .chirplet import CTFrame, FrameDerivatives, FrameEngine, ct_frame, frame_derivatives
from .estimators import (IngredientField, QOps, Thresholds, hsct_ingredients, q_ops,
                         reassign_with_theta, sct_ingredients)
from .squeeze import (Transform, TransformParams, ct_volume, ideal_plane, ideal_volume,
                      squeeze_volume)
from .metrics import (Evaluator, MetricsReport, emd_1d, emd_2d, emd_points, evaluate,
                      renyi_entropy)
from .synth import ModeSpec, analytic_ridge, builtin, gen, modes_from_config, x3_crossing
from .pipeline import evaluate_signal
