"""Toy FRW cosmology with a quantized scale factor, photon-measurement
back-action on the universe wavefunction, and a moving-mirror cavity analogue.
"""
__version__ = "0.1.0"

from .errors import (CollapseError, ConfigurationError, DegenerateStateError,  # noqa: E402
                     InvalidArgumentError, InvalidRangeError, MultimodalError,
                     NoDetectionError, NumericalError, QuadratureError, SingularityError,
                     SupportTruncationError, TfrwError)
from .evolution import (BroadenedScaling, DenseMatrix, Identity, UniformScaling,  # noqa: E402
                        apply, compose)
from .grid import (ScaleGrid, UniverseWavefunction, gaussian_packet, make_log_grid,  # noqa: E402
                   make_uniform_grid, moments, normalize, overlap)
from .kernel import (kernel_power, peak_ratio, q_lorentzian_closed,  # noqa: E402
                     q_numeric)
from .optomech import (OptomechParams, OptomechState, RotatingFrameConfig,  # noqa: E402
                       a_om_of_x, free_mirror_accel, hubble_mirror_velocity,
                       integrate_trajectory, mechanical_energy, mirror_posterior_update,
                       rotating_frame_frequencies, x_of_a_om)
from .pipeline import (MeasurementEvent, general_chain, measure_k, measure_once,  # noqa: E402
                       simple_example_direct)
from .profiles import (Gaussian, Lorentzian, NearDelta, Tabulated, evaluate,  # noqa: E402
                       l2_norm, matched_profile)
