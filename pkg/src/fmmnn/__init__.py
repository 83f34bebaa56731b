"""Fourier multi-component multi-layer neural networks (FMMNNs).

Library + CLI for MMNN/ResMMNN/FCNN function approximation with sinusoidal
activations: partitioned training (frozen W, b; trained A, c), benchmark
target functions, executable constructive-approximation builders, and
loss-landscape scanning.
"""

from .activations import ActivationKind, act_eval, parse_activation
from .core import (NumericError, PrngState, QuadratureRule, RangeError,
                   ShapeError, integrate, matmul, prng_uniform)
from .models import (Jet2, Model, ModelSpec, build_model, count_params,
                     forward, forward_batch, forward_jet, load_model,
                     save_model)
from .constructive import (ConstructionError, CpwlFunction, FloorNet,
                           ShallowReluNet, SineMatch, SintuReluApprox,
                           TheoremNet1d, build_floor_net,
                           build_theorem_net_1d, cpwl_to_relu_net,
                           modulus_estimate, search_sine_match,
                           sintu_relu_approx)
from .landscape import (LandscapeGrid, ParamCoord, analytic_landscape,
                        scan_pair)
from .targets import (Dataset, TargetFn, get_target, make_dataset, sample,
                      sample_points, target_names)
from .training import (DivergenceError, LrSchedule, TrainConfig, TrainReport,
                       adam_step, evaluate, loss_and_grad, lr_at, train)

__version__ = "0.1.0"
