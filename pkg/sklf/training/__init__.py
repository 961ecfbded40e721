"""Training, evaluation and checkpointing of light field models."""

from .checkpoint import load_checkpoint, load_model, save_checkpoint
from .config import TrainConfig, model_from_config
from .estimator import LightFieldRegressor
from .evaluation import evaluate, render_views
from .loop import batch_loss_and_gradients, train, train_step
from .sampling import TrainPixels, sample_batch
from .state import TrainState, init_train_state
