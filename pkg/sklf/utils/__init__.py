from .parallel import progress_settings, run_in_parallel
from .random import named_streams
from .validators import check_same_dimensions, ensure_image, ensure_vectors
