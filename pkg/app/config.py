import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent
DATA_DIR = BASE_DIR / "data"
# Bare alist names given to --code are looked up here; override via env
CODES_DIR = Path(os.environ.get("MP_LDPC_CODES_DIR", str(DATA_DIR / "codes"))).expanduser()

# MP-XOR-SAT defaults (single source; used by decoder, harness and CLI flags)
DEFAULT_THETA = -0.1        # flip threshold, close to 0 works best
DEFAULT_ETA = 0.005         # learning rate, useful range 0.001-0.01
DEFAULT_I_MAX = 100         # iteration cap shared by all decoders in comparative runs
DEFAULT_Q_MIN = -30.0       # sentinel log(eps)
TANH_CLAMP = 1e-12          # |tanh(r)| kept inside [TANH_CLAMP, 1 - TANH_CLAMP] before the log

# Reference decoders
SPA_LLR_CLIP = 30.0
GDBF_MULTI_THETA = -0.6

# Monte-Carlo harness
STOP_FRAME_ERRORS = 100
MAX_FRAMES = 10_000_000
BATCH_FRAMES = 256          # frames per work item; fixed so aggregates never depend on scheduling
DEFAULT_SEED = 1

# Builtin codes
REG32_SEED = 7
BUILTIN_CODES = ("majority", "ham74", "reg32")

# Worker count override for simulations (takes precedence over --workers)
_threads = os.environ.get("MP_LDPC_THREADS", "").strip()
WORKERS_OVERRIDE = int(_threads) if _threads.isdigit() and int(_threads) > 0 else None

LOG_LEVEL = os.environ.get("MP_LDPC_LOG_LEVEL", "WARNING").strip().upper()
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
