import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from app.config import BUILTIN_CODES  # noqa: E402
from app.fec.alist import save_alist  # noqa: E402
from app.fec.ldpc import builtin_matrix  # noqa: E402

CODES = ROOT / "app" / "data" / "codes"

for name in BUILTIN_CODES:
    path = save_alist(builtin_matrix(name), CODES / f"{name}.alist")
    print(f"Wrote {path}")
