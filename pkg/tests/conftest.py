import sys
from pathlib import Path

# test-local modules (helpers, oracles) import as top-level names
sys.path.insert(0, str(Path(__file__).parent))
