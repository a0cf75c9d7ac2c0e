"""A resumable parameter sweep over ellipsoids (1, b, c).

Each shape contributes one ledger row: the eigenvalue floor, the largest
positive eigenvalue that survives the resolution filter, and the Schatten
sum of alpha^(2p).  Interrupting and rerunning picks up from the ledger.
The summary checks that the sphere maximizes the floor and minimizes the
Schatten sum, which for p = 2 equals (7/8) zeta(3) on the sphere.
"""
import json
import tempfile
from pathlib import Path

from dlspectra import sweep
from dlspectra.explorer import EllipsoidFamily

family = EllipsoidFamily(bs=(1.0, 1.25), cs=(1.0, 1.25, 1.5), n_theta=16, n_phi=32)
with tempfile.TemporaryDirectory() as tmp:
    ledger = Path(tmp) / "ellipsoids.csv"
    result = sweep(family, p=2, ledger=ledger)
    print(ledger.read_text())
print(json.dumps(result.summary, indent=2, sort_keys=True))
