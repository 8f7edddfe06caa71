"""Rebuild the bundled synthetic reduction scan.

sigma_abs = 1e-21 m^2, 2 % relative noise, seed 2024, twenty laser
positions from 11 to 18 mm at 5.5 W. Writes to the path given on the
command line, or prints the CSV.
"""
import sys
import tempfile
from pathlib import Path

import numpy as np

from mattersim.core import Particle, VelocityDistribution
from mattersim.metrology import RecoilScanConfig, simulate_reduction_scan

cfg = RecoilScanConfig(D=0.0, lambda_K=532e-9, power=5.5, w_y=1e-3, d=266e-9,
                       velocity=VelocityDistribution("gaussian", 200.0, 20.0))
truth = Particle("PcH2", 514.0, sigma_abs=1e-21)
data = simulate_reduction_scan(cfg, np.linspace(0.011, 0.018, 20), truth, noise_std=0.02, seed=2024)

if len(sys.argv) > 1:
    data.to_csv(Path(sys.argv[1]))
    print("wrote", sys.argv[1])
else:
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "scan.csv"
        data.to_csv(path)
        print(path.read_text(), end="")
