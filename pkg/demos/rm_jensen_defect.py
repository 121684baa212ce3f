"""Richtmyer-Meshkov: where does averaging across meshes lose energy?

The energy of the averaged state never exceeds the average energy.  The
gap (the Jensen defect) marks regions where the levels disagree, here
the mixing zone around the perturbed interface.
"""
import sys

import numpy as np

from kconv import io
from kconv.analysis import jensen_energy_defect
from kconv.bench import ExperimentConfig, run_experiment


def main(t_end=1.0):
    result = run_experiment(ExperimentConfig(benchmark="richtmyer_meshkov", levels=(16, 32, 64),
                                             t_end=t_end), write=False)
    defect = jensen_energy_defect(result.stack, gas=result.gas)
    print(f"min {defect.min():.3e}  mean {defect.mean():.3e}  max {defect.max():.3e}")
    share = np.mean(defect > 0.1 * defect.max())
    print(f"{100 * share:.1f}% of cells carry more than a tenth of the peak defect")
    lo, hi = io.write_pgm("rm_jensen_defect.pgm", defect)
    print(f"wrote rm_jensen_defect.pgm (scaled from {lo:.3e} to {hi:.3e})")


if __name__ == "__main__":
    main(float(sys.argv[1]) if len(sys.argv) > 1 else 1.0)
