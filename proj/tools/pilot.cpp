// Calibration run behind the frozen region radii: per-trial and per-eigenvalue
// deviation quantiles at d = 100, eps = 2, N = 1000, seed 1.
#include <cstdio>
#include <vector>

#include "pseudoscope/experiments.hpp"

int main() {
    using namespace pseudoscope;
    const std::vector<Structure> classes = {Structure::zero(), Structure::diagonal({2.0, 3.0}), Structure::jordan(),
                                            Structure::toeplitz({3.0, 2.0}), Structure::toeplitz({3.0, 2.0, 1.0})};
    std::printf("structure,trial_q50,trial_q90,trial_q99,trial_max,eig_q99,eig_q999,failed\n");
    for (const Structure& s : classes) {
        ExperimentConfig cfg;
        cfg.structure = s;
        cfg.d = 100;
        cfg.eps = 2.0;
        cfg.trials = 1000;
        cfg.seed = 1;
        cfg.delta = 0.25;  // radius does not affect the deviations
        const ConcentrationReport r = run_experiment(cfg);
        std::printf("%s,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%zu\n", to_string(s).c_str(), r.deviation.q50,
                    r.deviation.q90, r.deviation.q99, r.deviation.max, r.eigenvalue_deviation.q99,
                    r.eigenvalue_deviation.q999, r.failed_trials);
    }
}
