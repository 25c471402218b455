#pragma once

namespace alignnd {

// Unnormalized Gaussian spectral peak: the model target/prediction triple.
struct GaussianPeak {
    double mu = 0.0;         // eV
    double sigma = 1.0;      // eV, positive
    double amplitude = 0.0;  // nonnegative

    void validate() const;
};

}  // namespace alignnd
