#pragma once

#include <vector>

namespace alignnd {

enum class AngleKind { BondAngle, Dihedral };

struct EncoderConfig {
    int channels = 64;        // D, divisible by 4
    double cutoff_d = 6.0;    // RBF cutoff for bond distances, Angstrom
    double cutoff_angle = 2.0;  // RBF cutoff for shifted cosine/sine values
    // Alternative bond-angle layout: split the first half-vector into
    // cos/sin quarters instead of cos over the full half.
    bool bond_angle_sincos = false;

    void validate() const;
};

using FeatureVector = std::vector<double>;

// Radial Bessel basis expansion: component n (1-based) is
// sqrt(2/c) * sin(n*pi*x/c) / x, with the analytic x->0 limit
// sqrt(2/c) * n*pi/c used below 1e-10.
std::vector<double> rbf_expand(double x, double cutoff, int length);

// Bond distance d -> D channels via rbf_expand(d, cutoff_d, D).
FeatureVector encode_bond(double d, const EncoderConfig& cfg);

// Angle (degrees) -> D channels. Bond angles occupy the first half of
// the vector as rbf(cos a + 1); dihedrals occupy the third quarter as
// rbf(cos a' + 1) and the fourth as rbf(sin a' + 1). Unused channels
// are zero, so the two kinds have disjoint support.
FeatureVector encode_angle(AngleKind kind, double angle_deg, const EncoderConfig& cfg);

}  // namespace alignnd
