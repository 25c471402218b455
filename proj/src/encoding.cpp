#include "alignnd/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "alignnd/errors.hpp"

namespace alignnd {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
}

void EncoderConfig::validate() const {
    if (channels <= 0 || channels % 4 != 0) {
        throw std::invalid_argument("EncoderConfig: channels must be positive and divisible by 4");
    }
    if (cutoff_d <= 0.0 || cutoff_angle <= 0.0) {
        throw std::invalid_argument("EncoderConfig: cutoffs must be positive");
    }
}

std::vector<double> rbf_expand(double x, double cutoff, int length) {
    if (x < 0.0) throw std::invalid_argument("rbf_expand: x must be nonnegative");
    std::vector<double> out(static_cast<std::size_t>(length));
    const double amp = std::sqrt(2.0 / cutoff);
    if (x < 1e-10) {
        for (int n = 1; n <= length; ++n) {
            out[n - 1] = amp * n * M_PI / cutoff;
        }
        return out;
    }
    for (int n = 1; n <= length; ++n) {
        out[n - 1] = amp * std::sin(n * M_PI * x / cutoff) / x;
    }
    return out;
}

FeatureVector encode_bond(double d, const EncoderConfig& cfg) {
    cfg.validate();
    if (d <= 0.0) throw std::invalid_argument("encode_bond: distance must be positive");
    return rbf_expand(d, cfg.cutoff_d, cfg.channels);
}

FeatureVector encode_angle(AngleKind kind, double angle_deg, const EncoderConfig& cfg) {
    cfg.validate();
    const int d = cfg.channels;
    FeatureVector out(static_cast<std::size_t>(d), 0.0);
    const double rad = angle_deg * kDegToRad;

    if (kind == AngleKind::BondAngle) {
        if (angle_deg < 0.0 || angle_deg > 180.0) {
            throw DataError("encode_angle: bond angle out of [0,180]: " + std::to_string(angle_deg));
        }
        if (cfg.bond_angle_sincos) {
            const auto cos_part = rbf_expand(std::cos(rad) + 1.0, cfg.cutoff_angle, d / 4);
            const auto sin_part = rbf_expand(std::sin(rad) + 1.0, cfg.cutoff_angle, d / 4);
            std::copy(cos_part.begin(), cos_part.end(), out.begin());
            std::copy(sin_part.begin(), sin_part.end(), out.begin() + d / 4);
        } else {
            const auto half = rbf_expand(std::cos(rad) + 1.0, cfg.cutoff_angle, d / 2);
            std::copy(half.begin(), half.end(), out.begin());
        }
        return out;
    }

    if (angle_deg < 0.0 || angle_deg >= 360.0) {
        throw DataError("encode_angle: dihedral out of [0,360): " + std::to_string(angle_deg));
    }
    const auto cos_part = rbf_expand(std::cos(rad) + 1.0, cfg.cutoff_angle, d / 4);
    const auto sin_part = rbf_expand(std::sin(rad) + 1.0, cfg.cutoff_angle, d / 4);
    std::copy(cos_part.begin(), cos_part.end(), out.begin() + d / 2);
    std::copy(sin_part.begin(), sin_part.end(), out.begin() + 3 * d / 4);
    return out;
}

}  // namespace alignnd
