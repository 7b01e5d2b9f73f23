#pragma once

#include <cmath>
#include <stdexcept>

namespace sc3 {

enum class PathlossLogBase { Log10, Log2 };

// Link geometry for deriving a spectral efficiency from the path-loss model.
// Distances are in km and the carrier frequency in MHz, matching the usual
// 32.4 + 20 log(d) + 20 log(fc) coefficient convention.
struct ChannelGeometry {
    double distance_km = 0.0;
    double carrier_freq_mhz = 0.0;
    double noise_power_dbm = 0.0;
    PathlossLogBase pathloss_log_base = PathlossLogBase::Log10;
};

inline double pathloss_db(const ChannelGeometry& g) {
    if (g.distance_km <= 0.0) throw std::invalid_argument("pathloss_db: distance must be > 0");
    if (g.carrier_freq_mhz <= 0.0) throw std::invalid_argument("pathloss_db: carrier frequency must be > 0");
    auto lb = [&](double x) {
        return g.pathloss_log_base == PathlossLogBase::Log10 ? std::log10(x) : std::log2(x);
    };
    return 32.4 + 20.0 * lb(g.distance_km) + 20.0 * lb(g.carrier_freq_mhz);
}

// Shannon spectral efficiency, bits/s/Hz.
inline double spectral_efficiency(double snr_linear) {
    if (snr_linear < 0.0) throw std::invalid_argument("spectral_efficiency: SNR must be >= 0");
    return std::log2(1.0 + snr_linear);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Bits moved over one link in one cycle.
inline double link_bits(double bandwidth_hz, double time_s, double se) {
    if (bandwidth_hz < 0.0 || time_s < 0.0 || se < 0.0)
        throw std::invalid_argument("link_bits: arguments must be >= 0");
    return bandwidth_hz * time_s * se;
}

// One link of a loop: the spectral efficiency either given directly or
// derived from geometry under the constant-received-SNR convention.
struct LinkSpec {
    double spectral_efficiency = 0.0; // bits/s/Hz
};

} // namespace sc3
