#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pvhc {

inline constexpr double kWeekSeconds = 604800.0;

// One week of household demand at a fixed resolution.
struct LoadProfile {
    std::string house_id;
    double resolution_s = 60.0;
    std::vector<double> kw;

    double energy_kwh() const;
};

struct LoadPool {
    std::vector<LoadProfile> profiles;
    double resolution_s = 60.0;
    // Weekly maximum of each profile, aligned with profiles.
    std::vector<double> peaks_kw;

    std::size_t size() const { return profiles.size(); }
    std::size_t steps() const { return profiles.empty() ? 0 : profiles[0].kw.size(); }
    void compute_peaks();
    void validate() const;  // nonempty, uniform resolution/length, kw >= 0
};

// CSV schema: header `house_id,t0,t1,...`, one row per house, values in kW.
// The resolution is declared by the caller, not inferred from the file.
LoadPool ingest_csv(const std::filesystem::path& path, double resolution_s);
LoadPool ingest_csv_text(const std::string& text, double resolution_s,
                         const std::string& origin = "<string>");

// Deterministic synthetic weekly profiles: base load plus morning/evening
// peaks with per-house randomized magnitudes, weekday/weekend variation and
// jitter. Bounded to [0, 12] kW.
LoadPool generate_synthetic_pool(std::size_t n_houses, std::uint64_t rng_seed,
                                 double resolution_s = 60.0);

// Block-mean downsampling; target must be an integer multiple of the source
// resolution. Preserves weekly energy exactly and never raises the peak.
LoadProfile resample(const LoadProfile& profile, double target_resolution_s);

}  // namespace pvhc
