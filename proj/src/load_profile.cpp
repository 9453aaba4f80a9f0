#include "pvhc/load_profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pvhc/errors.hpp"
#include "pvhc/kernels.hpp"
#include "pvhc/rng.hpp"

namespace pvhc {

double LoadProfile::energy_kwh() const {
    double e = 0.0;
    for (double x : kw) e += x;
    return e * resolution_s / 3600.0;
}

void LoadPool::compute_peaks() {
    peaks_kw.resize(profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i)
        peaks_kw[i] = kernels::ops().reduce_max(profiles[i].kw.data(), profiles[i].kw.size());
}

void LoadPool::validate() const {
    if (profiles.empty()) throw ValidationError("load pool is empty");
    const std::size_t len = profiles[0].kw.size();
    for (const LoadProfile& p : profiles) {
        if (p.resolution_s != resolution_s)
            throw ValidationError("mixed resolutions in load pool (house '" + p.house_id + "')");
        if (p.kw.size() != len)
            throw ValidationError("profile length mismatch in pool (house '" + p.house_id + "')");
        if (static_cast<double>(p.kw.size()) * p.resolution_s != kWeekSeconds)
            throw ValidationError("profile for house '" + p.house_id +
                                  "' does not span exactly one week");
    }
}

LoadPool ingest_csv_text(const std::string& text, double resolution_s,
                         const std::string& origin) {
    if (resolution_s <= 0.0) throw ValidationError("resolution must be positive");
    const std::size_t expected =
        static_cast<std::size_t>(kWeekSeconds / resolution_s);
    if (static_cast<double>(expected) * resolution_s != kWeekSeconds)
        throw ValidationError("resolution does not divide one week evenly");

    LoadPool pool;
    pool.resolution_s = resolution_s;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            if (line.rfind("house_id", 0) != 0)
                throw ParseError(origin + ":1: header must start with 'house_id'");
            header_seen = true;
            continue;
        }
        LoadProfile p;
        p.resolution_s = resolution_s;
        p.kw.reserve(expected);
        std::size_t start = 0, field = 0;
        while (start <= line.size()) {
            std::size_t end = line.find(',', start);
            if (end == std::string::npos) end = line.size();
            const std::string cell = line.substr(start, end - start);
            if (field == 0) {
                if (cell.empty())
                    throw ParseError(origin + ":" + std::to_string(line_no) +
                                     ": empty house_id");
                p.house_id = cell;
            } else {
                char* endp = nullptr;
                const double v = std::strtod(cell.c_str(), &endp);
                if (endp == cell.c_str() || *endp != '\0' || !std::isfinite(v))
                    throw ParseError(origin + ":" + std::to_string(line_no) + ": field " +
                                     std::to_string(field) + " is not a number");
                if (v < 0.0)
                    throw ParseError(origin + ":" + std::to_string(line_no) +
                                     ": negative kW value at field " + std::to_string(field));
                p.kw.push_back(v);
            }
            ++field;
            start = end + 1;
            if (end == line.size()) break;
        }
        if (p.kw.size() != expected)
            throw ParseError(origin + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(expected) + " values, got " +
                             std::to_string(p.kw.size()));
        pool.profiles.push_back(std::move(p));
    }
    if (!header_seen) throw ParseError(origin + ": empty file");
    pool.validate();
    pool.compute_peaks();
    return pool;
}

LoadPool ingest_csv(const std::filesystem::path& path, double resolution_s) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open profile CSV '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ingest_csv_text(ss.str(), resolution_s, path.string());
}

namespace {

double bump(double h, double center, double sigma) {
    const double d = h - center;
    return std::exp(-d * d / (2.0 * sigma * sigma));
}

}  // namespace

LoadPool generate_synthetic_pool(std::size_t n_houses, std::uint64_t rng_seed,
                                 double resolution_s) {
    if (n_houses < 1) throw ValidationError("synthetic pool needs at least one house");
    const std::size_t steps = static_cast<std::size_t>(kWeekSeconds / resolution_s);
    LoadPool pool;
    pool.resolution_s = resolution_s;
    pool.profiles.reserve(n_houses);

    for (std::size_t h = 0; h < n_houses; ++h) {
        Rng rng = Rng::substream(rng_seed, "synth-house", h);
        const double base = rng.uniform(0.18, 0.65);
        const double morning_amp = rng.uniform(0.4, 2.6);
        const double morning_c = rng.uniform(6.0, 8.5);
        const double morning_s = rng.uniform(0.7, 1.5);
        const double evening_amp = rng.uniform(1.1, 5.6);
        const double evening_c = rng.uniform(17.8, 20.2);
        const double evening_s = rng.uniform(1.0, 2.2);
        const double midday_amp = rng.uniform(0.1, 1.0);
        const double noise_amp = rng.uniform(0.05, 0.30);

        double day_factor[7];
        for (int d = 0; d < 7; ++d) day_factor[d] = rng.uniform(0.85, 1.15);

        LoadProfile p;
        p.house_id = "p" + std::to_string(h);
        p.resolution_s = resolution_s;
        p.kw.resize(steps);
        for (std::size_t t = 0; t < steps; ++t) {
            const double sec = static_cast<double>(t) * resolution_s;
            const int day = static_cast<int>(sec / 86400.0);
            const double hour = std::fmod(sec, 86400.0) / 3600.0;
            const bool weekend = day >= 5;
            double kw = base;
            kw += morning_amp * (weekend ? 0.55 : 1.0) * bump(hour, morning_c + (weekend ? 1.5 : 0.0), morning_s);
            kw += evening_amp * day_factor[day] * bump(hour, evening_c, evening_s);
            kw += midday_amp * (weekend ? 1.8 : 0.6) * bump(hour, 13.0, 2.5);
            kw += noise_amp * rng.uniform();
            p.kw[t] = std::clamp(kw, 0.0, 12.0);
        }
        pool.profiles.push_back(std::move(p));
    }
    pool.compute_peaks();
    return pool;
}

LoadProfile resample(const LoadProfile& profile, double target_resolution_s) {
    if (target_resolution_s < profile.resolution_s)
        throw ValidationError("upsampling is not supported");
    const double ratio = target_resolution_s / profile.resolution_s;
    const std::size_t block = static_cast<std::size_t>(ratio);
    if (static_cast<double>(block) != ratio)
        throw ValidationError("target resolution must be an integer multiple of the source");
    LoadProfile out;
    out.house_id = profile.house_id;
    out.resolution_s = target_resolution_s;
    const std::size_t blocks = profile.kw.size() / block;
    if (blocks * block != profile.kw.size())
        throw ValidationError("profile length is not divisible by the resampling block");
    out.kw.resize(blocks);
    kernels::ops().block_mean(out.kw.data(), profile.kw.data(), blocks, block);
    return out;
}

}  // namespace pvhc
