#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fcmon/monitor.hpp"
#include "fcmon/stream.hpp"

namespace fcmon {

/// Seeded source of the variates used by the simulator. Same seed, same
/// sequence (for a given standard library).
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    double gaussian() { return normal_(engine_); }
    /// Sum of five squared independent standard normals.
    double chi_square5();
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

RandomSource random_source(std::uint64_t seed);

enum class NullDistribution { Gaussian, ChiSquare5 };

const char* to_string(NullDistribution d);
NullDistribution parse_null_distribution(const std::string& name);

struct NullStudyConfig {
    NullDistribution distribution = NullDistribution::Gaussian;
    std::size_t stream_length = 10000;
    std::size_t batch_size = 50;
    double alpha = 0.05;
    std::size_t n_replications = 1000;
    std::uint64_t seed = 1;
    ResetMode reset = ResetMode::RejectingBatch;

    void validate() const;
};

struct NullStudyResult {
    std::size_t rejections = 0;
    std::size_t tests = 0;
    double frequency() const noexcept {
        return tests ? static_cast<double>(rejections) / static_cast<double>(tests) : 0.0;
    }
};

/// Streams iid draws through the mean-test monitor, batch by batch: warm-up
/// on the first batch, then one test per batch. Replication r draws from
/// derive_seed(seed, r), so the result does not depend on `threads`.
NullStudyResult run_null_study(const NullStudyConfig& config, unsigned threads = 1);

/// `distribution,length,batch,alpha,rejection_freq`
void write_null_study_csv(const std::vector<std::pair<NullStudyConfig, NullStudyResult>>& rows, std::ostream& out);

struct LevelShift {
    long day = 0;  // 0-based day from which the multiplier applies
    std::size_t stream = 0;
    double multiplier = 1.0;
};

/// Synthetic demand: per-stream seasonal profile (hour-of-day shape times
/// day-of-week factor) times a piecewise-constant level, plus Gaussian noise
/// with standard deviation noise_scale * expected demand, correlated across
/// streams through a common factor, clipped at 0.
struct RegimeScenario {
    std::size_t n_streams = 4;
    long n_days = 120;
    long slots_per_day = 60;
    long days_per_week = 7;
    double noise_scale = 0.15;
    double correlation = 0.3;
    bool flat_profile = false;  // constant profile (level only)
    std::vector<double> base_levels;  // empty: drawn from the seed
    std::vector<LevelShift> shifts;
    std::uint64_t seed = 1;

    void validate() const;
};

/// The reference desk-scale scenario: 4 streams, 120 days of 60 slots, one
/// level shift per stream on a day in [40, 100] by a factor between 1.6 and
/// 2.5 (up or down), all drawn from `seed`.
RegimeScenario default_scenario(std::uint64_t seed);

/// Noise-free demand of `stream` at 1-based `tick`.
double expected_demand(const RegimeScenario& scenario, long tick, std::size_t stream);

/// Streams named s1..sD with batch size slots_per_day.
StreamSet gen_regime_streams(const RegimeScenario& scenario);

/// Key-value form (used by scenario files and run configs):
/// n_streams, n_days, slots_per_day, days_per_week, noise_scale, correlation,
/// flat_profile, base_levels (comma list), shifts (day:stream:multiplier,...),
/// seed, default (true: start from default_scenario(seed)).
RegimeScenario scenario_from_keys(const std::map<std::string, std::string>& keys);

}  // namespace fcmon
