#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "caero/simlab.hpp"

namespace caero {

// One row per hypothesis: identifier, optional noise scale, standardized samples.
struct Dataset {
    std::vector<std::string> ids;
    std::vector<double> sigma_hat;  // 1.0 when the CSV has no sigma_hat column
    std::vector<std::vector<double>> samples;
    std::vector<Truth> truth;  // -1 for real data

    std::size_t size() const { return ids.size(); }
};

// Header row required; a column named sigma_hat right after the id is optional.
Dataset read_dataset_csv(std::istream& in, const std::string& source = "<stream>");
Dataset load_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);

struct SyntheticDatasetSpec {
    std::size_t genes = 6033;
    std::size_t normal_samples = 50;
    std::size_t tumor_samples = 52;
    double fraction_changed = 0.1;
    double log_fold_change = 0.30103;  // log10(2)
    double sigma_median = 0.15;
    double sigma_spread = 0.35;  // sd of log sigma
    std::uint64_t seed = 0;
};

// Stand-in for a normal/tumor expression study, standardized against the normal group.
Dataset synthesize_dataset(const SyntheticDatasetSpec& spec);

struct DatasetConfig {
    std::string data_path;
    std::size_t prior_k = 2;
    double beta_slope = 2.0;
    double x0 = 0.6020599913279624;          // log10(4), divided by sigma_hat per row
    double theta_bar = 0.3010299956639812;   // log10(2), divided by sigma_hat per row
    double n_cap_exec = 50.0;
    std::size_t permutations = 1000;
    double budget = 1000.0;
    double cost = 1.0;
    double alpha = 0.05;
    double eta = 0.95;
    std::uint64_t seed_base = 0;
    std::size_t threads = 0;

    void validate() const;
};

// The two methods compared on real data: fixed n = n_cap_exec ERO and cost-aware ERO.
PolicyConfig dataset_baseline_policy(const DatasetConfig& config);
PolicyConfig dataset_cost_aware_policy(const DatasetConfig& config);
NRule dataset_n_rule(const DatasetConfig& config, const PolicyConfig& policy);

struct PreparedDataset {
    std::vector<HypothesisSpec> specs;
    std::vector<std::vector<double>> testing;  // samples after the reserved prior columns
    std::vector<Truth> truth;
    std::vector<std::string> ids;
};

PreparedDataset prepare_dataset(const Dataset& data, const DatasetConfig& config);

// Order of hypotheses for permutation i.
std::vector<std::size_t> permutation(std::size_t count, std::uint64_t seed);

AggregateReport run_dataset(const PreparedDataset& data, const DatasetConfig& config, const PolicyConfig& policy);

}  // namespace caero
